// Copyright 2026 The mlat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mlat/scoring.hpp"

namespace mlat {

OriginalContext prepare_original(const ScoringStack& stack, const std::string& text, int label,
                                 const std::string& language) {
  OriginalContext ctx;
  ctx.text = text;
  ctx.label = label;
  ctx.language = language;
  ctx.p_true = stack.victim->class_probs(text)[label];
  ctx.lang_conf = stack.detector ? stack.detector->confidence(text, language) : 0.0;
  if (stack.encoder) ctx.embedding = stack.encoder->embed(text);
  return ctx;
}

CandidateScores score_candidate(const ScoringStack& stack, const OriginalContext& orig,
                                const std::string& candidate) {
  CandidateScores out;
  std::vector<double> probs;
  try {
    probs = stack.victim->class_probs(candidate);
  } catch (const NumericError&) {
    // Degenerate candidate (tokenizes to nothing): recorded as a non-flip.
    out.valid = false;
    out.scores = ScoreBreakdown{};
    return out;
  }
  int pred = 0;
  for (size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[pred]) pred = static_cast<int>(i);
  out.flipped = pred != orig.label;
  out.scores.v = victim_score(orig.p_true, probs[orig.label]);
  if (stack.encoder) {
    auto emb = stack.encoder->embed(candidate);
    out.scores.s = similarity_score(orig.embedding, emb);
  }
  if (stack.detector)
    out.scores.l = language_score(orig.lang_conf, stack.detector->confidence(candidate, orig.language));
  if (stack.kl) out.scores.d_kl = stack.kl->kl(orig.text, candidate);
  return out;
}

}  // namespace mlat
