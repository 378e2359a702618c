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

#include "mlat/validation.hpp"

namespace mlat {

void ValidationWeights::validate() const {
  if (gamma_v < 0 || gamma_s < 0 || gamma_l < 0 || gamma_kl < 0)
    throw ConfigError("validation gamma coefficients must be nonnegative");
}

std::pair<EarlyStopState, bool> early_stop_update(EarlyStopState state, double metric) {
  if (metric > state.best_metric) {
    state.best_metric = metric;
    state.steps_since_improvement = 0;
    state.has_best = true;
  } else {
    state.steps_since_improvement++;
  }
  return {state, state.steps_since_improvement >= state.patience};
}

ValidationOutcome validate(const nn::Seq2SeqF& g, const Vocabulary& gen_vocab,
                           const std::vector<LabeledExample>& val_set, DecodeConfig decode_cfg,
                           const ScoringStack& stack, const ValidationWeights& w) {
  if (val_set.empty()) throw DataError("validate: empty validation set");
  w.validate();
  SentencePieceTokenizer tokenizer(&gen_vocab);
  ValidationOutcome out;
  double sum_score = 0;
  for (const auto& ex : val_set) {
    auto src = tokenizer.encode(ex.text);
    decode_cfg.batch_length = std::max<int>(1, static_cast<int>(src.size()));
    auto candidates = diverse_beam_search(g, src, decode_cfg);
    OriginalContext orig = prepare_original(stack, ex.text, ex.label, ex.language);
    for (const auto& cand : candidates) {
      std::string text = tokenizer.decode(cand.tokens);
      CandidateScores cs = score_candidate(stack, orig, text);
      double q = quality_score(cs.scores, w);
      double score = candidate_score(cs.scores, w);
      sum_score += score;
      out.mean_v += cs.scores.v;
      out.mean_s += cs.scores.s;
      out.mean_l += cs.scores.l;
      out.mean_kl += cs.scores.d_kl;
      out.mean_q += q;
      out.candidates++;
    }
  }
  if (out.candidates == 0) throw NumericError("validate: decoding produced no candidates");
  double n = static_cast<double>(out.candidates);
  out.metric = sum_score / n;
  out.mean_v /= n;
  out.mean_s /= n;
  out.mean_l /= n;
  out.mean_kl /= n;
  out.mean_q /= n;
  return out;
}

}  // namespace mlat
