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
//
// Hard-text scoring path: decoded candidates go through the real component
// tokenizers and models (no soft embeddings). Used by validation, candidate
// selection and reporting.

#ifndef MLAT_SCORING_HPP_
#define MLAT_SCORING_HPP_

#include <string>
#include <vector>

#include "mlat/models.hpp"
#include "mlat/objective.hpp"

namespace mlat {

struct ScoringStack {
  const VictimModel* victim = nullptr;
  const SentenceEncoder* encoder = nullptr;
  const LanguageDetector* detector = nullptr;
  const KlScorer* kl = nullptr;  // optional; d_kl = 0 when absent
};

// Per-example constants cached once: the original is fixed data.
struct OriginalContext {
  std::string text;
  int label = 0;
  std::string language;
  double p_true = 0;
  double lang_conf = 0;
  std::vector<double> embedding;
};

OriginalContext prepare_original(const ScoringStack& stack, const std::string& text, int label,
                                 const std::string& language);

struct CandidateScores {
  ScoreBreakdown scores;  // v, s, l, d_kl filled; o is left to the caller's weights
  bool flipped = false;
  bool valid = true;  // degenerate candidates (empty text) score as failures
};

CandidateScores score_candidate(const ScoringStack& stack, const OriginalContext& orig,
                                const std::string& candidate);

}  // namespace mlat

#endif  // MLAT_SCORING_HPP_
