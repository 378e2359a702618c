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

#ifndef MLAT_VALIDATION_HPP_
#define MLAT_VALIDATION_HPP_

#include <limits>
#include <utility>
#include <vector>

#include "mlat/data.hpp"
#include "mlat/decode.hpp"
#include "mlat/scoring.hpp"

namespace mlat {

struct ValidationWeights {
  double gamma_v = 7, gamma_s = 0.75, gamma_l = 1, gamma_kl = 0.6;

  void validate() const;  // all nonnegative
};

// Q(x, x') = g_s * s - g_l * l - g_kl * D_KL.
inline double quality_score(const ScoreBreakdown& b, const ValidationWeights& w) {
  return w.gamma_s * b.s - w.gamma_l * b.l - w.gamma_kl * b.d_kl;
}

// g_v * v + Q(x, x').
inline double candidate_score(const ScoreBreakdown& b, const ValidationWeights& w) {
  return w.gamma_v * b.v + quality_score(b, w);
}

struct EarlyStopState {
  double best_metric = -std::numeric_limits<double>::infinity();
  int steps_since_improvement = 0;
  int patience = 12;
  int validation_frequency = 24;  // batches between validations
  bool has_best = false;
  int best_step = -1;
};

// Strict improvement resets the counter; stop once patience consecutive
// non-improvements accumulate.
std::pair<EarlyStopState, bool> early_stop_update(EarlyStopState state, double metric);

struct ValidationOutcome {
  double metric = 0;  // mean candidate score over all (example, candidate) pairs
  double mean_v = 0, mean_s = 0, mean_l = 0, mean_kl = 0, mean_q = 0;
  long long candidates = 0;
};

// Decodes `num_candidates` per example with diverse beam search (no Gumbel
// noise at validation) and scores the candidates on the hard path.
ValidationOutcome validate(const nn::Seq2SeqF& g, const Vocabulary& gen_vocab,
                           const std::vector<LabeledExample>& val_set, DecodeConfig decode_cfg,
                           const ScoringStack& stack, const ValidationWeights& w);

}  // namespace mlat

#endif  // MLAT_VALIDATION_HPP_
