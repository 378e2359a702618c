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

#ifndef MLAT_OBJECTIVE_HPP_
#define MLAT_OBJECTIVE_HPP_

#include <vector>

#include "mlat/error.hpp"

namespace mlat {

// Coefficients of the example objective and batch loss.
struct ObjectiveWeights {
  double alpha_v = 0, alpha_s = 0, alpha_l = 0, alpha_kl = 0, alpha_d = 0;
  double beta_v = 0, beta_s = 0, beta_l = 0, beta_kl = 0;

  void validate() const;  // alphas >= 0, beta_v in [0, 1)
};

// Component scores of one (x, x') pair and their composite.
struct ScoreBreakdown {
  double v = 0;     // victim-confidence degradation
  double s = 0;     // sentence-embedding cosine similarity
  double l = 0;     // original-language confidence degradation
  double d_kl = 0;  // length-normalized KL estimate
  double o = 0;     // composite objective under the active weights
};

// Threshold clipping: keeps a only while it is still below (above) the
// threshold, so a satisfied term stops contributing gradient.
inline double clip_below(double a, double beta) { return a < beta ? a : 0.0; }
inline double clip_above(double a, double beta) { return a > beta ? a : 0.0; }

// v = p_victim(y_true | x) - p_victim(y_true | x').
inline double victim_score(double p_true_x, double p_true_xprime) {
  return p_true_x - p_true_xprime;
}

// l = p_lang(L_x | x) - p_lang(L_x | x').
inline double language_score(double p_lang_x, double p_lang_xprime) {
  return p_lang_x - p_lang_xprime;
}

// s = cosine of the two sentence embeddings.
double similarity_score(const std::vector<double>& emb_x, const std::vector<double>& emb_xprime);

// Single-sample estimator of the length-normalized divergence between the
// fine-tuned generator and the frozen reference on the same tokens:
// (1/T) sum_t (log p_g - log p_g*).
double kl_term(const std::vector<double>& token_logprobs_g,
               const std::vector<double>& token_logprobs_gstar);

// Composite, with the language term as a penalty:
// o = a_v t(v, b_v) + a_s t(s, b_s) - a_l t*(l, b_l) - a_kl t*(kl, b_kl).
double example_objective(const ScoreBreakdown& b, const ObjectiveWeights& w);

// Fills b.o from the component fields.
ScoreBreakdown compose_breakdown(double v, double s, double l, double d_kl,
                                 const ObjectiveWeights& w);

// Batch diversity penalty: mean squared difference of the strictly upper
// triangles of the generated and original pairwise cosine matrices.
// Batches of fewer than two examples have no pairs and score 0.
double diversity_score(const std::vector<std::vector<double>>& generated_embs,
                       const std::vector<std::vector<double>>& original_embs);

// L = -mean(objectives) + alpha_d * d.
double batch_loss(const std::vector<double>& objectives, double d, double alpha_d);

}  // namespace mlat

#endif  // MLAT_OBJECTIVE_HPP_
