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

#include "mlat/objective.hpp"

#include <cmath>
#include <iostream>

#include "mlat/mat.hpp"

namespace mlat {

void ObjectiveWeights::validate() const {
  if (alpha_v < 0 || alpha_s < 0 || alpha_l < 0 || alpha_kl < 0 || alpha_d < 0)
    throw ConfigError("objective alpha coefficients must be nonnegative");
  if (beta_v < 0 || beta_v >= 1) throw ConfigError("beta_v must lie in [0, 1)");
}

double similarity_score(const std::vector<double>& emb_x, const std::vector<double>& emb_xprime) {
  return matops::cosine(emb_x, emb_xprime);
}

double kl_term(const std::vector<double>& token_logprobs_g,
               const std::vector<double>& token_logprobs_gstar) {
  if (token_logprobs_g.empty()) throw NumericError("kl_term on an empty sequence");
  if (token_logprobs_g.size() != token_logprobs_gstar.size())
    throw NumericError("kl_term: sequences differ in length");
  double sum = 0;
  for (size_t t = 0; t < token_logprobs_g.size(); ++t)
    sum += token_logprobs_g[t] - token_logprobs_gstar[t];
  return sum / static_cast<double>(token_logprobs_g.size());
}

double example_objective(const ScoreBreakdown& b, const ObjectiveWeights& w) {
  return w.alpha_v * clip_below(b.v, w.beta_v) + w.alpha_s * clip_below(b.s, w.beta_s) -
         w.alpha_l * clip_above(b.l, w.beta_l) - w.alpha_kl * clip_above(b.d_kl, w.beta_kl);
}

ScoreBreakdown compose_breakdown(double v, double s, double l, double d_kl,
                                 const ObjectiveWeights& w) {
  ScoreBreakdown b{v, s, l, d_kl, 0.0};
  b.o = example_objective(b, w);
  return b;
}

double diversity_score(const std::vector<std::vector<double>>& generated_embs,
                       const std::vector<std::vector<double>>& original_embs) {
  if (generated_embs.size() != original_embs.size())
    throw NumericError("diversity_score: list sizes differ");
  size_t n = generated_embs.size();
  if (n < 2) {
    std::cerr << "mlat: warning: diversity undefined for batch of " << n << ", using 0\n";
    return 0.0;
  }
  double sum = 0;
  size_t pairs = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double sg = matops::cosine(generated_embs[i], generated_embs[j]);
      double so = matops::cosine(original_embs[i], original_embs[j]);
      sum += (sg - so) * (sg - so);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double batch_loss(const std::vector<double>& objectives, double d, double alpha_d) {
  if (objectives.empty()) throw NumericError("batch_loss on an empty batch");
  double mean = 0;
  for (double o : objectives) mean += o;
  mean /= static_cast<double>(objectives.size());
  return -mean + alpha_d * d;
}

}  // namespace mlat
