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

#ifndef MLAT_BRIDGE_HPP_
#define MLAT_BRIDGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mlat/mat.hpp"
#include "mlat/rng.hpp"
#include "mlat/vocab_map.hpp"

namespace mlat {

// Probabilities must never reach exactly zero before the log that feeds the
// Gumbel perturbation.
inline constexpr double kLogProbFloor = 1e-20;

// Per-step token distributions of a generated sequence: T rows over the
// generator vocabulary.
struct TokenProbMatrix {
  Mat<double> probs;

  int length() const { return probs.rows; }
  int vocab_size() const { return probs.cols; }

  // Rows sum to 1 within 1e-5, entries nonnegative.
  void validate() const;
};

struct GumbelConfig {
  double temperature = 1.1;
  int num_samples = 5;
  uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct EmbeddingTable {
  Mat<double> e;         // |V_i| x d_i
  std::string model_id;  // victim | similarity | language
};

struct WeightedEmbeddings {
  Mat<double> w;  // T x d_i
};

// Draws a T x V matrix of iid Gumbel(0,1) noise. Shared by the standalone
// sampler and the training graph so both see the same stream.
Mat<double> gumbel_noise(Rng& rng, int rows, int cols);

// Soft Gumbel-softmax resampling of p: for each of cfg.num_samples draws,
// row-wise softmax((log max(p, floor) + G) / temperature). Fixed seed gives
// bit-identical output.
std::vector<TokenProbMatrix> gumbel_sample(const TokenProbMatrix& p, const GumbelConfig& cfg);

// W = P_b * M * E. Dimension chain T x |V_g| * |V_g| x |V_i| * |V_i| x d_i.
WeightedEmbeddings weighted_embeddings(const TokenProbMatrix& p_b, const VocabMapMatrix& m,
                                       const EmbeddingTable& e);

// The P*M factor alone (T x |V_i|), exposed for reuse.
Mat<double> map_probs(const Mat<double>& p, const VocabMapMatrix& m);

}  // namespace mlat

#endif  // MLAT_BRIDGE_HPP_
