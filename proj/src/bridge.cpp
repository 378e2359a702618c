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

#include "mlat/bridge.hpp"

#include <cmath>

namespace mlat {

void TokenProbMatrix::validate() const {
  for (int r = 0; r < probs.rows; ++r) {
    double sum = 0;
    for (int c = 0; c < probs.cols; ++c) {
      double v = probs(r, c);
      if (v < 0.0) throw NumericError("token probability below zero");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-5)
      throw NumericError("token probability row " + std::to_string(r) + " sums to " +
                         std::to_string(sum));
  }
}

void GumbelConfig::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("gumbel temperature must be positive");
  if (num_samples < 1) throw ConfigError("gumbel num_samples must be >= 1");
}

Mat<double> gumbel_noise(Rng& rng, int rows, int cols) {
  Mat<double> g(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) g(r, c) = rng.gumbel();
  return g;
}

std::vector<TokenProbMatrix> gumbel_sample(const TokenProbMatrix& p, const GumbelConfig& cfg) {
  cfg.validate();
  p.validate();
  const int t = p.probs.rows, v = p.probs.cols;
  Rng rng(cfg.seed);
  std::vector<TokenProbMatrix> out;
  out.reserve(cfg.num_samples);
  for (int b = 0; b < cfg.num_samples; ++b) {
    Mat<double> g = gumbel_noise(rng, t, v);
    Mat<double> z(t, v);
    for (int r = 0; r < t; ++r)
      for (int c = 0; c < v; ++c)
        z(r, c) = (std::log(std::max(p.probs(r, c), kLogProbFloor)) + g(r, c)) / cfg.temperature;
    out.push_back({matops::softmax_rows(z)});
  }
  return out;
}

Mat<double> map_probs(const Mat<double>& p, const VocabMapMatrix& m) {
  if (p.cols != m.src_size()) throw NumericError("map_probs: P columns != src vocabulary size");
  Mat<double> out(p.rows, m.dst_size());
  for (const auto& e : m.entries()) {
    double w = e.weight();
    for (int r = 0; r < p.rows; ++r) out(r, e.col) += p(r, e.row) * w;
  }
  return out;
}

WeightedEmbeddings weighted_embeddings(const TokenProbMatrix& p_b, const VocabMapMatrix& m,
                                       const EmbeddingTable& e) {
  if (e.e.rows != m.dst_size())
    throw NumericError("weighted_embeddings: embedding rows != dst vocabulary size");
  Mat<double> pm = map_probs(p_b.probs, m);
  return {matops::matmul(pm, e.e)};
}

}  // namespace mlat
