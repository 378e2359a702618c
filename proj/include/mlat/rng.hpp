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

#ifndef MLAT_RNG_HPP_
#define MLAT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace mlat {

// Deterministic RNG. mt19937_64 output is fully specified by the standard;
// the distributions on top of it are not, so they are hand-rolled here to
// keep runs bit-identical across compilers and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), eng_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return eng_(); }

  // Uniform in the open interval (0, 1); never returns 0 or 1, so it is
  // safe under log().
  double uniform_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_int(uint64_t n) {
    // Multiply-shift with rejection of the biased tail.
    uint64_t threshold = (-n) % n;
    for (;;) {
      uint64_t x = eng_();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      if (static_cast<uint64_t>(m) >= threshold) return static_cast<uint64_t>(m >> 64);
    }
  }

  double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform_open();
    double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Standard Gumbel(0, 1) draw: -log(-log(u)).
  double gumbel() { return -std::log(-std::log(uniform_open())); }

  // Derive an independent stream keyed by `stream`, e.g. one per epoch.
  Rng split(uint64_t stream) const {
    return Rng(seed_ ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  // Fisher-Yates shuffle.
  template <typename V>
  void shuffle(V& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace mlat

#endif  // MLAT_RNG_HPP_
