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

#include "mlat/decode.hpp"

namespace mlat {

void DecodeConfig::validate() const {
  if (num_candidates < 1) throw ConfigError("num_candidates must be >= 1");
  if (num_beams < 1) throw ConfigError("num_beams must be >= 1");
  if (num_candidates > num_beams)
    throw ConfigError("num_candidates exceeds num_beams (" +
                      std::to_string(num_candidates) + " > " + std::to_string(num_beams) + ")");
  if (num_beam_groups < 1 || num_beams % num_beam_groups != 0)
    throw ConfigError("num_beams must be divisible by num_beam_groups");
  if (diversity_penalty < 0) throw ConfigError("diversity_penalty must be nonnegative");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must lie in (0, 1]");
  if (!(temperature > 0.0)) throw ConfigError("decode temperature must be positive");
  if (batch_length < 1) throw ConfigError("batch_length must be >= 1");
}

int DecodeConfig::min_length() const {
  int l = batch_length;
  return std::max(0, l - 2 - l / 4);
}

int DecodeConfig::max_length() const { return batch_length + 2; }

}  // namespace mlat
