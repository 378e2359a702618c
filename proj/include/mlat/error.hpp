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

#ifndef MLAT_ERROR_HPP_
#define MLAT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mlat {

// Error taxonomy maps one-to-one onto the CLI exit codes:
// ConfigError -> 2, DataError -> 3, NumericError -> 4.
class MlatError : public std::runtime_error {
 public:
  explicit MlatError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public MlatError {
 public:
  explicit ConfigError(const std::string& msg) : MlatError(msg) {}
};

class DataError : public MlatError {
 public:
  explicit DataError(const std::string& msg) : MlatError(msg) {}
};

// Runtime/numerical failures: shape mismatches, non-finite losses,
// degenerate inputs to numeric kernels.
class NumericError : public MlatError {
 public:
  explicit NumericError(const std::string& msg) : MlatError(msg) {}
};

}  // namespace mlat

#endif  // MLAT_ERROR_HPP_
