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

#ifndef MLAT_VOCAB_MAP_HPP_
#define MLAT_VOCAB_MAP_HPP_

#include <functional>
#include <string>
#include <vector>

#include "mlat/vocab.hpp"

namespace mlat {

// How a source row was mapped.
enum class MapRule { kDirectStart, kDirectContinuation, kSpecial, kRetokenized, kUnkFallback };

const char* to_string(MapRule r);
MapRule map_rule_from_string(const std::string& s);

// One nonzero of the sparse map. Weights are exact rationals num/den so that
// serialization round-trips bit-for-bit and row sums are exactly 1.
struct MapEntry {
  int row = 0;
  int col = 0;
  int num = 1;
  int den = 1;

  double weight() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const MapEntry&) const = default;
};

// Sparse row-stochastic matrix translating token distributions from a source
// vocabulary (the generator's) to a destination vocabulary (a component
// model's). Rows are source token ids, columns destination token ids.
class VocabMapMatrix {
 public:
  VocabMapMatrix() = default;
  VocabMapMatrix(int src_size, int dst_size, std::vector<MapEntry> entries,
                 std::vector<MapRule> row_rules);

  int src_size() const { return src_size_; }
  int dst_size() const { return dst_size_; }
  const std::vector<MapEntry>& entries() const { return entries_; }
  MapRule row_rule(int row) const { return row_rules_.at(row); }
  const std::vector<MapRule>& row_rules() const { return row_rules_; }

  // Entries of one row (contiguous; entries are sorted by (row, col)).
  std::pair<const MapEntry*, const MapEntry*> row_span(int row) const;

  double row_sum(int row) const;

  // Checks the construction invariants: row sums 1 within 1e-9, weights in
  // (0, 1], one entry for single-match rules, and totality. Throws
  // DataError on violation.
  void validate() const;

  bool operator==(const VocabMapMatrix& o) const;

 private:
  int src_size_ = 0;
  int dst_size_ = 0;
  std::vector<MapEntry> entries_;     // sorted by (row, col)
  std::vector<MapRule> row_rules_;    // one per source row
  std::vector<int> row_offsets_;      // src_size + 1 prefix offsets into entries_
  void build_offsets();
};

using DstTokenizerFn = std::function<std::vector<std::string>(const std::string&)>;

// Builds the mapping from a start-of-word-marked source vocabulary to a
// continuation-marked destination vocabulary. Rule precedence:
//   1. direct match: source start-of-word token <-> destination
//      non-continuation token (marker-stripped, case-sensitive equality);
//   2. direct match: source continuation token <-> destination continuation
//      token (both marker-stripped);
//   3. special tokens map role-to-role; source extra-id tokens map to the
//      destination UNK;
//   4. everything else is retokenized with `dst_tokenizer`, destination
//      special tokens are stripped from the output, and each of the k pieces
//      receives weight 1/k (duplicates accumulate). An empty retokenization
//      falls back to the destination UNK.
// Throws ConfigError when dst has no UNK token.
VocabMapMatrix build_vocab_map(const Vocabulary& src, const Vocabulary& dst,
                               const DstTokenizerFn& dst_tokenizer);

// row (a distribution over the source vocabulary, sum 1 within 1e-6) times
// the matrix; the result is a distribution over the destination vocabulary.
std::vector<double> map_distribution(const std::vector<double>& row, const VocabMapMatrix& m);

// Line-oriented text format:
//   header:  src_size dst_size nnz
//   entries: row col weight rule        (weight is "num/den", or "1")
void save_map(const VocabMapMatrix& m, const std::string& path);
VocabMapMatrix load_map(const std::string& path);

}  // namespace mlat

#endif  // MLAT_VOCAB_MAP_HPP_
