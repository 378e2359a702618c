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

#ifndef MLAT_DATA_HPP_
#define MLAT_DATA_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlat/models.hpp"
#include "mlat/rng.hpp"
#include "mlat/vocab.hpp"

namespace mlat {

struct LabeledExample {
  std::string text;
  int label = 0;
  std::string language;
  int token_length = 0;   // under the generator tokenizer
  std::string split;      // native split tag where the dataset provides one
};

// Ordered: (p1, p2) and (p2, p1) are two distinct pairs.
struct ParaphrasePair {
  std::string source;
  std::string target;
  std::string language;
};

// Star ratings: 1-2 negative (0), 4-5 positive (1), 3 discarded.
std::optional<int> map_star_labels(int star);

inline constexpr int kLabelNegative = 0;
inline constexpr int kLabelPositive = 1;

// Fills token_length from the generator tokenizer.
void annotate_token_lengths(std::vector<LabeledExample>& examples,
                            const SentencePieceTokenizer& tokenizer);

// Keeps examples within the length bound; when `victim` is given (the
// training split), misclassified examples are dropped too.
std::vector<LabeledExample> filter_examples(const std::vector<LabeledExample>& examples,
                                            const VictimModel* victim, int max_tokens);

// Per-language corpus leveling: languages above the target are uniformly
// subsampled without replacement, languages below it are oversampled with
// replacement. The result is shuffled.
std::vector<ParaphrasePair> balance_paraphrase_corpus(
    const std::map<std::string, std::vector<ParaphrasePair>>& pairs_by_language,
    int target_per_language, Rng& rng);

struct Splits {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> validation;
  std::vector<LabeledExample> test;
};

struct SplitSizes {
  int train = 5000;
  int validation = 1000;
  int test = 1000;
};

// dataset_id "marc": seeded language-balanced sampling to the requested
// sizes (each size must divide evenly by the language count).
// dataset_id "tsm": groups by the examples' native split tags.
// Splits are checked for disjointness by (text, language).
Splits make_splits(const std::string& dataset_id, const std::vector<LabeledExample>& examples,
                   const SplitSizes& sizes, Rng& rng);

// Line-delimited JSON records.
std::vector<LabeledExample> read_examples_jsonl(const std::string& path);
void write_examples_jsonl(const std::vector<LabeledExample>& examples, const std::string& path);
std::vector<ParaphrasePair> read_pairs_jsonl(const std::string& path);
void write_pairs_jsonl(const std::vector<ParaphrasePair>& pairs, const std::string& path);

// Provenance manifest: config hash, input/output file hashes, counts.
void write_manifest(const std::string& path, const std::string& config_hash,
                    const std::map<std::string, std::string>& input_files,
                    const std::map<std::string, std::string>& output_files,
                    const std::map<std::string, long long>& counts);

}  // namespace mlat

#endif  // MLAT_DATA_HPP_
