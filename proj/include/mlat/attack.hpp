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

#ifndef MLAT_ATTACK_HPP_
#define MLAT_ATTACK_HPP_

#include <optional>
#include <string>
#include <vector>

#include "mlat/data.hpp"
#include "mlat/decode.hpp"
#include "mlat/scoring.hpp"
#include "mlat/validation.hpp"

namespace mlat {

struct CandidateRecord {
  std::string text;
  ScoreBreakdown scores;
  bool flipped = false;
  double q = 0;  // text quality score under the validation gammas
};

struct AttackResult {
  std::string original;
  int label = 0;
  std::string language;
  std::vector<CandidateRecord> candidates;
  std::optional<int> selected;  // index into candidates; present iff success
  bool success = false;
  long long victim_queries = 0;
};

// Decodes n adversarial candidate texts with diverse beam search.
std::vector<std::string> generate_candidates(const nn::Seq2SeqF& g, const Vocabulary& gen_vocab,
                                             const std::string& x, const DecodeConfig& cfg);

// Among label-flipping candidates picks the highest Q; ties break toward
// lower D_KL, then the lexicographically smallest text. No flip, no pick.
std::optional<int> select_candidate(const std::vector<CandidateRecord>& candidates);

// One example end-to-end: decode, score every candidate against the victim
// (n queries), select. The selected candidate's flip is re-verified against
// the victim before it is reported.
AttackResult attack_example(const nn::Seq2SeqF& g, const Vocabulary& gen_vocab,
                            const LabeledExample& example, DecodeConfig cfg,
                            const ScoringStack& stack, const ValidationWeights& vweights);

// Batches of `batch_size` share the padded generated-length variable l.
std::vector<AttackResult> attack_dataset(const nn::Seq2SeqF& g, const Vocabulary& gen_vocab,
                                         const std::vector<LabeledExample>& dataset,
                                         DecodeConfig cfg, int batch_size,
                                         const ScoringStack& stack,
                                         const ValidationWeights& vweights);

// Line-delimited report: one header record, then one record per example.
struct ReportHeader {
  std::string tool;    // "attack" | "baseline"
  std::string method;  // "generative" | "mbae" | "mclare"
  long long budget = 0;
  std::string config_hash;
};

void write_attack_report(const std::string& path, const ReportHeader& header,
                         const std::vector<AttackResult>& results);
std::vector<AttackResult> read_attack_report(const std::string& path, ReportHeader* header);

}  // namespace mlat

#endif  // MLAT_ATTACK_HPP_
