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

#include "mlat/vocab_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mlat {

const char* to_string(MapRule r) {
  switch (r) {
    case MapRule::kDirectStart: return "direct-start";
    case MapRule::kDirectContinuation: return "direct-continuation";
    case MapRule::kSpecial: return "special";
    case MapRule::kRetokenized: return "retokenized";
    case MapRule::kUnkFallback: return "unk-fallback";
  }
  return "?";
}

MapRule map_rule_from_string(const std::string& s) {
  if (s == "direct-start") return MapRule::kDirectStart;
  if (s == "direct-continuation") return MapRule::kDirectContinuation;
  if (s == "special") return MapRule::kSpecial;
  if (s == "retokenized") return MapRule::kRetokenized;
  if (s == "unk-fallback") return MapRule::kUnkFallback;
  throw DataError("unknown map rule tag: " + s);
}

VocabMapMatrix::VocabMapMatrix(int src_size, int dst_size, std::vector<MapEntry> entries,
                               std::vector<MapRule> row_rules)
    : src_size_(src_size), dst_size_(dst_size), entries_(std::move(entries)),
      row_rules_(std::move(row_rules)) {
  if (static_cast<int>(row_rules_.size()) != src_size_)
    throw DataError("map matrix needs one rule tag per source row");
  std::sort(entries_.begin(), entries_.end(),
            [](const MapEntry& a, const MapEntry& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  build_offsets();
}

void VocabMapMatrix::build_offsets() {
  row_offsets_.assign(src_size_ + 1, 0);
  for (const auto& e : entries_) {
    if (e.row < 0 || e.row >= src_size_ || e.col < 0 || e.col >= dst_size_)
      throw DataError("map entry index out of range");
    row_offsets_[e.row + 1]++;
  }
  for (int r = 0; r < src_size_; ++r) row_offsets_[r + 1] += row_offsets_[r];
}

std::pair<const MapEntry*, const MapEntry*> VocabMapMatrix::row_span(int row) const {
  if (row < 0 || row >= src_size_) throw DataError("map row out of range");
  return {entries_.data() + row_offsets_[row], entries_.data() + row_offsets_[row + 1]};
}

double VocabMapMatrix::row_sum(int row) const {
  auto [b, e] = row_span(row);
  double s = 0;
  for (const MapEntry* p = b; p != e; ++p) s += p->weight();
  return s;
}

void VocabMapMatrix::validate() const {
  for (int r = 0; r < src_size_; ++r) {
    auto [b, e] = row_span(r);
    if (b == e) throw DataError("map row " + std::to_string(r) + " has no entries");
    double sum = 0;
    for (const MapEntry* p = b; p != e; ++p) {
      double w = p->weight();
      if (!(w > 0.0 && w <= 1.0))
        throw DataError("map weight out of (0,1] at row " + std::to_string(r));
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw DataError("map row " + std::to_string(r) + " sums to " + std::to_string(sum));
    MapRule rule = row_rules_[r];
    if ((rule == MapRule::kDirectStart || rule == MapRule::kDirectContinuation ||
         rule == MapRule::kSpecial || rule == MapRule::kUnkFallback) &&
        e - b != 1)
      throw DataError("single-match rule with multiple entries at row " + std::to_string(r));
  }
}

bool VocabMapMatrix::operator==(const VocabMapMatrix& o) const {
  return src_size_ == o.src_size_ && dst_size_ == o.dst_size_ && entries_ == o.entries_ &&
         row_rules_ == o.row_rules_;
}

namespace {

struct RowBuild {
  MapRule rule;
  std::vector<MapEntry> entries;
};

RowBuild map_one_token(int row, const std::string& token, const Vocabulary& src,
                       const Vocabulary& dst, const DstTokenizerFn& dst_tokenizer, int dst_unk) {
  TokenClass cls = classify_token(token, src);

  // Rule 3: specials map role-to-role; extra-ids go to UNK.
  if (cls == TokenClass::kSpecial) {
    for (const auto& [role, tok] : src.special_roles()) {
      if (tok == token && dst.has_special(role))
        return {MapRule::kSpecial, {{row, dst.id(dst.special_token(role)), 1, 1}}};
    }
    // A source special with no destination counterpart: UNK, still rule 3.
    return {MapRule::kSpecial, {{row, dst_unk, 1, 1}}};
  }
  if (cls == TokenClass::kExtraId) return {MapRule::kSpecial, {{row, dst_unk, 1, 1}}};

  const std::string surface = strip_marker(token, src.scheme());

  // Rule 1: start-of-word <-> non-continuation direct match.
  if (cls == TokenClass::kStartOfWord && dst.contains(surface) &&
      classify_token(surface, dst) == TokenClass::kStartOfWord)
    return {MapRule::kDirectStart, {{row, dst.id(surface), 1, 1}}};

  // Rule 2: continuation <-> continuation direct match.
  if (cls == TokenClass::kContinuation) {
    std::string wp = std::string(kWpMarker) + surface;
    if (dst.contains(wp) && classify_token(wp, dst) == TokenClass::kContinuation)
      return {MapRule::kDirectContinuation, {{row, dst.id(wp), 1, 1}}};
  }

  // Rule 4: retokenize the surface form as a standalone word, strip any
  // generated special tokens, split mass equally over the k pieces.
  std::vector<int> cols;
  for (const auto& piece : dst_tokenizer(surface)) {
    if (!dst.contains(piece) || dst.is_special(piece)) continue;
    cols.push_back(dst.id(piece));
  }
  if (cols.empty()) return {MapRule::kUnkFallback, {{row, dst_unk, 1, 1}}};

  int k = static_cast<int>(cols.size());
  std::map<int, int> counts;  // duplicate pieces accumulate
  for (int c : cols) counts[c]++;
  RowBuild rb{MapRule::kRetokenized, {}};
  for (const auto& [c, n] : counts) rb.entries.push_back({row, c, n, k});
  return rb;
}

}  // namespace

VocabMapMatrix build_vocab_map(const Vocabulary& src, const Vocabulary& dst,
                               const DstTokenizerFn& dst_tokenizer) {
  if (src.scheme() != VocabScheme::kStartOfWordMarked)
    throw ConfigError("build_vocab_map: source must be start-of-word-marked");
  if (dst.scheme() != VocabScheme::kContinuationMarked)
    throw ConfigError("build_vocab_map: destination must be continuation-marked");
  int dst_unk = dst.unk_id();  // throws ConfigError when missing

  std::vector<MapEntry> entries;
  std::vector<MapRule> rules(src.size(), MapRule::kUnkFallback);
  for (int r = 0; r < src.size(); ++r) {
    RowBuild rb = map_one_token(r, src.token(r), src, dst, dst_tokenizer, dst_unk);
    rules[r] = rb.rule;
    entries.insert(entries.end(), rb.entries.begin(), rb.entries.end());
  }
  VocabMapMatrix m(src.size(), dst.size(), std::move(entries), std::move(rules));
  m.validate();
  return m;
}

std::vector<double> map_distribution(const std::vector<double>& row, const VocabMapMatrix& m) {
  if (static_cast<int>(row.size()) != m.src_size())
    throw NumericError("map_distribution: row length != src_size");
  double total = 0;
  for (double v : row) total += v;
  if (std::abs(total - 1.0) > 1e-6)
    throw NumericError("map_distribution: input row sums to " + std::to_string(total));
  std::vector<double> out(m.dst_size(), 0.0);
  for (const auto& e : m.entries()) {
    double p = row[e.row];
    if (p != 0.0) out[e.col] += p * e.weight();
  }
  return out;
}

namespace {

std::string weight_text(const MapEntry& e) {
  if (e.num == e.den) return "1";
  return std::to_string(e.num) + "/" + std::to_string(e.den);
}

}  // namespace

void save_map(const VocabMapMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write map file: " + path);
  out << m.src_size() << " " << m.dst_size() << " " << m.entries().size() << "\n";
  for (const auto& e : m.entries())
    out << e.row << " " << e.col << " " << weight_text(e) << " " << to_string(m.row_rule(e.row))
        << "\n";
}

VocabMapMatrix load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open map file: " + path);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line.empty())
    throw DataError(path + ": empty map file");
  lineno++;
  std::istringstream hs(line);
  int src_size = 0, dst_size = 0;
  size_t nnz = 0;
  if (!(hs >> src_size >> dst_size >> nnz))
    throw DataError(path + ":1: malformed header");

  std::vector<MapEntry> entries;
  std::vector<MapRule> rules(std::max(src_size, 0), MapRule::kUnkFallback);
  std::vector<bool> rule_seen(std::max(src_size, 0), false);
  entries.reserve(nnz);
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty()) continue;
    std::istringstream ls(line);
    MapEntry e;
    std::string wtext, rtext;
    if (!(ls >> e.row >> e.col >> wtext >> rtext))
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed entry");
    size_t slash = wtext.find('/');
    try {
      if (slash == std::string::npos) {
        // Accept plain integers ("1") and decimals for hand-written files.
        if (wtext.find('.') == std::string::npos) {
          e.num = std::stoi(wtext);
          e.den = 1;
        } else {
          double w = std::stod(wtext);
          e.den = 1000000000;
          e.num = static_cast<int>(std::llround(w * e.den));
        }
      } else {
        e.num = std::stoi(wtext.substr(0, slash));
        e.den = std::stoi(wtext.substr(slash + 1));
      }
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad weight '" + wtext + "'");
    }
    if (e.den <= 0)
      throw DataError(path + ":" + std::to_string(lineno) + ": nonpositive denominator");
    if (e.row < 0 || e.row >= src_size || e.col < 0 || e.col >= dst_size)
      throw DataError(path + ":" + std::to_string(lineno) + ": index out of range");
    MapRule rule;
    try {
      rule = map_rule_from_string(rtext);
    } catch (const DataError&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": unknown rule tag '" + rtext + "'");
    }
    if (rule_seen[e.row] && rules[e.row] != rule)
      throw DataError(path + ":" + std::to_string(lineno) + ": conflicting rule tags for row " +
                      std::to_string(e.row));
    rules[e.row] = rule;
    rule_seen[e.row] = true;
    entries.push_back(e);
  }
  if (entries.size() != nnz)
    throw DataError(path + ": header declares " + std::to_string(nnz) + " entries, found " +
                    std::to_string(entries.size()));
  VocabMapMatrix m(src_size, dst_size, std::move(entries), std::move(rules));
  m.validate();  // row-sum and totality integrity
  return m;
}

}  // namespace mlat
