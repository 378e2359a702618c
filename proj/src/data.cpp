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

#include "mlat/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mlat/hash.hpp"

namespace mlat {

using nlohmann::json;

std::optional<int> map_star_labels(int star) {
  if (star < 1 || star > 5) throw DataError("star rating out of range: " + std::to_string(star));
  if (star <= 2) return kLabelNegative;
  if (star >= 4) return kLabelPositive;
  return std::nullopt;  // 3-star reviews are discarded
}

void annotate_token_lengths(std::vector<LabeledExample>& examples,
                            const SentencePieceTokenizer& tokenizer) {
  for (auto& e : examples) e.token_length = static_cast<int>(tokenizer.encode(e.text).size());
}

std::vector<LabeledExample> filter_examples(const std::vector<LabeledExample>& examples,
                                            const VictimModel* victim, int max_tokens) {
  std::vector<LabeledExample> kept;
  for (const auto& e : examples) {
    if (e.token_length > max_tokens) continue;
    if (victim && victim->predict(e.text) != e.label) continue;
    kept.push_back(e);
  }
  return kept;
}

std::vector<ParaphrasePair> balance_paraphrase_corpus(
    const std::map<std::string, std::vector<ParaphrasePair>>& pairs_by_language,
    int target_per_language, Rng& rng) {
  std::vector<ParaphrasePair> out;
  for (const auto& [lang, pool] : pairs_by_language) {
    if (pool.empty()) throw DataError("no paraphrase pairs for language: " + lang);
    if (target_per_language <= 0) continue;
    if (static_cast<int>(pool.size()) >= target_per_language) {
      // Uniform subsample without replacement.
      std::vector<size_t> idx(pool.size());
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      rng.shuffle(idx);
      for (int i = 0; i < target_per_language; ++i) out.push_back(pool[idx[i]]);
    } else {
      for (int i = 0; i < target_per_language; ++i)
        out.push_back(pool[rng.uniform_int(pool.size())]);
    }
  }
  rng.shuffle(out);
  return out;
}

namespace {

void check_disjoint(const Splits& s) {
  auto key = [](const LabeledExample& e) { return e.language + "\x1f" + e.text; };
  std::set<std::string> seen;
  auto add_all = [&](const std::vector<LabeledExample>& v, const char* name) {
    for (const auto& e : v) {
      if (!seen.insert(key(e)).second)
        throw DataError(std::string("split overlap detected at ") + name + ": " + e.text);
    }
  };
  add_all(s.train, "train");
  add_all(s.validation, "validation");
  add_all(s.test, "test");
}

}  // namespace

Splits make_splits(const std::string& dataset_id, const std::vector<LabeledExample>& examples,
                   const SplitSizes& sizes, Rng& rng) {
  Splits out;
  if (dataset_id == "tsm") {
    for (const auto& e : examples) {
      if (e.split == "train") out.train.push_back(e);
      else if (e.split == "validation") out.validation.push_back(e);
      else if (e.split == "test") out.test.push_back(e);
      else throw DataError("tsm example lacks a native split tag: '" + e.split + "'");
    }
    check_disjoint(out);
    return out;
  }
  if (dataset_id != "marc") throw ConfigError("unknown dataset id: " + dataset_id);

  std::map<std::string, std::vector<LabeledExample>> by_lang;
  for (const auto& e : examples) by_lang[e.language].push_back(e);
  int langs = static_cast<int>(by_lang.size());
  if (langs == 0) throw DataError("no examples to split");
  if (sizes.train % langs || sizes.validation % langs || sizes.test % langs)
    throw DataError("marc split sizes must divide evenly across " + std::to_string(langs) +
                    " languages");
  int per_train = sizes.train / langs;
  int per_val = sizes.validation / langs;
  int per_test = sizes.test / langs;

  std::string deficits;
  for (auto& [lang, pool] : by_lang) {
    int need = per_train + per_val + per_test;
    if (static_cast<int>(pool.size()) < need) {
      deficits += " " + lang + ":" + std::to_string(pool.size()) + "/" + std::to_string(need);
    }
  }
  if (!deficits.empty()) throw DataError("insufficient examples for balanced splits:" + deficits);

  for (auto& [lang, pool] : by_lang) {
    rng.shuffle(pool);
    int i = 0;
    for (int k = 0; k < per_train; ++k) out.train.push_back(pool[i++]);
    for (int k = 0; k < per_val; ++k) out.validation.push_back(pool[i++]);
    for (int k = 0; k < per_test; ++k) out.test.push_back(pool[i++]);
  }
  check_disjoint(out);
  return out;
}

namespace {

json example_to_json(const LabeledExample& e) {
  json j;
  j["text"] = e.text;
  j["label"] = e.label;
  j["language"] = e.language;
  if (e.token_length > 0) j["token_length"] = e.token_length;
  if (!e.split.empty()) j["split"] = e.split;
  return j;
}

LabeledExample example_from_json(const json& j) {
  LabeledExample e;
  e.text = j.at("text").get<std::string>();
  e.label = j.at("label").get<int>();
  e.language = j.at("language").get<std::string>();
  if (j.contains("token_length")) e.token_length = j.at("token_length").get<int>();
  if (j.contains("split")) e.split = j.at("split").get<std::string>();
  return e;
}

}  // namespace

std::vector<LabeledExample> read_examples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::vector<LabeledExample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(example_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_examples_jsonl(const std::vector<LabeledExample>& examples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path);
  for (const auto& e : examples) out << example_to_json(e).dump() << "\n";
}

std::vector<ParaphrasePair> read_pairs_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pairs file: " + path);
  std::vector<ParaphrasePair> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      out.push_back(ParaphrasePair{j.at("source").get<std::string>(),
                                   j.at("target").get<std::string>(),
                                   j.at("language").get<std::string>()});
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_pairs_jsonl(const std::vector<ParaphrasePair>& pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write pairs file: " + path);
  for (const auto& p : pairs) {
    json j;
    j["source"] = p.source;
    j["target"] = p.target;
    j["language"] = p.language;
    out << j.dump() << "\n";
  }
}

void write_manifest(const std::string& path, const std::string& config_hash,
                    const std::map<std::string, std::string>& input_files,
                    const std::map<std::string, std::string>& output_files,
                    const std::map<std::string, long long>& counts) {
  json j;
  j["config_hash"] = config_hash;
  json in = json::object();
  for (const auto& [f, h] : input_files) in[f] = h;
  json outj = json::object();
  for (const auto& [f, h] : output_files) outj[f] = h;
  j["inputs"] = in;
  j["outputs"] = outj;
  json cj = json::object();
  for (const auto& [k, v] : counts) cj[k] = v;
  j["counts"] = cj;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace mlat
