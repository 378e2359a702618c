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

#include "mlat/models.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace mlat {

double LanguageDetector::confidence(const std::string& text, const std::string& language) const {
  const auto& langs = languages();
  for (size_t i = 0; i < langs.size(); ++i) {
    if (langs[i] == language) return language_probs(text)[i];
  }
  throw ConfigError("language detector does not cover language: " + language);
}

ClassifierVictim::ClassifierVictim(nn::MlpClassifierF net, Vocabulary vocab,
                                   std::vector<std::string> labels)
    : net_(std::move(net)), vocab_(std::move(vocab)), tokenizer_(&vocab_),
      labels_(std::move(labels)) {
  if (static_cast<int>(labels_.size()) != net_.arch().classes)
    throw ConfigError("victim label names do not match class count");
}

std::vector<double> ClassifierVictim::class_probs(const std::string& text) const {
  auto tokens = tokenizer_.encode(text);
  if (tokens.empty()) throw NumericError("victim: text tokenizes to nothing");
  return net_.probs_tokens(tokens);
}

ClassifierDetector::ClassifierDetector(nn::MlpClassifierF net, Vocabulary vocab,
                                       std::vector<std::string> langs)
    : net_(std::move(net)), vocab_(std::move(vocab)), tokenizer_(&vocab_),
      languages_(std::move(langs)) {
  if (static_cast<int>(languages_.size()) != net_.arch().classes)
    throw ConfigError("detector language names do not match class count");
}

std::vector<double> ClassifierDetector::language_probs(const std::string& text) const {
  auto tokens = tokenizer_.encode(text);
  if (tokens.empty()) throw NumericError("detector: text tokenizes to nothing");
  return net_.probs_tokens(tokens);
}

MeanSentenceEncoder::MeanSentenceEncoder(nn::MeanEmbedderF net, Vocabulary vocab)
    : net_(std::move(net)), vocab_(std::move(vocab)), tokenizer_(&vocab_) {}

std::vector<double> MeanSentenceEncoder::embed(const std::string& text) const {
  auto tokens = tokenizer_.encode(text);
  if (tokens.empty()) throw NumericError("encoder: text tokenizes to nothing");
  return net_.embed_tokens(tokens);
}

TableTokenEmbedder::TableTokenEmbedder(Mat<double> table, Vocabulary vocab)
    : table_(std::move(table)), vocab_(std::move(vocab)), tokenizer_(&vocab_) {
  if (table_.rows != vocab_.size())
    throw ConfigError("token embedder table rows do not match vocabulary size");
}

std::vector<std::vector<double>> TableTokenEmbedder::token_embeddings(
    const std::string& text) const {
  std::vector<std::vector<double>> out;
  for (int id : tokenizer_.encode(text)) {
    std::vector<double> row(table_.cols);
    for (int c = 0; c < table_.cols; ++c) row[c] = table_(id, c);
    out.push_back(std::move(row));
  }
  return out;
}

Seq2SeqFluency::Seq2SeqFluency(std::shared_ptr<const nn::Seq2SeqF> net, Vocabulary vocab)
    : net_(std::move(net)), vocab_(std::move(vocab)), tokenizer_(&vocab_) {}

std::vector<double> Seq2SeqFluency::token_logprobs(const std::string& text) const {
  auto tokens = tokenizer_.encode(text);
  if (tokens.empty()) throw NumericError("fluency scorer: empty text");
  return net_->token_logprobs(tokens, tokens);
}

PairKlScorer::PairKlScorer(const nn::Seq2SeqF* g, const nn::Seq2SeqF* g_star,
                           const Vocabulary* vocab)
    : g_(g), g_star_(g_star), vocab_(vocab), tokenizer_(vocab) {}

double PairKlScorer::kl(const std::string& x, const std::string& x_prime) const {
  auto src = tokenizer_.encode(x);
  auto out = tokenizer_.encode(x_prime);
  out.push_back(g_->eos());  // score the stop decision too
  auto lp_g = g_->token_logprobs(src, out);
  auto lp_ref = g_star_->token_logprobs(src, out);
  double sum = 0;
  for (size_t i = 0; i < lp_g.size(); ++i) sum += lp_g[i] - lp_ref[i];
  return sum / static_cast<double>(lp_g.size());
}

UnigramMaskedLm::UnigramMaskedLm(const std::vector<std::string>& corpus_texts) {
  std::map<std::string, long long> counts;
  long long total = 0;
  for (const auto& text : corpus_texts) {
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) {
      counts[tok]++;
      total++;
    }
  }
  for (const auto& [tok, n] : counts)
    ranked_.emplace_back(tok, static_cast<double>(n) / static_cast<double>(std::max(total, 1LL)));
  std::stable_sort(ranked_.begin(), ranked_.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
}

UnigramMaskedLm::UnigramMaskedLm(std::vector<std::pair<std::string, double>> ranked)
    : ranked_(std::move(ranked)) {}

std::vector<std::pair<std::string, double>> UnigramMaskedLm::top_fills(
    const std::vector<std::string>& context, size_t mask_pos, int k) const {
  (void)context;
  (void)mask_pos;
  std::vector<std::pair<std::string, double>> out;
  for (int i = 0; i < k && i < static_cast<int>(ranked_.size()); ++i) out.push_back(ranked_[i]);
  return out;
}

}  // namespace mlat
