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

#include "mlat/vocab.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mlat {

using nlohmann::json;

const char* to_string(TokenClass c) {
  switch (c) {
    case TokenClass::kStartOfWord: return "start-of-word";
    case TokenClass::kContinuation: return "continuation";
    case TokenClass::kSpecial: return "special";
    case TokenClass::kExtraId: return "extra-id";
    case TokenClass::kOther: return "other";
  }
  return "?";
}

const char* to_string(VocabScheme s) {
  return s == VocabScheme::kStartOfWordMarked ? "start-of-word-marked" : "continuation-marked";
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, VocabScheme scheme,
                       std::map<std::string, std::string> special,
                       std::set<std::string> extra_ids)
    : tokens_(std::move(tokens)), scheme_(scheme), special_(std::move(special)),
      extra_ids_(std::move(extra_ids)) {
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) {
    if (!index_.emplace(tokens_[i], i).second)
      throw DataError("duplicate token in vocabulary: " + tokens_[i]);
  }
  for (const auto& [role, tok] : special_) {
    if (!contains(tok))
      throw DataError("special token for role '" + role + "' not in vocabulary: " + tok);
    special_set_.insert(tok);
  }
  for (const auto& tok : extra_ids_) {
    if (!contains(tok)) throw DataError("extra-id token not in vocabulary: " + tok);
  }
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw DataError("token id out of range");
  return tokens_[id];
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw DataError("token not in vocabulary: " + token);
  return it->second;
}

int Vocabulary::id_or(const std::string& token, int fallback) const {
  auto it = index_.find(token);
  return it == index_.end() ? fallback : it->second;
}

const std::string& Vocabulary::special_token(const std::string& role) const {
  static const std::string kEmpty;
  auto it = special_.find(role);
  return it == special_.end() ? kEmpty : it->second;
}

int Vocabulary::unk_id() const {
  auto it = special_.find("unk");
  if (it == special_.end()) throw ConfigError("vocabulary has no UNK token");
  return id(it->second);
}

std::string strip_marker(const std::string& token, VocabScheme scheme) {
  if (scheme == VocabScheme::kStartOfWordMarked) {
    if (token.rfind(kSpMarker, 0) == 0) return token.substr(sizeof(kSpMarker) - 1);
  } else {
    if (token.rfind(kWpMarker, 0) == 0) return token.substr(sizeof(kWpMarker) - 1);
  }
  return token;
}

TokenClass classify_token(const std::string& token, const Vocabulary& vocab) {
  if (!vocab.contains(token)) throw DataError("token not in vocabulary: " + token);
  if (vocab.is_special(token)) return TokenClass::kSpecial;
  if (vocab.is_extra_id(token)) return TokenClass::kExtraId;
  if (vocab.scheme() == VocabScheme::kStartOfWordMarked) {
    if (token.rfind(kSpMarker, 0) == 0) {
      // A bare marker has no surface text.
      return token.size() == sizeof(kSpMarker) - 1 ? TokenClass::kOther : TokenClass::kStartOfWord;
    }
    return TokenClass::kContinuation;
  }
  if (token.rfind(kWpMarker, 0) == 0) {
    return token.size() == sizeof(kWpMarker) - 1 ? TokenClass::kOther : TokenClass::kContinuation;
  }
  return TokenClass::kStartOfWord;
}

size_t utf8_len(const std::string& s, size_t pos) {
  unsigned char c = static_cast<unsigned char>(s[pos]);
  size_t n = 1;
  if ((c & 0xE0) == 0xC0) n = 2;
  else if ((c & 0xF0) == 0xE0) n = 3;
  else if ((c & 0xF8) == 0xF0) n = 4;
  if (pos + n > s.size()) n = 1;
  return n;
}

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

}  // namespace

WordPieceTokenizer::WordPieceTokenizer(const Vocabulary* vocab) : vocab_(vocab) {
  if (vocab->scheme() != VocabScheme::kContinuationMarked)
    throw ConfigError("WordPieceTokenizer requires a continuation-marked vocabulary");
}

std::vector<std::string> WordPieceTokenizer::tokenize_word(const std::string& word) const {
  std::vector<std::string> pieces;
  if (word.empty()) return pieces;
  const std::string& unk = vocab_->special_token("unk");
  size_t pos = 0;
  bool first = true;
  while (pos < word.size()) {
    size_t best_len = 0;
    std::string best;
    // Longest-match scan; continuation pieces carry the ## prefix.
    for (size_t len = word.size() - pos; len >= 1; --len) {
      std::string cand = word.substr(pos, len);
      if (!first) cand = std::string(kWpMarker) + cand;
      if (vocab_->contains(cand) && !vocab_->is_special(cand)) {
        best_len = len;
        best = std::move(cand);
        break;
      }
    }
    if (best_len == 0) {
      // No piece covers this position: the whole word becomes UNK, matching
      // the usual WordPiece behavior for unsegmentable words.
      if (unk.empty()) throw DataError("unsegmentable word and no UNK token: " + word);
      return {unk};
    }
    pieces.push_back(std::move(best));
    pos += best_len;
    first = false;
  }
  return pieces;
}

std::vector<std::string> WordPieceTokenizer::tokenize(const std::string& text) const {
  std::vector<std::string> out;
  for (const auto& w : split_words(text)) {
    auto pieces = tokenize_word(w);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

std::vector<int> WordPieceTokenizer::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const auto& p : tokenize(text)) ids.push_back(vocab_->id(p));
  return ids;
}

SentencePieceTokenizer::SentencePieceTokenizer(const Vocabulary* vocab) : vocab_(vocab) {
  if (vocab->scheme() != VocabScheme::kStartOfWordMarked)
    throw ConfigError("SentencePieceTokenizer requires a start-of-word-marked vocabulary");
}

std::vector<std::string> SentencePieceTokenizer::tokenize(const std::string& text) const {
  std::vector<std::string> out;
  const std::string& unk = vocab_->special_token("unk");
  for (const auto& w : split_words(text)) {
    size_t pos = 0;
    bool first = true;
    while (pos < w.size()) {
      size_t best_len = 0;
      std::string best;
      for (size_t len = w.size() - pos; len >= 1; --len) {
        std::string cand = w.substr(pos, len);
        if (first) cand = std::string(kSpMarker) + cand;
        if (vocab_->contains(cand) && !vocab_->is_special(cand)) {
          best_len = len;
          best = std::move(cand);
          break;
        }
      }
      if (best_len == 0) {
        // Skip one full codepoint, emitting UNK.
        if (unk.empty()) throw DataError("untokenizable text and no UNK token: " + w);
        out.push_back(unk);
        pos += utf8_len(w, pos);
        first = false;
        continue;
      }
      out.push_back(std::move(best));
      pos += best_len;
      first = false;
    }
  }
  return out;
}

std::vector<int> SentencePieceTokenizer::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const auto& p : tokenize(text)) ids.push_back(vocab_->id(p));
  return ids;
}

std::string SentencePieceTokenizer::detokenize(const std::vector<std::string>& pieces) const {
  std::string out;
  for (const auto& p : pieces) {
    if (vocab_->is_special(p) || vocab_->is_extra_id(p)) continue;
    if (p.rfind(kSpMarker, 0) == 0) {
      if (!out.empty()) out.push_back(' ');
      out += p.substr(sizeof(kSpMarker) - 1);
    } else {
      out += p;
    }
  }
  return out;
}

std::string SentencePieceTokenizer::decode(const std::vector<int>& ids) const {
  std::vector<std::string> pieces;
  pieces.reserve(ids.size());
  for (int id : ids) pieces.push_back(vocab_->token(id));
  return detokenize(pieces);
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty vocabulary file: " + path);
  json h;
  try {
    h = json::parse(header);
  } catch (const json::exception& e) {
    throw DataError("bad vocabulary header in " + path + ": " + e.what());
  }
  std::string scheme_str = h.at("scheme").get<std::string>();
  VocabScheme scheme;
  if (scheme_str == "start-of-word-marked") scheme = VocabScheme::kStartOfWordMarked;
  else if (scheme_str == "continuation-marked") scheme = VocabScheme::kContinuationMarked;
  else throw DataError("unknown vocabulary scheme: " + scheme_str);

  std::map<std::string, std::string> special;
  if (h.contains("special_tokens"))
    special = h.at("special_tokens").get<std::map<std::string, std::string>>();
  std::set<std::string> extra;
  if (h.contains("extra_id_tokens"))
    for (const auto& t : h.at("extra_id_tokens")) extra.insert(t.get<std::string>());

  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return Vocabulary(std::move(tokens), scheme, std::move(special), std::move(extra));
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  json h;
  h["scheme"] = to_string(vocab.scheme());
  h["special_tokens"] = vocab.special_roles();
  h["extra_id_tokens"] = std::vector<std::string>(vocab.extra_id_tokens().begin(),
                                                  vocab.extra_id_tokens().end());
  out << h.dump() << "\n";
  for (const auto& t : vocab.tokens()) out << t << "\n";
}

}  // namespace mlat
