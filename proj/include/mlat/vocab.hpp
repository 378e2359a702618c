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

#ifndef MLAT_VOCAB_HPP_
#define MLAT_VOCAB_HPP_

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlat/error.hpp"

namespace mlat {

// Two subword marker conventions are supported:
//  - start-of-word-marked: word-initial pieces carry a U+2581 prefix
//    (SentencePiece convention), everything else is a word continuation;
//  - continuation-marked: continuation pieces carry a "##" prefix
//    (WordPiece convention), everything else starts a word.
enum class VocabScheme { kStartOfWordMarked, kContinuationMarked };

enum class TokenClass { kStartOfWord, kContinuation, kSpecial, kExtraId, kOther };

const char* to_string(TokenClass c);
const char* to_string(VocabScheme s);

// Marker constants.
inline constexpr const char kSpMarker[] = "\xE2\x96\x81";  // U+2581 LOWER ONE EIGHTH BLOCK
inline constexpr const char kWpMarker[] = "##";

class Vocabulary {
 public:
  Vocabulary() = default;

  // `special` maps a role name (pad/eos/unk/bos/cls/sep/mask) to the token
  // string. Tokens must be unique; every special and extra-id token must be
  // present in `tokens`.
  Vocabulary(std::vector<std::string> tokens, VocabScheme scheme,
             std::map<std::string, std::string> special,
             std::set<std::string> extra_ids = {});

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  VocabScheme scheme() const { return scheme_; }

  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  int id(const std::string& token) const;  // throws DataError if absent
  int id_or(const std::string& token, int fallback) const;

  bool is_special(const std::string& token) const { return special_set_.count(token) > 0; }
  bool is_extra_id(const std::string& token) const { return extra_ids_.count(token) > 0; }

  // Role lookup: returns the token for a role ("pad", "unk", ...) or empty
  // string when the role is not defined.
  const std::string& special_token(const std::string& role) const;
  bool has_special(const std::string& role) const { return special_.count(role) > 0; }
  const std::map<std::string, std::string>& special_roles() const { return special_; }
  const std::set<std::string>& extra_id_tokens() const { return extra_ids_; }

  int unk_id() const;  // throws ConfigError if the vocabulary has no UNK

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  VocabScheme scheme_ = VocabScheme::kStartOfWordMarked;
  std::map<std::string, std::string> special_;  // role -> token
  std::set<std::string> special_set_;
  std::set<std::string> extra_ids_;
};

// Classifies a token within its vocabulary. Special and extra-id membership
// take precedence over the positional (marker-derived) classes. A bare
// marker token carries no surface text and classifies as kOther.
TokenClass classify_token(const std::string& token, const Vocabulary& vocab);

// Strips the scheme marker, if present, returning the surface form.
std::string strip_marker(const std::string& token, VocabScheme scheme);

// Greedy longest-match subword tokenizers over the two schemes. These are
// deterministic pure functions of the vocabulary, which is all the mapping
// rules and the desk-scale models need.
class WordPieceTokenizer {
 public:
  explicit WordPieceTokenizer(const Vocabulary* vocab);

  // Splits a single word (no whitespace) into vocabulary pieces. Unknown
  // spans produce the UNK token. Never returns an empty list for a
  // non-empty word; returns an empty list for an empty word.
  std::vector<std::string> tokenize_word(const std::string& word) const;

  // Whitespace-splits text and concatenates per-word pieces.
  std::vector<std::string> tokenize(const std::string& text) const;
  std::vector<int> encode(const std::string& text) const;

 private:
  const Vocabulary* vocab_;
};

class SentencePieceTokenizer {
 public:
  explicit SentencePieceTokenizer(const Vocabulary* vocab);

  // Whitespace-splits text; each word is matched greedily with the
  // start-of-word marker prepended to its first piece.
  std::vector<std::string> tokenize(const std::string& text) const;
  std::vector<int> encode(const std::string& text) const;

  // Inverse of tokenize for detokenizable sequences.
  std::string decode(const std::vector<int>& ids) const;
  std::string detokenize(const std::vector<std::string>& pieces) const;

 private:
  const Vocabulary* vocab_;
};

// Vocabulary file format: first line is a JSON header
//   {"scheme": "...", "special_tokens": {role: token}, "extra_id_tokens": [...]}
// followed by one token per line in id order.
Vocabulary load_vocabulary(const std::string& path);
void save_vocabulary(const Vocabulary& vocab, const std::string& path);

// Number of bytes in the UTF-8 codepoint starting at s[pos] (at least 1).
size_t utf8_len(const std::string& s, size_t pos);

}  // namespace mlat

#endif  // MLAT_VOCAB_HPP_
