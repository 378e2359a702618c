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
//
// Component-model roles. Every downstream model the pipeline touches is a
// pluggable role behind one of these interfaces; the concrete desk-scale
// implementations wrap the nn models and real subword tokenizers.

#ifndef MLAT_MODELS_HPP_
#define MLAT_MODELS_HPP_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mlat/nn.hpp"
#include "mlat/vocab.hpp"

namespace mlat {

// The classifier under attack. Text goes through the victim's own tokenizer.
class VictimModel {
 public:
  virtual ~VictimModel() = default;
  virtual int num_classes() const = 0;
  virtual std::vector<double> class_probs(const std::string& text) const = 0;

  int predict(const std::string& text) const {
    auto p = class_probs(text);
    int best = 0;
    for (size_t i = 1; i < p.size(); ++i)
      if (p[i] > p[best]) best = static_cast<int>(i);
    return best;
  }
};

class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
};

class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual const std::vector<std::string>& languages() const = 0;
  virtual std::vector<double> language_probs(const std::string& text) const = 0;

  // Confidence assigned to `language`; ConfigError when not covered.
  double confidence(const std::string& text, const std::string& language) const;
};

class FluencyScorer {
 public:
  virtual ~FluencyScorer() = default;
  virtual std::vector<double> token_logprobs(const std::string& text) const = 0;
};

// Per-token contextual-or-static embeddings for the greedy-matching
// similarity metric.
class TokenEmbedder {
 public:
  virtual ~TokenEmbedder() = default;
  virtual std::vector<std::vector<double>> token_embeddings(const std::string& text) const = 0;
};

// Candidate generator for the combinatorial baselines: fill the sentinel at
// `mask_pos` in `context`, returning up to k (token, probability) pairs in
// descending probability.
class MaskedLm {
 public:
  virtual ~MaskedLm() = default;
  virtual std::vector<std::pair<std::string, double>> top_fills(
      const std::vector<std::string>& context, size_t mask_pos, int k) const = 0;
};

// Length-normalized divergence of a decoded candidate under the trained
// generator versus the frozen reference.
class KlScorer {
 public:
  virtual ~KlScorer() = default;
  virtual double kl(const std::string& x, const std::string& x_prime) const = 0;
};

// ---- concrete desk-scale implementations ----

class ClassifierVictim final : public VictimModel {
 public:
  ClassifierVictim(nn::MlpClassifierF net, Vocabulary vocab, std::vector<std::string> labels);

  int num_classes() const override { return net_.arch().classes; }
  std::vector<double> class_probs(const std::string& text) const override;

  const nn::MlpClassifierF& net() const { return net_; }
  nn::MlpClassifierF& net() { return net_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::vector<int> tokenize(const std::string& text) const { return tokenizer_.encode(text); }

 private:
  nn::MlpClassifierF net_;
  Vocabulary vocab_;
  WordPieceTokenizer tokenizer_;
  std::vector<std::string> labels_;
};

class ClassifierDetector final : public LanguageDetector {
 public:
  ClassifierDetector(nn::MlpClassifierF net, Vocabulary vocab, std::vector<std::string> langs);

  const std::vector<std::string>& languages() const override { return languages_; }
  std::vector<double> language_probs(const std::string& text) const override;

  const nn::MlpClassifierF& net() const { return net_; }
  nn::MlpClassifierF& net() { return net_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::vector<int> tokenize(const std::string& text) const { return tokenizer_.encode(text); }

 private:
  nn::MlpClassifierF net_;
  Vocabulary vocab_;
  WordPieceTokenizer tokenizer_;
  std::vector<std::string> languages_;
};

class MeanSentenceEncoder final : public SentenceEncoder {
 public:
  MeanSentenceEncoder(nn::MeanEmbedderF net, Vocabulary vocab);

  std::vector<double> embed(const std::string& text) const override;

  const nn::MeanEmbedderF& net() const { return net_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::vector<int> tokenize(const std::string& text) const { return tokenizer_.encode(text); }

 private:
  nn::MeanEmbedderF net_;
  Vocabulary vocab_;
  WordPieceTokenizer tokenizer_;
};

// Static per-token embeddings from a table; fulfils the TokenEmbedder role
// for the desk-scale semantic similarity metric.
class TableTokenEmbedder final : public TokenEmbedder {
 public:
  TableTokenEmbedder(Mat<double> table, Vocabulary vocab);
  std::vector<std::vector<double>> token_embeddings(const std::string& text) const override;

 private:
  Mat<double> table_;
  Vocabulary vocab_;
  WordPieceTokenizer tokenizer_;
};

// Self-likelihood of text under a seq2seq model, teacher-forced on itself.
class Seq2SeqFluency final : public FluencyScorer {
 public:
  Seq2SeqFluency(std::shared_ptr<const nn::Seq2SeqF> net, Vocabulary vocab);
  std::vector<double> token_logprobs(const std::string& text) const override;

 private:
  std::shared_ptr<const nn::Seq2SeqF> net_;
  Vocabulary vocab_;
  SentencePieceTokenizer tokenizer_;
};

// KL of a candidate under (g, g*), both teacher-forced on the candidate
// given the original.
class PairKlScorer final : public KlScorer {
 public:
  PairKlScorer(const nn::Seq2SeqF* g, const nn::Seq2SeqF* g_star, const Vocabulary* vocab);
  double kl(const std::string& x, const std::string& x_prime) const override;

 private:
  const nn::Seq2SeqF* g_;
  const nn::Seq2SeqF* g_star_;
  const Vocabulary* vocab_;
  SentencePieceTokenizer tokenizer_;
};

// Counts victim forward passes; the attack modules wrap the victim with this
// so query accounting is observable rather than inferred.
class CountingVictim final : public VictimModel {
 public:
  explicit CountingVictim(const VictimModel* inner) : inner_(inner) {}

  int num_classes() const override { return inner_->num_classes(); }
  std::vector<double> class_probs(const std::string& text) const override {
    ++count_;
    return inner_->class_probs(text);
  }

  long long count() const { return count_; }
  void reset() { count_ = 0; }

 private:
  const VictimModel* inner_;
  mutable long long count_ = 0;
};

// Context-free masked-LM: proposes the k most frequent corpus tokens. Good
// enough to drive the baseline searches at desk scale.
class UnigramMaskedLm final : public MaskedLm {
 public:
  explicit UnigramMaskedLm(const std::vector<std::string>& corpus_texts);
  explicit UnigramMaskedLm(std::vector<std::pair<std::string, double>> ranked);

  std::vector<std::pair<std::string, double>> top_fills(
      const std::vector<std::string>& context, size_t mask_pos, int k) const override;

 private:
  std::vector<std::pair<std::string, double>> ranked_;  // descending probability
};

}  // namespace mlat

#endif  // MLAT_MODELS_HPP_
