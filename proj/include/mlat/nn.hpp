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
// Desk-scale neural models used as pluggable roles: a GRU encoder-decoder
// with Luong attention (the generator), a mean-pool MLP classifier (victim
// and language detector) and a mean-of-embeddings sentence encoder (the
// similarity model). All are templated on the scalar type: training runs at
// fp32, gradient checks at fp64.

#ifndef MLAT_NN_HPP_
#define MLAT_NN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mlat/autodiff.hpp"
#include "mlat/hash.hpp"
#include "mlat/rng.hpp"

namespace mlat::nn {

template <typename T>
uint64_t params_checksum(const std::vector<const Param<T>*>& ps) {
  uint64_t h = kFnvOffset;
  for (const Param<T>* p : ps) {
    h = fnv1a64(p->name.data(), p->name.size(), h);
    h = fnv1a64(p->w.a.data(), p->w.a.size() * sizeof(T), h);
  }
  return h;
}

template <typename T>
void init_uniform(Param<T>& p, Rng& rng, double scale) {
  for (auto& v : p.w.a) v = static_cast<T>(rng.uniform_range(-scale, scale));
}

template <typename T>
struct GruCell {
  Param<T> wz, uz, bz, wr, ur, br, wh, uh, bh;

  void init(const std::string& prefix, int in_dim, int hidden, Rng& rng) {
    double s = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto mk = [&](Param<T>& p, const char* n, int r, int c, bool zero = false) {
      p.name = prefix + "." + n;
      p.w = Mat<T>(r, c);
      if (!zero) init_uniform(p, rng, s);
    };
    mk(wz, "wz", in_dim, hidden);
    mk(uz, "uz", hidden, hidden);
    mk(bz, "bz", 1, hidden, true);
    mk(wr, "wr", in_dim, hidden);
    mk(ur, "ur", hidden, hidden);
    mk(br, "br", 1, hidden, true);
    mk(wh, "wh", in_dim, hidden);
    mk(uh, "uh", hidden, hidden);
    mk(bh, "bh", 1, hidden, true);
  }

  // x: 1 x in_dim node, h: 1 x hidden node -> new hidden node.
  int step(Tape<T>& t, Binder<T>& bind, int x, int h) const {
    using namespace ops;
    int z = sigmoid_(t, add(t, add(t, matmul(t, x, bind(wz)), matmul(t, h, bind(uz))), bind(bz)));
    int r = sigmoid_(t, add(t, add(t, matmul(t, x, bind(wr)), matmul(t, h, bind(ur))), bind(br)));
    int rh = hadamard(t, r, h);
    int hh = tanh_(t, add(t, add(t, matmul(t, x, bind(wh)), matmul(t, rh, bind(uh))), bind(bh)));
    int keep = affine(t, z, T(-1), T(1));  // 1 - z
    return add(t, hadamard(t, keep, h), hadamard(t, z, hh));
  }

  void collect(std::vector<Param<T>*>& out) {
    for (Param<T>* p : {&wz, &uz, &bz, &wr, &ur, &br, &wh, &uh, &bh}) out.push_back(p);
  }
  void collect(std::vector<const Param<T>*>& out) const {
    for (const Param<T>* p : {&wz, &uz, &bz, &wr, &ur, &br, &wh, &uh, &bh}) out.push_back(p);
  }
};

// GRU encoder-decoder with single-head multiplicative attention. Decoding
// starts from `decoder_start` (the generator vocabulary's PAD, T5-style) and
// stops at EOS.
template <typename T>
class Seq2Seq {
 public:
  struct Arch {
    int vocab = 0;
    int emb = 0;
    int hidden = 0;
  };

  Seq2Seq() = default;

  Seq2Seq(const Arch& arch, int decoder_start, int eos, Rng& rng)
      : arch_(arch), decoder_start_(decoder_start), eos_(eos) {
    double s = 1.0 / std::sqrt(static_cast<double>(arch.hidden));
    emb_.name = "emb";
    emb_.w = Mat<T>(arch.vocab, arch.emb);
    init_uniform(emb_, rng, 0.5);
    enc_.init("enc", arch.emb, arch.hidden, rng);
    dec_.init("dec", arch.emb, arch.hidden, rng);
    attn_w_.name = "attn.w";
    attn_w_.w = Mat<T>(arch.hidden, arch.hidden);
    init_uniform(attn_w_, rng, s);
    comb_w_.name = "comb.w";
    comb_w_.w = Mat<T>(2 * arch.hidden, arch.hidden);
    init_uniform(comb_w_, rng, s);
    comb_b_.name = "comb.b";
    comb_b_.w = Mat<T>(1, arch.hidden);
    out_w_.name = "out.w";
    out_w_.w = Mat<T>(arch.hidden, arch.vocab);
    init_uniform(out_w_, rng, s);
    out_b_.name = "out.b";
    out_b_.w = Mat<T>(1, arch.vocab);
  }

  const Arch& arch() const { return arch_; }
  int decoder_start() const { return decoder_start_; }
  int eos() const { return eos_; }

  struct Enc {
    int h_enc = -1;   // T_src x hidden
    int h_last = -1;  // 1 x hidden
  };

  Enc encode(Tape<T>& t, Binder<T>& bind, const std::vector<int>& tokens) const {
    using namespace ops;
    std::vector<int> src = tokens;
    if (src.empty()) src.push_back(eos_);  // degenerate input still encodes
    int embn = bind(emb_);
    int h = leaf(t, Mat<T>(1, arch_.hidden));
    std::vector<int> states;
    states.reserve(src.size());
    for (int tok : src) {
      int x = row_select(t, embn, tok);
      h = enc_.step(t, bind, x, h);
      states.push_back(h);
    }
    return Enc{concat_rows(t, states), h};
  }

  // One decoder step: returns (logits 1 x V node, new hidden node).
  std::pair<int, int> decode_step(Tape<T>& t, Binder<T>& bind, int prev_token, int h,
                                  int h_enc) const {
    using namespace ops;
    int x = row_select(t, bind(emb_), prev_token);
    int h2 = dec_.step(t, bind, x, h);
    int scores = matmul_nt(t, matmul(t, h2, bind(attn_w_)), h_enc);  // 1 x T_src
    int attn = softmax_rows(t, scores);
    int ctx = matmul(t, attn, h_enc);  // 1 x hidden
    int comb = tanh_(t, add(t, matmul(t, concat_cols(t, h2, ctx), bind(comb_w_)), bind(comb_b_)));
    int logits = add(t, matmul(t, comb, bind(out_w_)), bind(out_b_));
    return {logits, h2};
  }

  struct Rollout {
    std::vector<int> step_tokens;  // one emission per executed step (EOS kept)
    std::vector<int> logit_nodes;  // matching logits nodes
    int logits_matrix = -1;        // T x V stack of the step logits

    // Emitted tokens with the trailing EOS removed: the generated text x'.
    std::vector<int> surface_tokens(int eos) const {
      std::vector<int> out = step_tokens;
      if (!out.empty() && out.back() == eos) out.pop_back();
      return out;
    }
  };

  // Greedy rollout: the argmax feedback is a constant; gradients flow
  // through every step's logits.
  Rollout rollout_greedy(Tape<T>& t, Binder<T>& bind, const std::vector<int>& src,
                         int max_len) const {
    using namespace ops;
    Enc enc = encode(t, bind, src);
    Rollout ro;
    int h = enc.h_last;
    int prev = decoder_start_;
    for (int step = 0; step < max_len; ++step) {
      auto [logits, h2] = decode_step(t, bind, prev, h, enc.h_enc);
      h = h2;
      int tok = matops::argmax_row(t.val(logits), 0);
      ro.step_tokens.push_back(tok);
      ro.logit_nodes.push_back(logits);
      if (tok == eos_) break;
      prev = tok;
    }
    ro.logits_matrix = concat_rows(t, ro.logit_nodes);
    return ro;
  }

  // Teacher-forced mean cross-entropy over tgt plus the closing EOS.
  int ce_loss(Tape<T>& t, Binder<T>& bind, const std::vector<int>& src,
              const std::vector<int>& tgt) const {
    using namespace ops;
    Enc enc = encode(t, bind, src);
    std::vector<int> gold = tgt;
    gold.push_back(eos_);
    int h = enc.h_last;
    int prev = decoder_start_;
    std::vector<int> logit_nodes;
    logit_nodes.reserve(gold.size());
    for (int g : gold) {
      auto [logits, h2] = decode_step(t, bind, prev, h, enc.h_enc);
      h = h2;
      logit_nodes.push_back(logits);
      prev = g;
    }
    int lsm = log_softmax_rows(t, concat_rows(t, logit_nodes));
    int picked = gather_rows(t, lsm, gold);
    return scale(t, mean_all(t, picked), T(-1));
  }

  // ---- value-only helpers (scratch tape, no backward) ----

  struct EncValues {
    Mat<T> h_enc;
    Mat<T> h_last;
  };

  EncValues encode_values(const std::vector<int>& src) const {
    Tape<T> t;
    Binder<T> bind(&t, false);
    Enc e = encode(t, bind, src);
    return EncValues{t.val(e.h_enc), t.val(e.h_last)};
  }

  struct StepValues {
    Mat<T> logits;
    Mat<T> h;
  };

  StepValues step_values(const Mat<T>& h, int prev_token, const Mat<T>& h_enc) const {
    Tape<T> t;
    Binder<T> bind(&t, false);
    int hn = ops::leaf(t, h);
    int en = ops::leaf(t, h_enc);
    auto [logits, h2] = decode_step(t, bind, prev_token, hn, en);
    return StepValues{t.val(logits), t.val(h2)};
  }

  std::vector<int> greedy_decode(const std::vector<int>& src, int max_len) const {
    Tape<T> t;
    Binder<T> bind(&t, false);
    Rollout ro = rollout_greedy(t, bind, src, max_len);
    return ro.surface_tokens(eos_);
  }

  // log p(out_t | out_<t, src) for each position of `out` (include the EOS
  // yourself if it should be scored).
  std::vector<double> token_logprobs(const std::vector<int>& src,
                                     const std::vector<int>& out) const {
    using namespace ops;
    Tape<T> t;
    Binder<T> bind(&t, false);
    Enc enc = encode(t, bind, src);
    int h = enc.h_last;
    int prev = decoder_start_;
    std::vector<double> lps;
    lps.reserve(out.size());
    for (int tok : out) {
      auto [logits, h2] = decode_step(t, bind, prev, h, enc.h_enc);
      h = h2;
      int lsm = log_softmax_rows(t, logits);
      lps.push_back(static_cast<double>(t.val(lsm)(0, tok)));
      prev = tok;
    }
    return lps;
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> ps{&emb_};
    enc_.collect(ps);
    dec_.collect(ps);
    for (Param<T>* p : {&attn_w_, &comb_w_, &comb_b_, &out_w_, &out_b_}) ps.push_back(p);
    return ps;
  }
  std::vector<const Param<T>*> params() const {
    std::vector<const Param<T>*> ps{&emb_};
    enc_.collect(ps);
    dec_.collect(ps);
    for (const Param<T>* p : {&attn_w_, &comb_w_, &comb_b_, &out_w_, &out_b_}) ps.push_back(p);
    return ps;
  }

  uint64_t checksum() const { return params_checksum(params()); }

 private:
  Arch arch_;
  int decoder_start_ = 0;
  int eos_ = 0;
  Param<T> emb_;
  GruCell<T> enc_, dec_;
  Param<T> attn_w_, comb_w_, comb_b_, out_w_, out_b_;
};

// Mean-pooled embedding MLP over the model's own vocabulary; the shape used
// for both the victim classifier and the language detector.
template <typename T>
class MlpClassifier {
 public:
  struct Arch {
    int vocab = 0;
    int emb = 0;
    int hidden = 0;
    int classes = 0;
  };

  MlpClassifier() = default;

  MlpClassifier(const Arch& arch, Rng& rng) : arch_(arch) {
    double s = 1.0 / std::sqrt(static_cast<double>(arch.hidden));
    emb_.name = "emb";
    emb_.w = Mat<T>(arch.vocab, arch.emb);
    init_uniform(emb_, rng, 0.5);
    w1_.name = "w1";
    w1_.w = Mat<T>(arch.emb, arch.hidden);
    init_uniform(w1_, rng, s);
    b1_.name = "b1";
    b1_.w = Mat<T>(1, arch.hidden);
    w2_.name = "w2";
    w2_.w = Mat<T>(arch.hidden, arch.classes);
    init_uniform(w2_, rng, s);
    b2_.name = "b2";
    b2_.w = Mat<T>(1, arch.classes);
  }

  const Arch& arch() const { return arch_; }

  // Class probabilities (1 x C node) from a T x emb embedded-sequence node.
  int probs_from_embeddings(Tape<T>& t, Binder<T>& bind, int w_node) const {
    using namespace ops;
    int pooled = mean_rows(t, w_node);
    int hid = tanh_(t, add(t, matmul(t, pooled, bind(w1_)), bind(b1_)));
    int logits = add(t, matmul(t, hid, bind(w2_)), bind(b2_));
    return softmax_rows(t, logits);
  }

  // Token ids -> T x emb node through this model's own embedding table.
  int embed_tokens_node(Tape<T>& t, Binder<T>& bind, const std::vector<int>& tokens) const {
    using namespace ops;
    if (tokens.empty()) throw NumericError("classifier: empty token sequence");
    int embn = bind(emb_);
    std::vector<int> rows;
    rows.reserve(tokens.size());
    for (int tok : tokens) rows.push_back(row_select(t, embn, tok));
    return concat_rows(t, rows);
  }

  int ce_loss(Tape<T>& t, Binder<T>& bind, const std::vector<int>& tokens, int label) const {
    using namespace ops;
    int probs = probs_from_embeddings(t, bind, embed_tokens_node(t, bind, tokens));
    int lp = log_(t, clamp_min(t, pick(t, probs, 0, label), T(1e-12)));
    return scale(t, lp, T(-1));
  }

  std::vector<double> probs_tokens(const std::vector<int>& tokens) const {
    Tape<T> t;
    Binder<T> bind(&t, false);
    int probs = probs_from_embeddings(t, bind, embed_tokens_node(t, bind, tokens));
    const Mat<T>& v = t.val(probs);
    std::vector<double> out(v.cols);
    for (int c = 0; c < v.cols; ++c) out[c] = static_cast<double>(v(0, c));
    return out;
  }

  Mat<double> embedding_table() const { return emb_.w.template cast<double>(); }

  std::vector<Param<T>*> params() { return {&emb_, &w1_, &b1_, &w2_, &b2_}; }
  std::vector<const Param<T>*> params() const { return {&emb_, &w1_, &b1_, &w2_, &b2_}; }
  uint64_t checksum() const { return params_checksum(params()); }

 private:
  Arch arch_;
  Param<T> emb_, w1_, b1_, w2_, b2_;
};

// Sentence encoder: mean of per-token embeddings. Carries no trained head;
// with random embeddings the cosine behaves like a smoothed bag-of-tokens
// overlap, which is what the desk-scale similarity role needs.
template <typename T>
class MeanEmbedder {
 public:
  struct Arch {
    int vocab = 0;
    int dim = 0;
  };

  MeanEmbedder() = default;

  MeanEmbedder(const Arch& arch, Rng& rng) : arch_(arch) {
    emb_.name = "emb";
    emb_.w = Mat<T>(arch.vocab, arch.dim);
    init_uniform(emb_, rng, 1.0);
  }

  const Arch& arch() const { return arch_; }

  std::vector<double> embed_tokens(const std::vector<int>& tokens) const {
    if (tokens.empty()) throw NumericError("embedder: empty token sequence");
    std::vector<double> out(arch_.dim, 0.0);
    for (int tok : tokens)
      for (int c = 0; c < arch_.dim; ++c) out[c] += static_cast<double>(emb_.w(tok, c));
    for (auto& v : out) v /= static_cast<double>(tokens.size());
    return out;
  }

  Mat<double> embedding_table() const { return emb_.w.template cast<double>(); }

  std::vector<Param<T>*> params() { return {&emb_}; }
  std::vector<const Param<T>*> params() const { return {&emb_}; }
  uint64_t checksum() const { return params_checksum(params()); }

 private:
  Arch arch_;
  Param<T> emb_;
};

// Adafactor with factored second moments, fixed learning rate, no relative
// steps and no parameter scaling. Zero gradient produces an exactly-zero
// update.
template <typename T>
class Adafactor {
 public:
  struct Options {
    double lr = 1e-5;
    double weight_decay = 0.0;
    double eps1 = 1e-30;
    double clip_threshold = 1.0;
    double decay_exponent = -0.8;
  };

  Adafactor() = default;
  explicit Adafactor(Options opt) : opt_(opt) {}

  const Options& options() const { return opt_; }

  void register_params(std::vector<Param<T>*> ps) {
    params_ = std::move(ps);
    states_.clear();
    states_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
      Param<T>& p = *params_[i];
      p.ensure_grad();
      if (factored(p)) {
        states_[i].row = Mat<T>(p.w.rows, 1);
        states_[i].col = Mat<T>(1, p.w.cols);
      } else {
        states_[i].full = Mat<T>(p.w.rows, p.w.cols);
      }
    }
  }

  void zero_grads() {
    for (Param<T>* p : params_) p->zero_grad();
  }

  void step() {
    ++t_;
    T beta = static_cast<T>(1.0 - std::pow(static_cast<double>(t_), opt_.decay_exponent));
    T one_minus = T(1) - beta;
    for (size_t i = 0; i < params_.size(); ++i) {
      Param<T>& p = *params_[i];
      State& s = states_[i];
      const Mat<T>& g = p.g;
      Mat<T> u(p.w.rows, p.w.cols);
      if (factored(p)) {
        for (int r = 0; r < g.rows; ++r) {
          T m = T(0);
          for (int c = 0; c < g.cols; ++c) m += g(r, c) * g(r, c) + static_cast<T>(opt_.eps1);
          m /= T(g.cols);
          s.row(r, 0) = beta * s.row(r, 0) + one_minus * m;
        }
        for (int c = 0; c < g.cols; ++c) {
          T m = T(0);
          for (int r = 0; r < g.rows; ++r) m += g(r, c) * g(r, c) + static_cast<T>(opt_.eps1);
          m /= T(g.rows);
          s.col(0, c) = beta * s.col(0, c) + one_minus * m;
        }
        T row_mean = T(0);
        for (int r = 0; r < g.rows; ++r) row_mean += s.row(r, 0);
        row_mean /= T(g.rows);
        for (int r = 0; r < g.rows; ++r) {
          T rf = std::sqrt(s.row(r, 0) / row_mean);
          for (int c = 0; c < g.cols; ++c) u(r, c) = g(r, c) / (rf * std::sqrt(s.col(0, c)));
        }
      } else {
        for (size_t k = 0; k < g.a.size(); ++k) {
          s.full.a[k] = beta * s.full.a[k] +
                        one_minus * (g.a[k] * g.a[k] + static_cast<T>(opt_.eps1));
          u.a[k] = g.a[k] / std::sqrt(s.full.a[k]);
        }
      }
      // RMS clipping of the update.
      T ss = T(0);
      for (T v : u.a) ss += v * v;
      T rms = std::sqrt(ss / T(u.a.size()));
      T den = std::max(T(1), rms / static_cast<T>(opt_.clip_threshold));
      T lr = static_cast<T>(opt_.lr);
      for (size_t k = 0; k < u.a.size(); ++k) {
        if (opt_.weight_decay != 0.0)
          p.w.a[k] -= lr * static_cast<T>(opt_.weight_decay) * p.w.a[k];
        p.w.a[k] -= lr * u.a[k] / den;
      }
      p.zero_grad();
    }
  }

  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }

  struct State {
    Mat<T> row, col, full;
  };
  std::vector<State>& states() { return states_; }
  const std::vector<State>& states() const { return states_; }
  const std::vector<Param<T>*>& registered() const { return params_; }

 private:
  static bool factored(const Param<T>& p) { return p.w.rows > 1 && p.w.cols > 1; }

  Options opt_;
  std::vector<Param<T>*> params_;
  std::vector<State> states_;
  int64_t t_ = 0;
};

using Seq2SeqF = Seq2Seq<float>;
using MlpClassifierF = MlpClassifier<float>;
using MeanEmbedderF = MeanEmbedder<float>;

}  // namespace mlat::nn

#endif  // MLAT_NN_HPP_
