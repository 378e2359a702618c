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
// Two-stage training. Stage one teacher-forces the generator on paraphrase
// pairs; stage two fine-tunes it against the composite objective, bridging
// the per-step token distributions into the frozen component models through
// Gumbel sampling, vocabulary maps and embedding tables. Everything here is
// templated on the scalar type; fp32 is the training default and fp64 backs
// the finite-difference checks.

#ifndef MLAT_TRAINER_HPP_
#define MLAT_TRAINER_HPP_

#include <cmath>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "mlat/bridge.hpp"
#include "mlat/data.hpp"
#include "mlat/nn.hpp"
#include "mlat/objective.hpp"
#include "mlat/scoring.hpp"
#include "mlat/validation.hpp"

namespace mlat {

struct TrainConfig {
  double learning_rate = 1e-5;
  int batch_size = 5;
  int max_input_tokens = 32;
  std::string optimizer_name = "adafactor";
  int max_steps = 0;  // 0 = no cap
  uint64_t seed = 0;
  double weight_decay = 0.0;

  void validate() const;
};

template <typename T>
struct GeneratorPair {
  nn::Seq2Seq<T> g;       // trainable
  nn::Seq2Seq<T> g_star;  // frozen reference copy
};

// Frozen component models and their vocabulary maps for the soft path.
template <typename T>
struct ComponentSet {
  const nn::MlpClassifier<T>* victim = nullptr;
  const nn::MeanEmbedder<T>* similarity = nullptr;
  const nn::MlpClassifier<T>* language = nullptr;
  const VocabMapMatrix* map_victim = nullptr;
  const VocabMapMatrix* map_similarity = nullptr;
  const VocabMapMatrix* map_language = nullptr;
};

// One fine-tuning example with its cached original-side constants.
struct TrainExample {
  OriginalContext orig;         // text, label, language, p_true, lang_conf, embedding
  std::vector<int> gen_tokens;  // generator-vocabulary ids
  int lang_index = 0;           // row of the language in the detector head
};

// Groups similar lengths into batches of `batch_size` and shuffles the batch
// order. Every index appears exactly once.
std::vector<std::vector<int>> bucket_batches(const std::vector<int>& lengths, int batch_size,
                                             Rng& rng);

struct StepRecord {
  double loss = 0;
  // Per example, per Gumbel sample: each breakdown satisfies the composite
  // identity on its own.
  std::vector<std::vector<ScoreBreakdown>> breakdowns;
  std::vector<double> sample_diversity;     // d(B_b) per sample
  std::vector<double> example_objectives;   // mean over samples
  double mean_diversity = 0;
};

namespace detail {

// Per-tape constant nodes of the frozen components.
template <typename T>
struct ComponentNodes {
  int e_victim = -1, e_similarity = -1, e_language = -1;  // embedding tables
};

template <typename T>
ComponentNodes<T> bind_component_tables(nn::Tape<T>& t, const ComponentSet<T>& comps) {
  ComponentNodes<T> n;
  n.e_victim = nn::ops::leaf(t, comps.victim->embedding_table().template cast<T>());
  n.e_similarity = nn::ops::leaf(t, comps.similarity->embedding_table().template cast<T>());
  n.e_language = nn::ops::leaf(t, comps.language->embedding_table().template cast<T>());
  return n;
}

}  // namespace detail

// Inputs of the soft objective for one example, independent of how the
// logits were produced (live rollout or a probe leaf).
struct SoftExampleInputs {
  std::vector<int> step_tokens;        // emission at each decoder step (EOS kept)
  std::vector<double> gstar_logprobs;  // frozen-reference log-probs of those steps
  double p_true_x = 0;
  double p_lang_x = 0;
  std::vector<double> sim_emb_x;
  int label = 0;
  int lang_index = 0;
};

template <typename T>
struct SoftExampleNodes {
  int objective = -1;                         // mean over samples
  std::vector<int> sample_objectives;         // per-sample composites
  std::vector<int> sample_sim_embeddings;     // per-sample 1 x d sentence embeddings
  std::vector<ScoreBreakdown> sample_scores;  // recorded forward values
};

// Builds the per-example objective graph from a T x |V_g| logits node.
// `noise` supplies one pre-drawn Gumbel matrix per sample so the graph is a
// deterministic function of the logits.
template <typename T>
SoftExampleNodes<T> build_example_objective(nn::Tape<T>& t, int logits_node,
                                            const SoftExampleInputs& in,
                                            const ComponentSet<T>& comps,
                                            const detail::ComponentNodes<T>& tables,
                                            const ObjectiveWeights& w, double temperature,
                                            const std::vector<Mat<double>>& noise) {
  using namespace nn::ops;
  nn::Binder<T> frozen(&t, false);
  const int steps = static_cast<int>(in.step_tokens.size());
  if (steps == 0) throw NumericError("soft objective: empty generation");
  if (t.val(logits_node).rows != steps)
    throw NumericError("soft objective: logits rows != step count");

  int p = softmax_rows(t, logits_node);
  int logp = log_(t, clamp_min(t, p, static_cast<T>(kLogProbFloor)));

  double gstar_mean = 0;
  for (double lp : in.gstar_logprobs) gstar_mean += lp;
  gstar_mean /= static_cast<double>(in.gstar_logprobs.size());

  int emb_x = leaf(t, [&] {
    Mat<T> m(1, static_cast<int>(in.sim_emb_x.size()));
    for (int c = 0; c < m.cols; ++c) m(0, c) = static_cast<T>(in.sim_emb_x[c]);
    return m;
  }());

  SoftExampleNodes<T> out;
  for (const Mat<double>& g_noise : noise) {
    int z = scale(t, add(t, logp, leaf(t, g_noise.template cast<T>())),
                  static_cast<T>(1.0 / temperature));
    int pb = softmax_rows(t, z);

    // Victim: confidence degradation on the soft candidate.
    int w_v = matmul(t, map_vocab(t, pb, comps.map_victim), tables.e_victim);
    int probs_v = comps.victim->probs_from_embeddings(t, frozen, w_v);
    int v = sub(t, scalar(t, static_cast<T>(in.p_true_x)), pick(t, probs_v, 0, in.label));

    // Similarity: cosine between soft candidate and original embeddings.
    int w_s = matmul(t, map_vocab(t, pb, comps.map_similarity), tables.e_similarity);
    int emb_c = mean_rows(t, w_s);
    int s = cosine_node(t, emb_c, emb_x);

    // Language consistency degradation.
    int w_l = matmul(t, map_vocab(t, pb, comps.map_language), tables.e_language);
    int probs_l = comps.language->probs_from_embeddings(t, frozen, w_l);
    int l = sub(t, scalar(t, static_cast<T>(in.p_lang_x)), pick(t, probs_l, 0, in.lang_index));

    // Length-normalized divergence of the sampled distribution against the
    // frozen reference, on the rolled-out tokens.
    int logpb = log_(t, clamp_min(t, pb, static_cast<T>(kLogProbFloor)));
    int lp_g = mean_all(t, gather_rows(t, logpb, in.step_tokens));
    int kl = sub(t, lp_g, scalar(t, static_cast<T>(gstar_mean)));

    int o = add(t,
                add(t, scale(t, clip_below_node(t, v, static_cast<T>(w.beta_v)),
                             static_cast<T>(w.alpha_v)),
                    scale(t, clip_below_node(t, s, static_cast<T>(w.beta_s)),
                          static_cast<T>(w.alpha_s))),
                add(t, scale(t, clip_above_node(t, l, static_cast<T>(w.beta_l)),
                             static_cast<T>(-w.alpha_l)),
                    scale(t, clip_above_node(t, kl, static_cast<T>(w.beta_kl)),
                          static_cast<T>(-w.alpha_kl))));

    ScoreBreakdown b;
    b.v = static_cast<double>(t.val(v)(0, 0));
    b.s = static_cast<double>(t.val(s)(0, 0));
    b.l = static_cast<double>(t.val(l)(0, 0));
    b.d_kl = static_cast<double>(t.val(kl)(0, 0));
    b.o = static_cast<double>(t.val(o)(0, 0));
    out.sample_scores.push_back(b);
    out.sample_objectives.push_back(o);
    out.sample_sim_embeddings.push_back(emb_c);
  }
  out.objective = mean_scalars(t, out.sample_objectives);
  return out;
}

// Batch loss: L = -mean_i(o_i) + alpha_d * mean_b(d_b), with each d_b the
// diversity penalty of sample b's generated embeddings against the original
// embeddings.
template <typename T>
int build_batch_loss(nn::Tape<T>& t, const std::vector<SoftExampleNodes<T>>& examples,
                     const std::vector<std::vector<double>>& original_embs, double alpha_d,
                     int num_samples, StepRecord* rec) {
  using namespace nn::ops;
  const int n = static_cast<int>(examples.size());
  if (n == 0) throw NumericError("batch loss over an empty batch");

  std::vector<int> objective_nodes;
  objective_nodes.reserve(n);
  for (const auto& e : examples) objective_nodes.push_back(e.objective);
  int neg_mean_o = scale(t, mean_scalars(t, objective_nodes), T(-1));

  int loss = neg_mean_o;
  std::vector<double> sample_d(num_samples, 0.0);
  if (n < 2) {
    std::cerr << "mlat: warning: diversity undefined for batch of " << n << ", using 0\n";
  }
  if (n >= 2) {
    std::vector<int> d_nodes;
    for (int b = 0; b < num_samples; ++b) {
      std::vector<int> sq_terms;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          double so = matops::cosine(original_embs[i], original_embs[j]);
          int sg = cosine_node(t, examples[i].sample_sim_embeddings[b],
                               examples[j].sample_sim_embeddings[b]);
          int diff = affine(t, sg, T(1), static_cast<T>(-so));
          sq_terms.push_back(hadamard(t, diff, diff));
        }
      }
      int d_b = mean_scalars(t, sq_terms);
      sample_d[b] = static_cast<double>(t.val(d_b)(0, 0));
      d_nodes.push_back(d_b);
    }
    int d_mean = mean_scalars(t, d_nodes);
    loss = add(t, neg_mean_o, scale(t, d_mean, static_cast<T>(alpha_d)));
  }

  if (rec) {
    rec->sample_diversity = sample_d;
    rec->mean_diversity = 0;
    for (double d : sample_d) rec->mean_diversity += d;
    rec->mean_diversity /= std::max(1, num_samples);
    rec->loss = static_cast<double>(t.val(loss)(0, 0));
  }
  return loss;
}

// One fine-tuning step: rollout, bridge, objective, backward, Adafactor.
template <typename T>
class FinetuneEngine {
 public:
  FinetuneEngine(GeneratorPair<T>* pair, ComponentSet<T> comps, ObjectiveWeights weights,
                 GumbelConfig gumbel, TrainConfig cfg)
      : pair_(pair), comps_(std::move(comps)), weights_(weights), gumbel_(gumbel), cfg_(cfg) {
    weights_.validate();
    gumbel_.validate();
    cfg_.validate();
    typename nn::Adafactor<T>::Options opt;
    opt.lr = cfg_.learning_rate;
    opt.weight_decay = cfg_.weight_decay;
    optimizer_ = nn::Adafactor<T>(opt);
    optimizer_.register_params(pair_->g.params());
  }

  nn::Adafactor<T>& optimizer() { return optimizer_; }
  const ObjectiveWeights& weights() const { return weights_; }

  int rollout_cap(const TrainExample& ex) const {
    return std::min<int>(static_cast<int>(ex.gen_tokens.size()) + 2, cfg_.max_input_tokens + 2);
  }

  // Builds the full loss graph for a batch. Exposed separately so the
  // gradient checks can drive it without stepping the optimizer.
  int build_loss(nn::Tape<T>& t, const std::vector<TrainExample>& batch, Rng& noise_rng,
                 StepRecord* rec) {
    nn::Binder<T> gbind(&t, true);
    auto tables = detail::bind_component_tables(t, comps_);
    std::vector<SoftExampleNodes<T>> nodes;
    std::vector<std::vector<double>> orig_embs;
    for (const auto& ex : batch) {
      auto ro = pair_->g.rollout_greedy(t, gbind, ex.gen_tokens, rollout_cap(ex));
      SoftExampleInputs in;
      in.step_tokens = ro.step_tokens;
      in.gstar_logprobs = pair_->g_star.token_logprobs(ex.gen_tokens, ro.step_tokens);
      in.p_true_x = ex.orig.p_true;
      in.p_lang_x = ex.orig.lang_conf;
      in.sim_emb_x = ex.orig.embedding;
      in.label = ex.orig.label;
      in.lang_index = ex.lang_index;
      std::vector<Mat<double>> noise;
      for (int b = 0; b < gumbel_.num_samples; ++b)
        noise.push_back(gumbel_noise(noise_rng, static_cast<int>(ro.step_tokens.size()),
                                     pair_->g.arch().vocab));
      nodes.push_back(build_example_objective(t, ro.logits_matrix, in, comps_, tables, weights_,
                                              gumbel_.temperature, noise));
      orig_embs.push_back(ex.orig.embedding);
    }
    if (rec) {
      rec->breakdowns.clear();
      rec->example_objectives.clear();
      for (const auto& nd : nodes) {
        rec->breakdowns.push_back(nd.sample_scores);
        rec->example_objectives.push_back(static_cast<double>(t.val(nd.objective)(0, 0)));
      }
    }
    return build_batch_loss(t, nodes, orig_embs, weights_.alpha_d, gumbel_.num_samples, rec);
  }

  StepRecord step(const std::vector<TrainExample>& batch, Rng& noise_rng) {
    if (batch.empty()) throw NumericError("finetune step on an empty batch");
    nn::Tape<T> tape;
    StepRecord rec;
    int loss = build_loss(tape, batch, noise_rng, &rec);
    if (!std::isfinite(rec.loss)) {
      std::string diag = "non-finite loss; per-term values:";
      for (const auto& exb : rec.breakdowns)
        for (const auto& b : exb)
          diag += " [v=" + std::to_string(b.v) + " s=" + std::to_string(b.s) +
                  " l=" + std::to_string(b.l) + " kl=" + std::to_string(b.d_kl) + "]";
      throw NumericError(diag);
    }
    optimizer_.zero_grads();
    tape.backward(loss);
    optimizer_.step();
    return rec;
  }

 private:
  GeneratorPair<T>* pair_;
  ComponentSet<T> comps_;
  ObjectiveWeights weights_;
  GumbelConfig gumbel_;
  TrainConfig cfg_;
  nn::Adafactor<T> optimizer_;
};

// Stage-one training: teacher-forced cross-entropy on paraphrase pairs.
// Freezes a copy of the trained model as the reference g*.
template <typename T>
void pretrain_paraphraser(GeneratorPair<T>& pair,
                          const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs,
                          const TrainConfig& cfg, int epochs, double lr) {
  cfg.validate();
  if (pairs.empty()) throw DataError("pretrain: empty paraphrase dataset");
  typename nn::Adafactor<T>::Options opt;
  opt.lr = lr;
  opt.weight_decay = cfg.weight_decay;
  nn::Adafactor<T> optimizer(opt);
  optimizer.register_params(pair.g.params());

  Rng run_rng(cfg.seed);
  std::vector<int> lengths;
  lengths.reserve(pairs.size());
  for (const auto& pq : pairs) lengths.push_back(static_cast<int>(pq.first.size()));

  int steps = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng epoch_rng = run_rng.split(static_cast<uint64_t>(epoch));
    auto batches = bucket_batches(lengths, cfg.batch_size, epoch_rng);
    for (const auto& batch : batches) {
      nn::Tape<T> t;
      nn::Binder<T> bind(&t, true);
      std::vector<int> losses;
      for (int idx : batch)
        losses.push_back(pair.g.ce_loss(t, bind, pairs[idx].first, pairs[idx].second));
      int loss = nn::ops::mean_scalars(t, losses);
      optimizer.zero_grads();
      t.backward(loss);
      optimizer.step();
      ++steps;
      if (cfg.max_steps > 0 && steps >= cfg.max_steps) {
        pair.g_star = pair.g;
        return;
      }
    }
  }
  pair.g_star = pair.g;
}

// ---- fine-tuning run loop (fp32 path with validation + early stopping) ----

struct FinetuneRunOptions {
  TrainConfig train;
  ObjectiveWeights weights;
  GumbelConfig gumbel;
  ValidationWeights vweights;
  DecodeConfig validation_decode;  // num_candidates = 16 per the protocol
  int validation_frequency = 24;   // batches
  int patience = 12;
  int max_epochs = 1000;
  std::string checkpoint_dir;       // empty = keep best in memory only
  std::string step_log_path;        // empty = no log
  std::string validation_log_path;  // empty = no log
  std::string config_hash;
  // Test hook: replaces the validation metric with a scripted value while
  // keeping the stop/restore machinery live.
  std::function<double(int step)> validation_override;
};

struct FinetuneOutcome {
  int steps = 0;
  int validations = 0;
  bool stopped_early = false;
  double best_metric = 0;
  int best_step = -1;
  std::vector<double> diversity_trace;  // d(B) per step
};

FinetuneOutcome run_finetune(GeneratorPair<float>& pair, const ComponentSet<float>& comps,
                             const ScoringStack& stack, const Vocabulary& gen_vocab,
                             const std::vector<TrainExample>& train_set,
                             const std::vector<LabeledExample>& val_set,
                             const FinetuneRunOptions& options);

// Tokenizes and caches original-side constants for fine-tuning.
std::vector<TrainExample> prepare_train_examples(const std::vector<LabeledExample>& examples,
                                                 const Vocabulary& gen_vocab,
                                                 const ScoringStack& stack);

}  // namespace mlat

#endif  // MLAT_TRAINER_HPP_
