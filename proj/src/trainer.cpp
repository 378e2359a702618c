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

#include "mlat/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "mlat/model_io.hpp"

namespace mlat {

using nlohmann::json;
namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_input_tokens < 1) throw ConfigError("max_input_tokens must be >= 1");
  if (optimizer_name != "adafactor")
    throw ConfigError("unsupported optimizer: " + optimizer_name);
}

std::vector<std::vector<int>> bucket_batches(const std::vector<int>& lengths, int batch_size,
                                             Rng& rng) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  std::vector<int> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lengths[a] < lengths[b]; });
  std::vector<std::vector<int>> batches;
  for (size_t i = 0; i < order.size(); i += batch_size) {
    std::vector<int> batch;
    for (size_t j = i; j < order.size() && j < i + batch_size; ++j) batch.push_back(order[j]);
    batches.push_back(std::move(batch));
  }
  rng.shuffle(batches);
  return batches;
}

std::vector<TrainExample> prepare_train_examples(const std::vector<LabeledExample>& examples,
                                                 const Vocabulary& gen_vocab,
                                                 const ScoringStack& stack) {
  if (!stack.victim || !stack.encoder || !stack.detector)
    throw ConfigError("fine-tuning needs victim, similarity and language roles bound");
  SentencePieceTokenizer tokenizer(&gen_vocab);
  const auto& langs = stack.detector->languages();
  std::vector<TrainExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    TrainExample ex;
    ex.orig = prepare_original(stack, e.text, e.label, e.language);
    ex.gen_tokens = tokenizer.encode(e.text);
    if (ex.gen_tokens.empty()) throw DataError("example tokenizes to nothing: " + e.text);
    auto it = std::find(langs.begin(), langs.end(), e.language);
    if (it == langs.end())
      throw ConfigError("language detector does not cover language: " + e.language);
    ex.lang_index = static_cast<int>(it - langs.begin());
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

void save_checkpoint(const std::string& dir, int step, const nn::Seq2SeqF& model,
                     const Vocabulary& vocab, const nn::Adafactor<float>& opt, double metric,
                     const std::string& config_hash) {
  fs::path d = fs::path(dir) / ("step-" + std::to_string(step));
  fs::create_directories(d);
  save_generator(model, vocab, (d / "model.bin").string());
  save_adafactor(opt, (d / "optimizer.bin").string());
  json meta;
  meta["step"] = step;
  meta["validation_metric"] = metric;
  meta["config_hash"] = config_hash;
  std::ofstream out(d / "meta.json");
  out << meta.dump(2) << "\n";
}

}  // namespace

FinetuneOutcome run_finetune(GeneratorPair<float>& pair, const ComponentSet<float>& comps,
                             const ScoringStack& stack, const Vocabulary& gen_vocab,
                             const std::vector<TrainExample>& train_set,
                             const std::vector<LabeledExample>& val_set,
                             const FinetuneRunOptions& options) {
  if (train_set.empty()) throw DataError("fine-tuning on an empty training set");
  FinetuneEngine<float> engine(&pair, comps, options.weights, options.gumbel, options.train);

  Rng run_rng(options.train.seed);
  Rng noise_rng = run_rng.split(0x6e6f6973);

  EarlyStopState es;
  es.patience = options.patience;
  es.validation_frequency = options.validation_frequency;

  std::ofstream step_log, val_log;
  if (!options.step_log_path.empty()) step_log.open(options.step_log_path);
  if (!options.validation_log_path.empty()) val_log.open(options.validation_log_path);

  std::vector<int> lengths;
  lengths.reserve(train_set.size());
  for (const auto& e : train_set) lengths.push_back(static_cast<int>(e.gen_tokens.size()));

  FinetuneOutcome outcome;
  nn::Seq2SeqF best_model = pair.g;
  int batches_since_val = 0;
  bool stop = false;

  for (int epoch = 0; epoch < options.max_epochs && !stop; ++epoch) {
    Rng epoch_rng = run_rng.split(static_cast<uint64_t>(epoch) + 1);
    auto batches = bucket_batches(lengths, options.train.batch_size, epoch_rng);
    for (const auto& batch_idx : batches) {
      std::vector<TrainExample> batch;
      batch.reserve(batch_idx.size());
      for (int i : batch_idx) batch.push_back(train_set[i]);
      StepRecord rec = engine.step(batch, noise_rng);
      outcome.steps++;
      outcome.diversity_trace.push_back(rec.mean_diversity);

      if (step_log.is_open()) {
        double mean_o = 0;
        for (double o : rec.example_objectives) mean_o += o;
        mean_o /= static_cast<double>(rec.example_objectives.size());
        json j;
        j["step"] = outcome.steps;
        j["loss"] = rec.loss;
        j["mean_objective"] = mean_o;
        j["diversity"] = rec.mean_diversity;
        step_log << j.dump() << "\n";
      }

      if (++batches_since_val >= options.validation_frequency) {
        batches_since_val = 0;
        outcome.validations++;
        double metric;
        ValidationOutcome vo;
        if (options.validation_override) {
          metric = options.validation_override(outcome.steps);
        } else {
          vo = validate(pair.g, gen_vocab, val_set, options.validation_decode, stack,
                        options.vweights);
          metric = vo.metric;
        }
        bool improved = metric > es.best_metric;
        auto [next, stop_now] = early_stop_update(es, metric);
        es = next;
        if (improved) {
          es.best_step = outcome.steps;
          best_model = pair.g;
          if (!options.checkpoint_dir.empty())
            save_checkpoint(options.checkpoint_dir, outcome.steps, pair.g, gen_vocab,
                            engine.optimizer(), metric, options.config_hash);
        }
        if (val_log.is_open()) {
          json j;
          j["step"] = outcome.steps;
          j["metric"] = metric;
          j["mean_v"] = vo.mean_v;
          j["mean_s"] = vo.mean_s;
          j["mean_l"] = vo.mean_l;
          j["mean_kl"] = vo.mean_kl;
          j["mean_q"] = vo.mean_q;
          val_log << j.dump() << "\n";
        }
        if (stop_now) {
          outcome.stopped_early = true;
          stop = true;
          break;
        }
      }
      if (options.train.max_steps > 0 && outcome.steps >= options.train.max_steps) {
        stop = true;
        break;
      }
    }
  }

  if (es.has_best) pair.g = best_model;  // restore the best checkpoint
  outcome.best_metric = es.best_metric;
  outcome.best_step = es.best_step;
  return outcome;
}

}  // namespace mlat
