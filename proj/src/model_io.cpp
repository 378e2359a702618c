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

#include "mlat/model_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace mlat {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'L', 'A', 'T', 'T', 'F', '0', '1'};

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& in, const std::string& path) {
  uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw DataError("truncated tensor file: " + path);
  return v;
}

void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& in, const std::string& path) {
  uint32_t n = read_u32(in, path);
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw DataError("truncated tensor file: " + path);
  return s;
}

template <typename T>
void load_params_from(const TensorFile& tf, std::vector<nn::Param<T>*> params,
                      const std::string& path) {
  for (nn::Param<T>* p : params) {
    const Mat<double>* found = nullptr;
    for (const auto& [name, m] : tf.tensors)
      if (name == p->name) {
        found = &m;
        break;
      }
    if (!found) throw DataError(path + ": missing tensor " + p->name);
    if (found->rows != p->w.rows || found->cols != p->w.cols)
      throw DataError(path + ": tensor " + p->name + " has wrong shape");
    p->w = found->template cast<T>();
  }
}

}  // namespace

void write_tensor_file(const std::string& path, const TensorFile& tf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write tensor file: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_str(out, tf.type);
  write_str(out, tf.meta_json);
  write_u32(out, static_cast<uint32_t>(tf.tensors.size()));
  for (const auto& [name, m] : tf.tensors) {
    write_str(out, name);
    write_u32(out, static_cast<uint32_t>(m.rows));
    write_u32(out, static_cast<uint32_t>(m.cols));
    out.write(reinterpret_cast<const char*>(m.a.data()),
              static_cast<std::streamsize>(m.a.size() * sizeof(double)));
  }
  if (!out) throw DataError("write failed: " + path);
}

TensorFile read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor file: " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw DataError("not a tensor file: " + path);
  TensorFile tf;
  tf.type = read_str(in, path);
  tf.meta_json = read_str(in, path);
  uint32_t n = read_u32(in, path);
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = read_str(in, path);
    uint32_t rows = read_u32(in, path);
    uint32_t cols = read_u32(in, path);
    Mat<double> m(static_cast<int>(rows), static_cast<int>(cols));
    if (!in.read(reinterpret_cast<char*>(m.a.data()),
                 static_cast<std::streamsize>(m.a.size() * sizeof(double))))
      throw DataError("truncated tensor file: " + path);
    tf.tensors.emplace_back(std::move(name), std::move(m));
  }
  return tf;
}

std::string vocab_to_json(const Vocabulary& vocab) {
  json j;
  j["scheme"] = to_string(vocab.scheme());
  j["tokens"] = vocab.tokens();
  j["special_tokens"] = vocab.special_roles();
  j["extra_id_tokens"] =
      std::vector<std::string>(vocab.extra_id_tokens().begin(), vocab.extra_id_tokens().end());
  return j.dump();
}

Vocabulary vocab_from_json(const std::string& text) {
  json j = json::parse(text);
  std::string scheme_str = j.at("scheme").get<std::string>();
  VocabScheme scheme = scheme_str == "start-of-word-marked" ? VocabScheme::kStartOfWordMarked
                                                            : VocabScheme::kContinuationMarked;
  std::set<std::string> extra;
  for (const auto& t : j.at("extra_id_tokens")) extra.insert(t.get<std::string>());
  return Vocabulary(j.at("tokens").get<std::vector<std::string>>(), scheme,
                    j.at("special_tokens").get<std::map<std::string, std::string>>(), extra);
}

void save_generator(const nn::Seq2SeqF& model, const Vocabulary& vocab, const std::string& path) {
  TensorFile tf;
  tf.type = "seq2seq-gru";
  json meta;
  meta["vocab"] = json::parse(vocab_to_json(vocab));
  meta["arch"] = {{"vocab", model.arch().vocab},
                  {"emb", model.arch().emb},
                  {"hidden", model.arch().hidden}};
  meta["decoder_start"] = model.decoder_start();
  meta["eos"] = model.eos();
  tf.meta_json = meta.dump();
  for (const nn::Param<float>* p : model.params())
    tf.tensors.emplace_back(p->name, p->w.cast<double>());
  write_tensor_file(path, tf);
}

GeneratorBundle load_generator(const std::string& path) {
  TensorFile tf = read_tensor_file(path);
  if (tf.type != "seq2seq-gru") throw DataError(path + ": expected a generator checkpoint");
  json meta = json::parse(tf.meta_json);
  nn::Seq2SeqF::Arch arch;
  arch.vocab = meta.at("arch").at("vocab").get<int>();
  arch.emb = meta.at("arch").at("emb").get<int>();
  arch.hidden = meta.at("arch").at("hidden").get<int>();
  Rng rng(0);
  nn::Seq2SeqF model(arch, meta.at("decoder_start").get<int>(), meta.at("eos").get<int>(), rng);
  load_params_from(tf, model.params(), path);
  return GeneratorBundle{std::move(model), vocab_from_json(meta.at("vocab").dump())};
}

void save_classifier(const nn::MlpClassifierF& net, const Vocabulary& vocab,
                     const std::vector<std::string>& labels, const std::string& kind,
                     const std::string& path) {
  TensorFile tf;
  tf.type = "mlp-classifier";
  json meta;
  meta["vocab"] = json::parse(vocab_to_json(vocab));
  meta["arch"] = {{"vocab", net.arch().vocab},
                  {"emb", net.arch().emb},
                  {"hidden", net.arch().hidden},
                  {"classes", net.arch().classes}};
  meta["labels"] = labels;
  meta["kind"] = kind;
  tf.meta_json = meta.dump();
  for (const nn::Param<float>* p : net.params()) tf.tensors.emplace_back(p->name, p->w.cast<double>());
  write_tensor_file(path, tf);
}

ClassifierBundle load_classifier(const std::string& path) {
  TensorFile tf = read_tensor_file(path);
  if (tf.type != "mlp-classifier") throw DataError(path + ": expected a classifier checkpoint");
  json meta = json::parse(tf.meta_json);
  nn::MlpClassifierF::Arch arch;
  arch.vocab = meta.at("arch").at("vocab").get<int>();
  arch.emb = meta.at("arch").at("emb").get<int>();
  arch.hidden = meta.at("arch").at("hidden").get<int>();
  arch.classes = meta.at("arch").at("classes").get<int>();
  Rng rng(0);
  nn::MlpClassifierF net(arch, rng);
  load_params_from(tf, net.params(), path);
  return ClassifierBundle{std::move(net), vocab_from_json(meta.at("vocab").dump()),
                          meta.at("labels").get<std::vector<std::string>>(),
                          meta.at("kind").get<std::string>()};
}

void save_embedder(const nn::MeanEmbedderF& net, const Vocabulary& vocab,
                   const std::string& path) {
  TensorFile tf;
  tf.type = "mean-embedder";
  json meta;
  meta["vocab"] = json::parse(vocab_to_json(vocab));
  meta["arch"] = {{"vocab", net.arch().vocab}, {"dim", net.arch().dim}};
  tf.meta_json = meta.dump();
  for (const nn::Param<float>* p : net.params()) tf.tensors.emplace_back(p->name, p->w.cast<double>());
  write_tensor_file(path, tf);
}

EmbedderBundle load_embedder(const std::string& path) {
  TensorFile tf = read_tensor_file(path);
  if (tf.type != "mean-embedder") throw DataError(path + ": expected an embedder checkpoint");
  json meta = json::parse(tf.meta_json);
  nn::MeanEmbedderF::Arch arch;
  arch.vocab = meta.at("arch").at("vocab").get<int>();
  arch.dim = meta.at("arch").at("dim").get<int>();
  Rng rng(0);
  nn::MeanEmbedderF net(arch, rng);
  load_params_from(tf, net.params(), path);
  return EmbedderBundle{std::move(net), vocab_from_json(meta.at("vocab").dump())};
}

void save_adafactor(const nn::Adafactor<float>& opt, const std::string& path) {
  TensorFile tf;
  tf.type = "adafactor-state";
  json meta;
  meta["step"] = opt.step_count();
  tf.meta_json = meta.dump();
  const auto& params = opt.registered();
  const auto& states = opt.states();
  for (size_t i = 0; i < params.size(); ++i) {
    const std::string& n = params[i]->name;
    if (!states[i].row.empty()) {
      tf.tensors.emplace_back(n + ".row", states[i].row.cast<double>());
      tf.tensors.emplace_back(n + ".col", states[i].col.cast<double>());
    } else {
      tf.tensors.emplace_back(n + ".full", states[i].full.cast<double>());
    }
  }
  write_tensor_file(path, tf);
}

void load_adafactor(nn::Adafactor<float>& opt, const std::string& path) {
  TensorFile tf = read_tensor_file(path);
  if (tf.type != "adafactor-state") throw DataError(path + ": expected optimizer state");
  json meta = json::parse(tf.meta_json);
  opt.set_step_count(meta.at("step").get<int64_t>());
  auto find = [&](const std::string& name) -> const Mat<double>* {
    for (const auto& [n, m] : tf.tensors)
      if (n == name) return &m;
    return nullptr;
  };
  const auto& params = opt.registered();
  auto& states = opt.states();
  for (size_t i = 0; i < params.size(); ++i) {
    const std::string& n = params[i]->name;
    if (!states[i].row.empty()) {
      const Mat<double>*r = find(n + ".row"), *c = find(n + ".col");
      if (!r || !c) throw DataError(path + ": missing optimizer state for " + n);
      states[i].row = r->cast<float>();
      states[i].col = c->cast<float>();
    } else {
      const Mat<double>* f = find(n + ".full");
      if (!f) throw DataError(path + ": missing optimizer state for " + n);
      states[i].full = f->cast<float>();
    }
  }
}

}  // namespace mlat
