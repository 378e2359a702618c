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

#ifndef MLAT_MODEL_IO_HPP_
#define MLAT_MODEL_IO_HPP_

#include <string>
#include <utility>
#include <vector>

#include "mlat/models.hpp"
#include "mlat/nn.hpp"
#include "mlat/vocab.hpp"

namespace mlat {

// Named-tensor archive. Values are stored as float64 regardless of the
// in-memory precision, so checkpoints are precision-portable.
struct TensorFile {
  std::string type;
  std::string meta_json;
  std::vector<std::pair<std::string, Mat<double>>> tensors;
};

void write_tensor_file(const std::string& path, const TensorFile& tf);
TensorFile read_tensor_file(const std::string& path);

struct GeneratorBundle {
  nn::Seq2SeqF model;
  Vocabulary vocab;
};

void save_generator(const nn::Seq2SeqF& model, const Vocabulary& vocab, const std::string& path);
GeneratorBundle load_generator(const std::string& path);

struct ClassifierBundle {
  nn::MlpClassifierF net;
  Vocabulary vocab;
  std::vector<std::string> labels;  // class labels or language codes
  std::string kind;                 // "victim" | "language-detector"
};

void save_classifier(const nn::MlpClassifierF& net, const Vocabulary& vocab,
                     const std::vector<std::string>& labels, const std::string& kind,
                     const std::string& path);
ClassifierBundle load_classifier(const std::string& path);

struct EmbedderBundle {
  nn::MeanEmbedderF net;
  Vocabulary vocab;
};

void save_embedder(const nn::MeanEmbedderF& net, const Vocabulary& vocab,
                   const std::string& path);
EmbedderBundle load_embedder(const std::string& path);

void save_adafactor(const nn::Adafactor<float>& opt, const std::string& path);
// Call after register_params; restores moments and the step counter.
void load_adafactor(nn::Adafactor<float>& opt, const std::string& path);

// Vocabulary <-> JSON text (used inside model metadata).
std::string vocab_to_json(const Vocabulary& vocab);
Vocabulary vocab_from_json(const std::string& text);

}  // namespace mlat

#endif  // MLAT_MODEL_IO_HPP_
