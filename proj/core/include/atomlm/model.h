// Copyright 2026 The atomlm Authors.
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

#ifndef ATOMLM_MODEL_H_
#define ATOMLM_MODEL_H_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "atomlm/tokenizer.h"

namespace atomlm {

struct ModelConfig {
  int hidden = 64;       // width of every hidden layer
  int layers = 2;
  int heads = 4;
  int ff_width = 128;
  int max_seq_len = 32;
  int vocab_size = 0;
  uint64_t seed = 0;

  // Throws Error naming the violated field.
  void Validate() const;
  bool operator==(const ModelConfig &) const = default;
};

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Biases and layer-norm vectors are stored as 1 x n matrices so every
// parameter is the same tensor type.
template <typename T>
struct LayerParams {
  Matrix<T> query_weight, query_bias;
  Matrix<T> key_weight, key_bias;
  Matrix<T> value_weight, value_bias;
  Matrix<T> attn_out_weight, attn_out_bias;
  Matrix<T> attn_norm_gain, attn_norm_bias;
  Matrix<T> ff_in_weight, ff_in_bias;
  Matrix<T> ff_out_weight, ff_out_bias;
  Matrix<T> ff_norm_gain, ff_norm_bias;
};

template <typename T>
struct ModelParams {
  Matrix<T> token_embeddings;     // v x l
  Matrix<T> position_embeddings;  // max_seq_len x l
  Matrix<T> embedding_norm_gain, embedding_norm_bias;
  std::vector<LayerParams<T>> layers;
  Matrix<T> output_projection;    // v x l
  Matrix<T> output_bias;          // 1 x v

  // Visits every tensor in a fixed order with a stable name.
  template <typename Fn>
  void ForEach(Fn &&fn) {
    VisitAll(*this, fn);
  }
  template <typename Fn>
  void ForEach(Fn &&fn) const {
    VisitAll(*this, fn);
  }

  // Zero tensors with the same shapes.
  ModelParams ZerosLike() const;

 private:
  template <typename Self, typename Fn>
  static void VisitAll(Self &self, Fn &fn) {
    fn("token_embeddings", self.token_embeddings);
    fn("position_embeddings", self.position_embeddings);
    fn("embedding_norm.gain", self.embedding_norm_gain);
    fn("embedding_norm.bias", self.embedding_norm_bias);
    for (size_t i = 0; i < self.layers.size(); ++i) {
      auto &layer = self.layers[i];
      const std::string p = "layers." + std::to_string(i) + ".";
      fn(p + "query.weight", layer.query_weight);
      fn(p + "query.bias", layer.query_bias);
      fn(p + "key.weight", layer.key_weight);
      fn(p + "key.bias", layer.key_bias);
      fn(p + "value.weight", layer.value_weight);
      fn(p + "value.bias", layer.value_bias);
      fn(p + "attn_out.weight", layer.attn_out_weight);
      fn(p + "attn_out.bias", layer.attn_out_bias);
      fn(p + "attn_norm.gain", layer.attn_norm_gain);
      fn(p + "attn_norm.bias", layer.attn_norm_bias);
      fn(p + "ff_in.weight", layer.ff_in_weight);
      fn(p + "ff_in.bias", layer.ff_in_bias);
      fn(p + "ff_out.weight", layer.ff_out_weight);
      fn(p + "ff_out.bias", layer.ff_out_bias);
      fn(p + "ff_norm.gain", layer.ff_norm_gain);
      fn(p + "ff_norm.bias", layer.ff_norm_bias);
    }
    fn("output_projection", self.output_projection);
    fn("output_bias", self.output_bias);
  }
};

// Transformer-encoder masked language model with untied input and output
// embeddings. Logits are encoder states times the output projection plus a
// bias, with no extra head transform in between.
template <typename T>
struct BasicModel {
  ModelConfig config;
  ModelParams<T> params;

  template <typename U>
  BasicModel<U> Cast() const;
};

using MlmModel = BasicModel<float>;

struct MaskTarget {
  size_t position = 0;
  TokenId id = kUnkId;
  bool operator==(const MaskTarget &) const = default;
};

// Scaled-normal initialization, bit-identical for equal configs.
template <typename T>
BasicModel<T> InitModel(const ModelConfig &config);

// Encoder output states, n x l.
template <typename T>
Matrix<T> EncodeSequence(const BasicModel<T> &model, const TokenSequence &seq);

// Logits over the vocabulary at every position, n x v. Attention is
// bidirectional; PAD positions are excluded as attention keys.
template <typename T>
Matrix<T> ForwardLogits(const BasicModel<T> &model, const TokenSequence &seq);

// Mean cross-entropy over the given target positions.
template <typename T>
T MlmLoss(const BasicModel<T> &model, const TokenSequence &seq,
          std::span<const MaskTarget> targets);

// Mean cross-entropy over seq.mask_positions, one target id per mask.
template <typename T>
T MlmLoss(const BasicModel<T> &model, const TokenSequence &seq,
          std::span<const TokenId> target_ids);

// Loss plus gradient. The gradient of the loss, times weight, is added into
// *grad, which must have the model's shapes.
template <typename T>
T LossAndGradient(const BasicModel<T> &model, const TokenSequence &seq,
                  std::span<const MaskTarget> targets, T weight,
                  ModelParams<T> *grad);

// Grows the vocabulary to new_v rows. Existing rows are copied bit-exactly;
// new rows are zero.
template <typename T>
BasicModel<T> ResizeVocab(const BasicModel<T> &model, int new_v);

// True when every parameter is finite.
template <typename T>
bool AllFinite(const ModelParams<T> &params);

// SHA-256 over all tensor bytes in visiting order.
std::string ModelChecksum(const MlmModel &model);
// SHA-256 over the first `rows` rows of a matrix.
std::string RowsDigest(const Matrix<float> &m, int rows);

// Softmax of a vector computed in double precision.
std::vector<double> Softmax(std::span<const double> logits);

}  // namespace atomlm

#endif  // ATOMLM_MODEL_H_
