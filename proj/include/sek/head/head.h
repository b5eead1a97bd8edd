// Copyright 2026  The sekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEK_HEAD_HEAD_H_
#define SEK_HEAD_HEAD_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sek/nn/layers.h"

namespace sek::head {

inline constexpr double kVarianceFloor = 1e-9;

// Attentive statistics pooling: [B, T, D] -> [B, 2D] (mean, std).
template <typename T>
class AttentiveStatsPooling {
 public:
  AttentiveStatsPooling() = default;
  AttentiveStatsPooling(nn::ParamScope<T> scope, int64_t input_dim,
                        int64_t bottleneck = 128);

  // `weights` (optional) receives the frame weights [B, T, 1].
  Tensor<T> Forward(const Tensor<T>& frames, Tensor<T>* weights = nullptr) const;

  nn::Linear<T>& projection() { return projection_; }
  Tensor<T>& attention_vector() { return vector_; }
  int64_t input_dim() const { return projection_.in_features(); }

 private:
  nn::Linear<T> projection_;
  Tensor<T> vector_;  // [A, 1]
};

// Pooling followed by the affine embedding layer.
template <typename T>
class EmbeddingHead {
 public:
  EmbeddingHead() = default;
  EmbeddingHead(nn::ParamScope<T> scope, int64_t frame_dim, int64_t embed_dim = 256,
                int64_t bottleneck = 128);

  // [B, T, D] -> [B, embed_dim].
  Tensor<T> Forward(const Tensor<T>& frames) const {
    return embedding_.Forward(pooling_.Forward(frames));
  }
  AttentiveStatsPooling<T>& pooling() { return pooling_; }
  nn::Linear<T>& embedding() { return embedding_; }

 private:
  AttentiveStatsPooling<T> pooling_;
  nn::Linear<T> embedding_;
};

// Cosine logits s * (cos - m * onehot(label)) against length-normalized
// class weights [K, E].
template <typename T>
Tensor<T> AMSoftmaxLogits(const Tensor<T>& embeddings, const Tensor<T>& weight,
                          const std::vector<int64_t>& labels, T margin, T scale);

template <typename T>
Tensor<T> AMSoftmaxLoss(const Tensor<T>& embeddings, const Tensor<T>& weight,
                        const std::vector<int64_t>& labels, T margin, T scale);

template <typename T>
class AMSoftmax {
 public:
  AMSoftmax() = default;
  AMSoftmax(nn::ParamScope<T> scope, int64_t embed_dim, int64_t classes,
            T margin = T(0.2), T scale = T(30));

  Tensor<T> Loss(const Tensor<T>& embeddings,
                 const std::vector<int64_t>& labels) const {
    return AMSoftmaxLoss(embeddings, weight_, labels, margin_, scale_);
  }
  Tensor<T>& weight() { return weight_; }

 private:
  Tensor<T> weight_;
  T margin_ = T(0.2), scale_ = T(30);
};

// a.b / (|a| |b|); 0 when either vector is zero.
double CosineScore(std::span<const float> a, std::span<const float> b);

// Utterance id -> embedding, in insertion order.
struct EmbeddingStore {
  std::vector<std::string> ids;
  std::vector<std::vector<float>> vectors;

  size_t size() const { return ids.size(); }
  // Throws ValidationError naming the id if absent.
  const std::vector<float>& Get(const std::string& id) const;
  void Add(std::string id, std::vector<float> v);

 private:
  void BuildIndex() const;
  mutable std::vector<size_t> order_;  // lazily built index sorted by id
};

// "SEKE", u32 dim, f32 data.
void WriteEmbeddingBinary(const std::string& path, std::span<const float> v);
std::vector<float> ReadEmbeddingBinary(const std::string& path);

// One line per utterance: id followed by dim floats.
void WriteEmbeddingText(const std::string& path, const EmbeddingStore& store);
EmbeddingStore ReadEmbeddingText(const std::string& path);

}  // namespace sek::head

#endif  // SEK_HEAD_HEAD_H_
