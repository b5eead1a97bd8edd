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

#ifndef SEK_NN_ATTENTION_H_
#define SEK_NN_ATTENTION_H_

#include <cstdint>
#include <vector>

#include "sek/nn/layers.h"

namespace sek::nn {

enum class RelativePosition {
  kNone,
  // Sinusoidal relative encoding with per-head content/position biases.
  kConformerRel,
  // Learnable per-head bias indexed by 2-D offsets inside an M x M window.
  kWindowBias,
};

struct MSAConfig {
  int64_t model_dim = 0;
  int64_t heads = 1;
  RelativePosition relative_position = RelativePosition::kNone;
  int64_t window = 0;  // window side M, kWindowBias only

  int64_t head_dim() const { return model_dim / heads; }
  void Validate() const;
};

// Rows r = 0..2T-2 encode the relative offset r - (T - 1).
template <typename T>
Tensor<T> RelativeSinusoidalEncoding(int64_t length, int64_t dim);

// Index into the (2M-1)^2 bias table for every (query, key) pair of an
// M x M window in raster order.
std::vector<int64_t> WindowRelativeIndex(int64_t window);

// Scaled dot-product multi-head self-attention with an output projection.
template <typename T>
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(ParamScope<T> scope, const MSAConfig& cfg);

  // x: [B, N, d]. mask (optional): [G, 1 or heads, N, N] additive bias with
  // B % G == 0, group g applied to batch items b with b % G == g. If
  // `attention` is non-null it receives the post-softmax weights
  // [B, heads, N, N].
  Tensor<T> Forward(const Tensor<T>& x, const Tensor<T>* mask = nullptr,
                    Tensor<T>* attention = nullptr) const;

  const MSAConfig& config() const { return cfg_; }
  Linear<T>& output() { return out_; }

 private:
  MSAConfig cfg_;
  Linear<T> q_, k_, v_, out_;
  Linear<T> pos_;
  Tensor<T> pos_bias_u_, pos_bias_v_;
  Tensor<T> window_table_;
  std::vector<int64_t> window_index_;
};

}  // namespace sek::nn

#endif  // SEK_NN_ATTENTION_H_
