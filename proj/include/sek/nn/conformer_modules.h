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

#ifndef SEK_NN_CONFORMER_MODULES_H_
#define SEK_NN_CONFORMER_MODULES_H_

#include <cstdint>

#include "sek/nn/layers.h"

namespace sek::nn {

// Squeeze-and-excitation over the channel axis of [B, T, C]: the time-mean
// of each channel drives a C -> C/r -> C bottleneck whose sigmoid output
// rescales that channel.
template <typename T>
class SEBlock {
 public:
  SEBlock() = default;
  SEBlock(ParamScope<T> scope, int64_t channels, int64_t reduction = 16);

  Tensor<T> Forward(const Tensor<T>& x) const;
  // Per-sequence channel gates [B, C], each in (0, 1).
  Tensor<T> Gates(const Tensor<T>& x) const;

  Linear<T>& squeeze() { return squeeze_; }
  Linear<T>& excite() { return excite_; }

 private:
  int64_t channels_ = 0;
  Linear<T> squeeze_, excite_;
};

struct LocalityFFNConfig {
  int64_t model_dim = 0;
  int64_t hidden_dim = 0;
  int64_t dw_kernel = 3;
  int64_t se_reduction = 16;
  bool enable_dwconv = true;
  bool enable_se = true;
};

// Feed-forward network with locality: LayerNorm -> Linear(d, h) ->
// LayerNorm -> [depth-wise conv over time] -> [SE] -> Swish -> Linear(h, d).
// Disabled stages own no parameters.
template <typename T>
class LocalityEnhancedFFN {
 public:
  LocalityEnhancedFFN() = default;
  LocalityEnhancedFFN(ParamScope<T> scope, const LocalityFFNConfig& cfg);

  Tensor<T> Forward(const Tensor<T>& x) const;

  const LocalityFFNConfig& config() const { return cfg_; }
  Linear<T>& expand() { return expand_; }
  Linear<T>& project() { return project_; }
  DepthwiseConv1dLayer<T>& dwconv() { return dwconv_; }
  SEBlock<T>& se() { return se_; }

 private:
  LocalityFFNConfig cfg_;
  LayerNormLayer<T> input_norm_, hidden_norm_;
  Linear<T> expand_, project_;
  DepthwiseConv1dLayer<T> dwconv_;
  SEBlock<T> se_;
};

// LayerNorm -> pointwise d->2d -> GLU -> depth-wise conv (same padding) ->
// BatchNorm -> Swish -> pointwise d->d.
template <typename T>
class ConformerConvModule {
 public:
  ConformerConvModule() = default;
  ConformerConvModule(ParamScope<T> scope, int64_t model_dim, int64_t kernel);

  Tensor<T> Forward(const Tensor<T>& x, bool training) const;

  Linear<T>& pointwise_out() { return pointwise_out_; }

 private:
  LayerNormLayer<T> norm_;
  Linear<T> pointwise_in_, pointwise_out_;
  DepthwiseConv1dLayer<T> dwconv_;
  BatchNormLayer<T> batch_norm_;
};

}  // namespace sek::nn

#endif  // SEK_NN_CONFORMER_MODULES_H_
