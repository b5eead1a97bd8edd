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

#ifndef SEK_NN_LAYERS_H_
#define SEK_NN_LAYERS_H_

#include <cstdint>

#include "sek/nn/parameters.h"
#include "sek/tensor/ops.h"

namespace sek::nn {

// y = x W + b over the last axis; W is stored [in, out].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(ParamScope<T> scope, int64_t in, int64_t out, bool bias = true);

  Tensor<T> Forward(const Tensor<T>& x) const;

  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }
  int64_t in_features() const { return in_; }
  int64_t out_features() const { return out_; }

 private:
  int64_t in_ = 0, out_ = 0;
  Tensor<T> weight_, bias_;
};

template <typename T>
class LayerNormLayer {
 public:
  LayerNormLayer() = default;
  LayerNormLayer(ParamScope<T> scope, int64_t dim);
  Tensor<T> Forward(const Tensor<T>& x) const {
    return LayerNorm(x, gamma_, beta_, T(1e-5));
  }

 private:
  Tensor<T> gamma_, beta_;
};

// Channels-last batch normalization with running statistics as buffers.
template <typename T>
class BatchNormLayer {
 public:
  BatchNormLayer() = default;
  BatchNormLayer(ParamScope<T> scope, int64_t channels);
  Tensor<T> Forward(const Tensor<T>& x, bool training) const;

 private:
  Tensor<T> gamma_, beta_, running_mean_, running_var_;
};

// Depth-wise convolution over time on [B, T, C].
template <typename T>
class DepthwiseConv1dLayer {
 public:
  DepthwiseConv1dLayer() = default;
  DepthwiseConv1dLayer(ParamScope<T> scope, int64_t channels, int64_t kernel,
                       bool bias = true);
  Tensor<T> Forward(const Tensor<T>& x) const {
    return DepthwiseConv1d(x, weight_, bias_);
  }
  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  Tensor<T> weight_, bias_;
};

template <typename T>
class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  Conv2dLayer(ParamScope<T> scope, int64_t in_channels, int64_t out_channels,
              int64_t kernel, Conv2dOptions opts);
  Tensor<T> Forward(const Tensor<T>& x) const {
    return Conv2d(x, weight_, bias_, opts_);
  }
  const Conv2dOptions& options() const { return opts_; }
  Tensor<T>& weight() { return weight_; }

 private:
  Tensor<T> weight_, bias_;
  Conv2dOptions opts_;
};

}  // namespace sek::nn

#endif  // SEK_NN_LAYERS_H_
