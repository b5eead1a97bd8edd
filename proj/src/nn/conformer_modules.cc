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

#include "sek/nn/conformer_modules.h"

namespace sek::nn {

template <typename T>
SEBlock<T>::SEBlock(ParamScope<T> scope, int64_t channels, int64_t reduction)
    : channels_(channels) {
  Check<ValidationError>(reduction > 0 && channels % reduction == 0,
                         "SE block: channels ", channels,
                         " not divisible by reduction ", reduction);
  squeeze_ = Linear<T>(scope.Sub("squeeze"), channels, channels / reduction);
  excite_ = Linear<T>(scope.Sub("excite"), channels / reduction, channels);
}

template <typename T>
Tensor<T> SEBlock<T>::Gates(const Tensor<T>& x) const {
  Check<ShapeError>(x.ndim() == 3 && x.dim(2) == channels_, "SE block expects [B, T, ",
                    channels_, "], got ", ShapeToString(x.shape()));
  Tensor<T> squeezed = Mean(x, {1});  // [B, C]
  return Sigmoid(excite_.Forward(Relu(squeeze_.Forward(squeezed))));
}

template <typename T>
Tensor<T> SEBlock<T>::Forward(const Tensor<T>& x) const {
  Tensor<T> gates = Gates(x);
  return Mul(x, Reshape(gates, {x.dim(0), 1, channels_}));
}

template <typename T>
LocalityEnhancedFFN<T>::LocalityEnhancedFFN(ParamScope<T> scope,
                                            const LocalityFFNConfig& cfg)
    : cfg_(cfg) {
  input_norm_ = LayerNormLayer<T>(scope.Sub("input_norm"), cfg.model_dim);
  expand_ = Linear<T>(scope.Sub("linear1"), cfg.model_dim, cfg.hidden_dim);
  hidden_norm_ = LayerNormLayer<T>(scope.Sub("hidden_norm"), cfg.hidden_dim);
  if (cfg.enable_dwconv)
    dwconv_ = DepthwiseConv1dLayer<T>(scope.Sub("dwconv"), cfg.hidden_dim,
                                      cfg.dw_kernel);
  if (cfg.enable_se)
    se_ = SEBlock<T>(scope.Sub("se"), cfg.hidden_dim, cfg.se_reduction);
  project_ = Linear<T>(scope.Sub("linear2"), cfg.hidden_dim, cfg.model_dim);
}

template <typename T>
Tensor<T> LocalityEnhancedFFN<T>::Forward(const Tensor<T>& x) const {
  Tensor<T> h = hidden_norm_.Forward(expand_.Forward(input_norm_.Forward(x)));
  if (cfg_.enable_dwconv) h = dwconv_.Forward(h);
  if (cfg_.enable_se) h = se_.Forward(h);
  return project_.Forward(Swish(h));
}

template <typename T>
ConformerConvModule<T>::ConformerConvModule(ParamScope<T> scope,
                                            int64_t model_dim, int64_t kernel) {
  norm_ = LayerNormLayer<T>(scope.Sub("norm"), model_dim);
  pointwise_in_ = Linear<T>(scope.Sub("pointwise1"), model_dim, 2 * model_dim);
  // Batch norm follows, so a bias here would be redundant.
  dwconv_ = DepthwiseConv1dLayer<T>(scope.Sub("dwconv"), model_dim, kernel,
                                    /*bias=*/false);
  batch_norm_ = BatchNormLayer<T>(scope.Sub("batch_norm"), model_dim);
  pointwise_out_ = Linear<T>(scope.Sub("pointwise2"), model_dim, model_dim);
}

template <typename T>
Tensor<T> ConformerConvModule<T>::Forward(const Tensor<T>& x,
                                          bool training) const {
  Tensor<T> h = Glu(pointwise_in_.Forward(norm_.Forward(x)), -1);
  h = batch_norm_.Forward(dwconv_.Forward(h), training);
  return pointwise_out_.Forward(Swish(h));
}

template class SEBlock<float>;
template class SEBlock<double>;
template class LocalityEnhancedFFN<float>;
template class LocalityEnhancedFFN<double>;
template class ConformerConvModule<float>;
template class ConformerConvModule<double>;

}  // namespace sek::nn
