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

#include "sek/nn/layers.h"

#include <cmath>

namespace sek::nn {

template <typename T>
Linear<T>::Linear(ParamScope<T> scope, int64_t in, int64_t out, bool bias)
    : in_(in), out_(out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = scope.Uniform("weight", {in, out}, bound);
  if (bias) bias_ = scope.Uniform("bias", {out}, bound);
}

template <typename T>
Tensor<T> Linear<T>::Forward(const Tensor<T>& x) const {
  Tensor<T> y = MatMul(x, weight_);
  return bias_.defined() ? Add(y, bias_) : y;
}

template <typename T>
LayerNormLayer<T>::LayerNormLayer(ParamScope<T> scope, int64_t dim) {
  gamma_ = scope.Constant("gamma", {dim}, T(1));
  beta_ = scope.Constant("beta", {dim}, T(0));
}

template <typename T>
BatchNormLayer<T>::BatchNormLayer(ParamScope<T> scope, int64_t channels) {
  gamma_ = scope.Constant("gamma", {channels}, T(1));
  beta_ = scope.Constant("beta", {channels}, T(0));
  running_mean_ = scope.Buffer("running_mean", {channels}, T(0));
  running_var_ = scope.Buffer("running_var", {channels}, T(1));
}

template <typename T>
Tensor<T> BatchNormLayer<T>::Forward(const Tensor<T>& x, bool training) const {
  Tensor<T> mean = running_mean_, var = running_var_;
  BatchNormOptions opts;
  opts.training = training;
  return BatchNorm(x, gamma_, beta_, mean, var, opts);
}

template <typename T>
DepthwiseConv1dLayer<T>::DepthwiseConv1dLayer(ParamScope<T> scope,
                                              int64_t channels,
                                              int64_t kernel, bool bias) {
  Check<ValidationError>(kernel > 0 && kernel % 2 == 1,
                         "depth-wise kernel must be odd, got ", kernel);
  const double bound = 1.0 / std::sqrt(static_cast<double>(kernel));
  weight_ = scope.Uniform("weight", {channels, kernel}, bound);
  if (bias) bias_ = scope.Uniform("bias", {channels}, bound);
}

template <typename T>
Conv2dLayer<T>::Conv2dLayer(ParamScope<T> scope, int64_t in_channels,
                            int64_t out_channels, int64_t kernel,
                            Conv2dOptions opts)
    : opts_(opts) {
  const double bound =
      1.0 / std::sqrt(static_cast<double>(in_channels * kernel * kernel));
  weight_ =
      scope.Uniform("weight", {out_channels, in_channels, kernel, kernel}, bound);
  bias_ = scope.Uniform("bias", {out_channels}, bound);
}

template class Linear<float>;
template class Linear<double>;
template class LayerNormLayer<float>;
template class LayerNormLayer<double>;
template class BatchNormLayer<float>;
template class BatchNormLayer<double>;
template class DepthwiseConv1dLayer<float>;
template class DepthwiseConv1dLayer<double>;
template class Conv2dLayer<float>;
template class Conv2dLayer<double>;

}  // namespace sek::nn
