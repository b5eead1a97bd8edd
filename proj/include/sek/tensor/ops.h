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

#ifndef SEK_TENSOR_OPS_H_
#define SEK_TENSOR_OPS_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "sek/tensor/tensor.h"

// Forward kernels. Each op records itself on the tape when any input
// requires grad and gradient recording is enabled.
namespace sek {

// ---- linear algebra -------------------------------------------------------

// a [..., K] x b [K, N] -> [..., N].
template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b);

// a [..., M, K] x b [..., K, N] -> [..., M, N] with equal leading extents.
// With transpose_b, b is [..., N, K].
template <typename T>
Tensor<T> BatchMatMul(const Tensor<T>& a, const Tensor<T>& b,
                      bool transpose_b = false);

// ---- elementwise (numpy-style broadcasting on both operands) --------------

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Scale(const Tensor<T>& x, T factor);
template <typename T>
Tensor<T> AddScalar(const Tensor<T>& x, T value);

template <typename T>
Tensor<T> Relu(const Tensor<T>& x);
template <typename T>
Tensor<T> Sigmoid(const Tensor<T>& x);
template <typename T>
Tensor<T> Tanh(const Tensor<T>& x);
// x * sigmoid(x).
template <typename T>
Tensor<T> Swish(const Tensor<T>& x);
// Exact (erf) form.
template <typename T>
Tensor<T> Gelu(const Tensor<T>& x);
// Splits `axis` into halves (a, b) and returns a * sigmoid(b).
template <typename T>
Tensor<T> Glu(const Tensor<T>& x, int axis = -1);
template <typename T>
Tensor<T> Square(const Tensor<T>& x);
template <typename T>
Tensor<T> Sqrt(const Tensor<T>& x);
// max(x, floor); zero gradient where clamped.
template <typename T>
Tensor<T> ClampMin(const Tensor<T>& x, T floor);

// Inverted dropout. Identity when p == 0 or !training.
template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, T p, bool training, std::mt19937_64& rng);

// ---- softmax / normalization ----------------------------------------------

template <typename T>
Tensor<T> Softmax(const Tensor<T>& x, int axis = -1);

// Normalizes over the last axis. gamma/beta may be undefined (no affine).
template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, T eps = T(1e-5));

struct BatchNormOptions {
  bool training = true;
  double momentum = 0.1;
  double eps = 1e-5;
};

// Channels on the last axis; statistics over all other axes. In training
// mode the running buffers are updated in place (EMA with `momentum`,
// unbiased variance); in eval mode they are used for normalization.
template <typename T>
Tensor<T> BatchNorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, Tensor<T>& running_mean,
                    Tensor<T>& running_var, const BatchNormOptions& opts);

// x [B, T, C] with a per-channel kernel w [C, k] (k odd), zero "same"
// padding along T. bias [C] may be undefined.
template <typename T>
Tensor<T> DepthwiseConv1d(const Tensor<T>& x, const Tensor<T>& w,
                          const Tensor<T>& bias);

struct Conv2dOptions {
  int64_t stride_h = 1, stride_w = 1;
  int64_t pad_h = 0, pad_w = 0;
};

// x [B, Cin, H, W], w [Cout, Cin, kh, kw], bias [Cout] (may be undefined).
template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 const Conv2dOptions& opts);

// Non-overlapping 2x2 max pooling over the last two axes; odd tails dropped.
template <typename T>
Tensor<T> MaxPool2x2(const Tensor<T>& x);

// ---- reductions ----------------------------------------------------------

template <typename T>
Tensor<T> Sum(const Tensor<T>& x, std::vector<int> axes, bool keepdim = false);
template <typename T>
Tensor<T> SumAll(const Tensor<T>& x);
template <typename T>
Tensor<T> Mean(const Tensor<T>& x, std::vector<int> axes,
               bool keepdim = false);
// Population variance.
template <typename T>
Tensor<T> Variance(const Tensor<T>& x, std::vector<int> axes,
                   bool keepdim = false);

// ---- layout ---------------------------------------------------------------

template <typename T>
Tensor<T> Concat(const std::vector<Tensor<T>>& parts, int axis);
// One extent may be -1.
template <typename T>
Tensor<T> Reshape(const Tensor<T>& x, Shape shape);
template <typename T>
Tensor<T> Permute(const Tensor<T>& x, const std::vector<int>& perm);
// Cyclic shift along two axes: out[i + shift] = in[i] (mod extent).
template <typename T>
Tensor<T> Roll2d(const Tensor<T>& x, int axis0, int64_t shift0, int axis1,
                 int64_t shift1);
// Zero padding; `pads[a] = {before, after}` for every axis.
template <typename T>
Tensor<T> Pad(const Tensor<T>& x,
              const std::vector<std::pair<int64_t, int64_t>>& pads);
template <typename T>
Tensor<T> Slice(const Tensor<T>& x, int axis, int64_t start, int64_t length);
// Rows of a 2-D table: out[i] = table[index[i]].
template <typename T>
Tensor<T> IndexSelectRows(const Tensor<T>& table,
                          const std::vector<int64_t>& index);

// ---- attention helpers ----------------------------------------------------

// scores [G*R, H, N, N] + bias [G, Hb, N, N] where Hb is 1 or H; bias group
// g applies to every score block whose leading index is congruent to g mod
// G. Entries of -inf mask pairs out.
template <typename T>
Tensor<T> AddAttentionBias(const Tensor<T>& scores, const Tensor<T>& bias);

// x [..., Tq, 2Tq-1] indexed by relative offset -> [..., Tq, Tq] with
// out[i][j] = x[i][j - i + Tq - 1].
template <typename T>
Tensor<T> RelativeShift(const Tensor<T>& x);

// ---- losses -------------------------------------------------------------

// Divides each vector along the last axis by max(norm, eps).
template <typename T>
Tensor<T> NormalizeLastAxis(const Tensor<T>& x, T eps = T(1e-12));

// Mean over rows of -log softmax(logits)[label].
template <typename T>
Tensor<T> SoftmaxCrossEntropy(const Tensor<T>& logits,
                              const std::vector<int64_t>& labels);

}  // namespace sek

#endif  // SEK_TENSOR_OPS_H_
