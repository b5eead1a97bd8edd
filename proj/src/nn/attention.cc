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

#include "sek/nn/attention.h"

#include <cmath>

namespace sek::nn {

void MSAConfig::Validate() const {
  Check<ValidationError>(model_dim > 0 && heads > 0,
                         "attention needs positive model_dim and heads");
  Check<ValidationError>(model_dim % heads == 0, "attention: model_dim ", model_dim,
                         " not divisible by heads ", heads);
  if (relative_position == RelativePosition::kWindowBias)
    Check<ValidationError>(window > 0, "window bias needs window > 0");
}

template <typename T>
Tensor<T> RelativeSinusoidalEncoding(int64_t length, int64_t dim) {
  const int64_t rows = 2 * length - 1;
  std::vector<T> pe(rows * dim);
  for (int64_t r = 0; r < rows; ++r) {
    const double pos = static_cast<double>(r - (length - 1));
    for (int64_t i = 0; i < dim; i += 2) {
      const double freq =
          std::exp(-static_cast<double>(i) * std::log(10000.0) / dim);
      pe[r * dim + i] = static_cast<T>(std::sin(pos * freq));
      if (i + 1 < dim) pe[r * dim + i + 1] = static_cast<T>(std::cos(pos * freq));
    }
  }
  return Tensor<T>({rows, dim}, std::move(pe));
}

std::vector<int64_t> WindowRelativeIndex(int64_t window) {
  const int64_t n = window * window;
  const int64_t span = 2 * window - 1;
  std::vector<int64_t> index(n * n);
  for (int64_t q = 0; q < n; ++q)
    for (int64_t k = 0; k < n; ++k) {
      const int64_t dy = q / window - k / window + window - 1;
      const int64_t dx = q % window - k % window + window - 1;
      index[q * n + k] = dy * span + dx;
    }
  return index;
}

template <typename T>
MultiHeadSelfAttention<T>::MultiHeadSelfAttention(ParamScope<T> scope,
                                                  const MSAConfig& cfg)
    : cfg_(cfg) {
  cfg_.Validate();
  const int64_t d = cfg.model_dim;
  q_ = Linear<T>(scope.Sub("query"), d, d);
  // A key bias shifts every score of a query equally and cancels in the
  // softmax, so it is omitted.
  k_ = Linear<T>(scope.Sub("key"), d, d, /*bias=*/false);
  v_ = Linear<T>(scope.Sub("value"), d, d);
  out_ = Linear<T>(scope.Sub("output"), d, d);
  switch (cfg.relative_position) {
    case RelativePosition::kConformerRel: {
      pos_ = Linear<T>(scope.Sub("pos"), d, d, /*bias=*/false);
      const double bound = std::sqrt(6.0 / (cfg.heads + cfg.head_dim()));
      pos_bias_u_ = scope.Uniform("pos_bias_u", {cfg.heads, 1, cfg.head_dim()},
                                  bound);
      pos_bias_v_ = scope.Uniform("pos_bias_v", {cfg.heads, 1, cfg.head_dim()},
                                  bound);
      break;
    }
    case RelativePosition::kWindowBias: {
      const int64_t span = 2 * cfg.window - 1;
      window_table_ = scope.Normal("relative_bias", {span * span, cfg.heads}, 0.02);
      window_index_ = WindowRelativeIndex(cfg.window);
      break;
    }
    case RelativePosition::kNone:
      break;
  }
}

template <typename T>
Tensor<T> MultiHeadSelfAttention<T>::Forward(const Tensor<T>& x,
                                             const Tensor<T>* mask,
                                             Tensor<T>* attention) const {
  Check<ShapeError>(x.ndim() == 3 && x.dim(2) == cfg_.model_dim,
                    "attention expects [B, N, ", cfg_.model_dim, "], got ",
                    ShapeToString(x.shape()));
  const int64_t b = x.dim(0), n = x.dim(1), h = cfg_.heads,
                dk = cfg_.head_dim();
  auto split_heads = [&](const Tensor<T>& t) {
    return Permute(Reshape(t, {b, n, h, dk}), {0, 2, 1, 3});
  };
  Tensor<T> q = split_heads(q_.Forward(x));
  Tensor<T> k = split_heads(k_.Forward(x));
  Tensor<T> v = split_heads(v_.Forward(x));
  const T scale = T(1) / std::sqrt(static_cast<T>(dk));

  Tensor<T> scores;
  if (cfg_.relative_position == RelativePosition::kConformerRel) {
    Tensor<T> content = BatchMatMul(Add(q, pos_bias_u_), k, true);
    // Position term: (q + v_bias) against every relative offset, then
    // re-indexed so that column j holds offset j - i.
    Tensor<T> pe = RelativeSinusoidalEncoding<T>(n, cfg_.model_dim);
    Tensor<T> p = Permute(Reshape(pos_.Forward(pe), {2 * n - 1, h, dk}), {1, 0, 2});
    Tensor<T> qv = Permute(Add(q, pos_bias_v_), {1, 0, 2, 3});  // [h, b, n, dk]
    Tensor<T> pos_scores =
        BatchMatMul(Reshape(qv, {h, b * n, dk}), p, true);  // [h, b*n, 2n-1]
    pos_scores = Permute(Reshape(pos_scores, {h, b, n, 2 * n - 1}), {1, 0, 2, 3});
    scores = Scale(Add(content, RelativeShift(pos_scores)), scale);
  } else {
    scores = Scale(BatchMatMul(q, k, true), scale);
  }
  if (cfg_.relative_position == RelativePosition::kWindowBias) {
    Check<ShapeError>(n == cfg_.window * cfg_.window, "window attention: axis 1 (",
                      n, ") must equal window^2 = ", cfg_.window * cfg_.window);
    Tensor<T> bias = IndexSelectRows(window_table_, window_index_);  // [n*n, h]
    bias = Reshape(Permute(Reshape(bias, {n, n, h}), {2, 0, 1}), {1, h, n, n});
    scores = AddAttentionBias(scores, bias);
  }
  if (mask != nullptr) scores = AddAttentionBias(scores, *mask);
  Tensor<T> attn = Softmax(scores, -1);
  if (attention != nullptr) *attention = attn;
  Tensor<T> ctx = BatchMatMul(attn, v);  // [b, h, n, dk]
  ctx = Reshape(Permute(ctx, {0, 2, 1, 3}), {b, n, cfg_.model_dim});
  return out_.Forward(ctx);
}

template Tensor<float> RelativeSinusoidalEncoding(int64_t, int64_t);
template Tensor<double> RelativeSinusoidalEncoding(int64_t, int64_t);
template class MultiHeadSelfAttention<float>;
template class MultiHeadSelfAttention<double>;

}  // namespace sek::nn
