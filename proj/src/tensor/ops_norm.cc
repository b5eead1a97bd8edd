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

#include <algorithm>
#include <cmath>
#include <limits>

#include "op_util.h"
#include "sek/tensor/ops.h"

namespace sek {

using internal::GradOf;
using internal::ImplPtr;

template <typename T>
Tensor<T> Softmax(const Tensor<T>& x, int axis) {
  const int ax = internal::NormalizeAxis(axis, x.ndim());
  const auto s = internal::SplitAt(x.shape(), ax);
  ImplPtr<T> px = x.impl();
  std::vector<T> out(x.numel());
  for (int64_t o = 0; o < s.outer; ++o)
    for (int64_t in = 0; in < s.inner; ++in) {
      const int64_t base = o * s.extent * s.inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (int64_t k = 0; k < s.extent; ++k)
        mx = std::max(mx, px->data[base + k * s.inner]);
      T sum = 0;
      for (int64_t k = 0; k < s.extent; ++k) {
        const T e = std::exp(px->data[base + k * s.inner] - mx);
        out[base + k * s.inner] = e;
        sum += e;
      }
      for (int64_t k = 0; k < s.extent; ++k) out[base + k * s.inner] /= sum;
    }
  Tensor<T> y = RecordOp<T>("softmax", x.shape(), std::move(out), {x}, nullptr);
  if (y.is_leaf()) return y;
  std::weak_ptr<TensorImpl<T>> wy = y.impl();
  y.impl()->node->backward = [px, wy, s](std::span<const T> g) {
    auto gx = GradOf(px);
    if (gx.empty()) return;
    auto py = wy.lock();
    const T* yv = py->data.data();
    for (int64_t o = 0; o < s.outer; ++o)
      for (int64_t in = 0; in < s.inner; ++in) {
        const int64_t base = o * s.extent * s.inner + in;
        T dot = 0;
        for (int64_t k = 0; k < s.extent; ++k) {
          const int64_t i = base + k * s.inner;
          dot += g[i] * yv[i];
        }
        for (int64_t k = 0; k < s.extent; ++k) {
          const int64_t i = base + k * s.inner;
          gx[i] += yv[i] * (g[i] - dot);
        }
      }
  };
  return y;
}

template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, T eps) {
  const int64_t d = x.dim(-1);
  const int64_t rows = x.numel() / d;
  const bool affine = gamma.defined();
  if (affine)
    Check<ShapeError>(gamma.numel() == d && beta.defined() && beta.numel() == d,
                      "layer norm: affine parameters must have ", d,
                      " elements (last axis of ", ShapeToString(x.shape()),
                      ")");
  ImplPtr<T> px = x.impl();
  ImplPtr<T> pg = affine ? gamma.impl() : nullptr;
  ImplPtr<T> pb = affine ? beta.impl() : nullptr;
  auto xhat = std::make_shared<std::vector<T>>(x.numel());
  auto rstd = std::make_shared<std::vector<T>>(rows);
  std::vector<T> out(x.numel());
  for (int64_t r = 0; r < rows; ++r) {
    const T* xr = px->data.data() + r * d;
    T mean = 0;
    for (int64_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<T>(d);
    T var = 0;
    for (int64_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<T>(d);
    const T rs = T(1) / std::sqrt(var + eps);
    (*rstd)[r] = rs;
    for (int64_t j = 0; j < d; ++j) {
      const T h = (xr[j] - mean) * rs;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = affine ? h * pg->data[j] + pb->data[j] : h;
    }
  }
  std::vector<Tensor<T>> inputs{x};
  if (affine) {
    inputs.push_back(gamma);
    inputs.push_back(beta);
  }
  return RecordOp<T>(
      "layer_norm", x.shape(), std::move(out), inputs,
      [px, pg, pb, xhat, rstd, rows, d](std::span<const T> g) {
        auto gx = GradOf(px);
        auto gg = GradOf(pg);
        auto gb = GradOf(pb);
        std::vector<T> dh(d);
        for (int64_t r = 0; r < rows; ++r) {
          const T* hr = xhat->data() + r * d;
          const T* gr = g.data() + r * d;
          T mean_dh = 0, mean_dh_h = 0;
          for (int64_t j = 0; j < d; ++j) {
            dh[j] = pg ? gr[j] * pg->data[j] : gr[j];
            mean_dh += dh[j];
            mean_dh_h += dh[j] * hr[j];
            if (!gg.empty()) gg[j] += gr[j] * hr[j];
            if (!gb.empty()) gb[j] += gr[j];
          }
          if (gx.empty()) continue;
          mean_dh /= static_cast<T>(d);
          mean_dh_h /= static_cast<T>(d);
          for (int64_t j = 0; j < d; ++j)
            gx[r * d + j] +=
                (*rstd)[r] * (dh[j] - mean_dh - hr[j] * mean_dh_h);
        }
      });
}

template <typename T>
Tensor<T> BatchNorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, Tensor<T>& running_mean,
                    Tensor<T>& running_var, const BatchNormOptions& opts) {
  const int64_t c = x.dim(-1);
  const int64_t rows = x.numel() / c;
  Check<ShapeError>(gamma.numel() == c && beta.numel() == c &&
                        running_mean.numel() == c && running_var.numel() == c,
                    "batch norm: parameters must have ", c,
                    " channels (last axis of ", ShapeToString(x.shape()), ")");
  ImplPtr<T> px = x.impl(), pg = gamma.impl(), pb = beta.impl();
  const T eps = static_cast<T>(opts.eps);
  auto xhat = std::make_shared<std::vector<T>>(x.numel());
  auto rstd = std::make_shared<std::vector<T>>(c);
  std::vector<T> mean(c, T(0)), var(c, T(0));
  if (opts.training) {
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t j = 0; j < c; ++j) mean[j] += px->data[r * c + j];
    for (int64_t j = 0; j < c; ++j) mean[j] /= static_cast<T>(rows);
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t j = 0; j < c; ++j) {
        const T dv = px->data[r * c + j] - mean[j];
        var[j] += dv * dv;
      }
    for (int64_t j = 0; j < c; ++j) var[j] /= static_cast<T>(rows);
    const T m = static_cast<T>(opts.momentum);
    const T unbias =
        rows > 1 ? static_cast<T>(rows) / static_cast<T>(rows - 1) : T(1);
    auto rm = running_mean.data();
    auto rv = running_var.data();
    for (int64_t j = 0; j < c; ++j) {
      rm[j] = (T(1) - m) * rm[j] + m * mean[j];
      rv[j] = (T(1) - m) * rv[j] + m * var[j] * unbias;
    }
  } else {
    for (int64_t j = 0; j < c; ++j) {
      mean[j] = running_mean[j];
      var[j] = running_var[j];
    }
  }
  for (int64_t j = 0; j < c; ++j) (*rstd)[j] = T(1) / std::sqrt(var[j] + eps);
  std::vector<T> out(x.numel());
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t j = 0; j < c; ++j) {
      const int64_t i = r * c + j;
      const T h = (px->data[i] - mean[j]) * (*rstd)[j];
      (*xhat)[i] = h;
      out[i] = h * pg->data[j] + pb->data[j];
    }
  const bool training = opts.training;
  return RecordOp<T>(
      "batch_norm", x.shape(), std::move(out), {x, gamma, beta},
      [px, pg, pb, xhat, rstd, rows, c, training](std::span<const T> g) {
        auto gx = GradOf(px);
        auto gg = GradOf(pg);
        auto gb = GradOf(pb);
        std::vector<T> sum_dh(c, T(0)), sum_dh_h(c, T(0));
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t j = 0; j < c; ++j) {
            const int64_t i = r * c + j;
            const T dh = g[i] * pg->data[j];
            sum_dh[j] += dh;
            sum_dh_h[j] += dh * (*xhat)[i];
            if (!gg.empty()) gg[j] += g[i] * (*xhat)[i];
            if (!gb.empty()) gb[j] += g[i];
          }
        if (gx.empty()) return;
        const T inv_rows = T(1) / static_cast<T>(rows);
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t j = 0; j < c; ++j) {
            const int64_t i = r * c + j;
            const T dh = g[i] * pg->data[j];
            if (training)
              gx[i] += (*rstd)[j] * (dh - sum_dh[j] * inv_rows -
                                     (*xhat)[i] * sum_dh_h[j] * inv_rows);
            else
              gx[i] += (*rstd)[j] * dh;
          }
      });
}

template <typename T>
Tensor<T> NormalizeLastAxis(const Tensor<T>& x, T eps) {
  const int64_t d = x.dim(-1);
  const int64_t rows = x.numel() / d;
  ImplPtr<T> px = x.impl();
  auto norms = std::make_shared<std::vector<T>>(rows);
  std::vector<T> out(x.numel());
  for (int64_t r = 0; r < rows; ++r) {
    T ss = 0;
    for (int64_t j = 0; j < d; ++j) ss += px->data[r * d + j] * px->data[r * d + j];
    const T n = std::max(std::sqrt(ss), eps);
    (*norms)[r] = n;
    for (int64_t j = 0; j < d; ++j) out[r * d + j] = px->data[r * d + j] / n;
  }
  return RecordOp<T>(
      "normalize", x.shape(), std::move(out), {x},
      [px, norms, rows, d, eps](std::span<const T> g) {
        auto gx = GradOf(px);
        if (gx.empty()) return;
        for (int64_t r = 0; r < rows; ++r) {
          const T n = (*norms)[r];
          const T* xr = px->data.data() + r * d;
          const T* gr = g.data() + r * d;
          if (n <= eps) {
            for (int64_t j = 0; j < d; ++j) gx[r * d + j] += gr[j] / n;
            continue;
          }
          T dot = 0;
          for (int64_t j = 0; j < d; ++j) dot += xr[j] * gr[j];
          const T inv = T(1) / n;
          for (int64_t j = 0; j < d; ++j)
            gx[r * d + j] += inv * (gr[j] - xr[j] * dot * inv * inv);
        }
      });
}

template <typename T>
Tensor<T> SoftmaxCrossEntropy(const Tensor<T>& logits,
                              const std::vector<int64_t>& labels) {
  Check<ShapeError>(logits.ndim() == 2, "cross entropy expects [B, K] logits, got ",
                    ShapeToString(logits.shape()));
  const int64_t b = logits.dim(0), k = logits.dim(1);
  Check<ShapeError>(static_cast<int64_t>(labels.size()) == b, "cross entropy: ",
                    labels.size(), " labels for batch axis 0 of extent ", b);
  for (int64_t y : labels)
    Check<ValidationError>(y >= 0 && y < k, "label ", y, " out of range [0, ",
                           k, ")");
  ImplPtr<T> pz = logits.impl();
  T total = 0;
  for (int64_t r = 0; r < b; ++r) {
    const T* z = pz->data.data() + r * k;
    const T zy = z[labels[r]];
    // -log p_y = log(1 + sum_{j != y} exp(z_j - z_y)), kept in log1p form so
    // that confident predictions do not cancel catastrophically.
    T mx = -std::numeric_limits<T>::infinity();
    for (int64_t j = 0; j < k; ++j)
      if (j != labels[r]) mx = std::max(mx, z[j] - zy);
    if (k == 1) continue;
    if (mx <= 0) {
      T s = 0;
      for (int64_t j = 0; j < k; ++j)
        if (j != labels[r]) s += std::exp(z[j] - zy);
      total += std::log1p(s);
    } else {
      T s = std::exp(-mx);
      for (int64_t j = 0; j < k; ++j)
        if (j != labels[r]) s += std::exp(z[j] - zy - mx);
      total += mx + std::log(s);
    }
  }
  const T loss = total / static_cast<T>(b);
  return RecordOp<T>("softmax_xent", Shape{}, {loss}, {logits},
                     [pz, labels, b, k](std::span<const T> g) {
                       auto gz = GradOf(pz);
                       if (gz.empty()) return;
                       const T scale = g[0] / static_cast<T>(b);
                       for (int64_t r = 0; r < b; ++r) {
                         const T* z = pz->data.data() + r * k;
                         const T mx = *std::max_element(z, z + k);
                         T s = 0;
                         for (int64_t j = 0; j < k; ++j) s += std::exp(z[j] - mx);
                         for (int64_t j = 0; j < k; ++j) {
                           const T p = std::exp(z[j] - mx) / s;
                           gz[r * k + j] +=
                               scale * (p - (j == labels[r] ? T(1) : T(0)));
                         }
                       }
                     });
}

#define SEK_INSTANTIATE(T)                                                   \
  template Tensor<T> Softmax(const Tensor<T>&, int);                         \
  template Tensor<T> LayerNorm(const Tensor<T>&, const Tensor<T>&,           \
                               const Tensor<T>&, T);                         \
  template Tensor<T> BatchNorm(const Tensor<T>&, const Tensor<T>&,           \
                               const Tensor<T>&, Tensor<T>&, Tensor<T>&,     \
                               const BatchNormOptions&);                     \
  template Tensor<T> NormalizeLastAxis(const Tensor<T>&, T);                 \
  template Tensor<T> SoftmaxCrossEntropy(const Tensor<T>&,                   \
                                         const std::vector<int64_t>&);
SEK_INSTANTIATE_FLOAT_DOUBLE(SEK_INSTANTIATE)
#undef SEK_INSTANTIATE

}  // namespace sek
