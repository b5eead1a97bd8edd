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

#include <cmath>

#include "op_util.h"
#include "sek/tensor/ops.h"

namespace sek {

using internal::BroadcastShapes;
using internal::BroadcastStrides;
using internal::ForEachStrided;
using internal::GradOf;
using internal::ImplPtr;

namespace {

enum class BinaryKind { kAdd, kSub, kMul };

template <typename T>
Tensor<T> Binary(BinaryKind kind, const Tensor<T>& a, const Tensor<T>& b) {
  const char* name = kind == BinaryKind::kAdd   ? "add"
                     : kind == BinaryKind::kSub ? "sub"
                                                : "mul";
  ImplPtr<T> pa = a.impl(), pb = b.impl();
  if (a.shape() == b.shape()) {
    const int64_t n = a.numel();
    std::vector<T> out(n);
    const T* x = pa->data.data();
    const T* y = pb->data.data();
    switch (kind) {
      case BinaryKind::kAdd:
        for (int64_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
        break;
      case BinaryKind::kSub:
        for (int64_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
        break;
      case BinaryKind::kMul:
        for (int64_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
        break;
    }
    return RecordOp<T>(name, a.shape(), std::move(out), {a, b},
                       [kind, pa, pb](std::span<const T> g) {
                         auto ga = GradOf(pa);
                         auto gb = GradOf(pb);
                         const std::size_t n = g.size();
                         if (!ga.empty()) {
                           if (kind == BinaryKind::kMul)
                             for (std::size_t i = 0; i < n; ++i)
                               ga[i] += g[i] * pb->data[i];
                           else
                             for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
                         }
                         if (!gb.empty()) {
                           if (kind == BinaryKind::kMul)
                             for (std::size_t i = 0; i < n; ++i)
                               gb[i] += g[i] * pa->data[i];
                           else if (kind == BinaryKind::kSub)
                             for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
                           else
                             for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
                         }
                       });
  }
  const Shape out_shape = BroadcastShapes(a.shape(), b.shape());
  const auto sa = BroadcastStrides(a.shape(), out_shape);
  const auto sb = BroadcastStrides(b.shape(), out_shape);
  std::vector<T> out(NumElements(out_shape));
  const T* x = pa->data.data();
  const T* y = pb->data.data();
  ForEachStrided(out_shape, sa, sb, [&](int64_t i, int64_t ia, int64_t ib) {
    switch (kind) {
      case BinaryKind::kAdd:
        out[i] = x[ia] + y[ib];
        break;
      case BinaryKind::kSub:
        out[i] = x[ia] - y[ib];
        break;
      case BinaryKind::kMul:
        out[i] = x[ia] * y[ib];
        break;
    }
  });
  return RecordOp<T>(
      name, out_shape, std::move(out), {a, b},
      [kind, pa, pb, out_shape, sa, sb](std::span<const T> g) {
        auto ga = GradOf(pa);
        auto gb = GradOf(pb);
        ForEachStrided(out_shape, sa, sb,
                       [&](int64_t i, int64_t ia, int64_t ib) {
                         if (!ga.empty())
                           ga[ia] += kind == BinaryKind::kMul
                                         ? g[i] * pb->data[ib]
                                         : g[i];
                         if (!gb.empty()) {
                           if (kind == BinaryKind::kMul)
                             gb[ib] += g[i] * pa->data[ia];
                           else if (kind == BinaryKind::kSub)
                             gb[ib] -= g[i];
                           else
                             gb[ib] += g[i];
                         }
                       });
      });
}

// y = f(x) with dy/dx expressed through (x, y).
template <typename T, typename Fwd, typename Deriv>
Tensor<T> Unary(const char* name, const Tensor<T>& x, Fwd fwd, Deriv deriv) {
  ImplPtr<T> px = x.impl();
  const int64_t n = x.numel();
  std::vector<T> out(n);
  for (int64_t i = 0; i < n; ++i) out[i] = fwd(px->data[i]);
  Tensor<T> result = RecordOp<T>(name, x.shape(), std::move(out), {x}, nullptr);
  if (result.is_leaf()) return result;
  // The closure needs the output values; capture them by weak reference to
  // avoid a cycle through the node.
  std::weak_ptr<TensorImpl<T>> wy = result.impl();
  result.impl()->node->backward = [px, wy, deriv](std::span<const T> g) {
    auto gx = GradOf(px);
    if (gx.empty()) return;
    auto py = wy.lock();
    for (std::size_t i = 0; i < g.size(); ++i)
      gx[i] += g[i] * deriv(px->data[i], py->data[i]);
  };
  return result;
}

template <typename T>
T StableSigmoid(T v) {
  if (v >= 0) return T(1) / (T(1) + std::exp(-v));
  const T e = std::exp(v);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  return Binary(BinaryKind::kAdd, a, b);
}

template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b) {
  return Binary(BinaryKind::kSub, a, b);
}

template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b) {
  return Binary(BinaryKind::kMul, a, b);
}

template <typename T>
Tensor<T> Scale(const Tensor<T>& x, T factor) {
  return Unary(
      "scale", x, [factor](T v) { return v * factor; },
      [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> AddScalar(const Tensor<T>& x, T value) {
  return Unary(
      "add_scalar", x, [value](T v) { return v + value; },
      [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> Relu(const Tensor<T>& x) {
  return Unary(
      "relu", x, [](T v) { return v > 0 ? v : T(0); },
      [](T v, T) { return v > 0 ? T(1) : T(0); });
}

template <typename T>
Tensor<T> Sigmoid(const Tensor<T>& x) {
  return Unary(
      "sigmoid", x, [](T v) { return StableSigmoid(v); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> Tanh(const Tensor<T>& x) {
  return Unary(
      "tanh", x, [](T v) { return std::tanh(v); },
      [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> Swish(const Tensor<T>& x) {
  return Unary(
      "swish", x, [](T v) { return v * StableSigmoid(v); },
      [](T v, T) {
        const T s = StableSigmoid(v);
        return s * (T(1) + v * (T(1) - s));
      });
}

template <typename T>
Tensor<T> Gelu(const Tensor<T>& x) {
  constexpr T kInvSqrt2 = T(0.70710678118654752440);
  constexpr T kInvSqrt2Pi = T(0.39894228040143267794);
  return Unary(
      "gelu", x,
      [](T v) { return T(0.5) * v * (T(1) + std::erf(v * kInvSqrt2)); },
      [](T v, T) {
        const T cdf = T(0.5) * (T(1) + std::erf(v * kInvSqrt2));
        return cdf + v * kInvSqrt2Pi * std::exp(T(-0.5) * v * v);
      });
}

template <typename T>
Tensor<T> Square(const Tensor<T>& x) {
  return Unary(
      "square", x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Tensor<T> Sqrt(const Tensor<T>& x) {
  return Unary(
      "sqrt", x, [](T v) { return std::sqrt(v); },
      [](T, T y) { return T(0.5) / y; });
}

template <typename T>
Tensor<T> ClampMin(const Tensor<T>& x, T floor) {
  return Unary(
      "clamp_min", x, [floor](T v) { return v > floor ? v : floor; },
      [floor](T v, T) { return v > floor ? T(1) : T(0); });
}

template <typename T>
Tensor<T> Glu(const Tensor<T>& x, int axis) {
  const int ax = internal::NormalizeAxis(axis, x.ndim());
  const auto split = internal::SplitAt(x.shape(), ax);
  Check<ShapeError>(split.extent % 2 == 0, "GLU axis ", ax,
                    " must have even extent, got ", split.extent);
  const int64_t half = split.extent / 2;
  Shape out_shape = x.shape();
  out_shape[ax] = half;
  ImplPtr<T> px = x.impl();
  std::vector<T> out(NumElements(out_shape));
  auto offsets = [=](int64_t o, int64_t k, int64_t in) {
    const int64_t a = (o * split.extent + k) * split.inner + in;
    return std::pair<int64_t, int64_t>(a, a + half * split.inner);
  };
  for (int64_t o = 0; o < split.outer; ++o)
    for (int64_t k = 0; k < half; ++k)
      for (int64_t in = 0; in < split.inner; ++in) {
        auto [ia, ib] = offsets(o, k, in);
        out[(o * half + k) * split.inner + in] =
            px->data[ia] * StableSigmoid(px->data[ib]);
      }
  return RecordOp<T>("glu", out_shape, std::move(out), {x},
                     [px, split, half, offsets](std::span<const T> g) {
                       auto gx = GradOf(px);
                       if (gx.empty()) return;
                       for (int64_t o = 0; o < split.outer; ++o)
                         for (int64_t k = 0; k < half; ++k)
                           for (int64_t in = 0; in < split.inner; ++in) {
                             auto [ia, ib] = offsets(o, k, in);
                             const T go = g[(o * half + k) * split.inner + in];
                             const T s = StableSigmoid(px->data[ib]);
                             gx[ia] += go * s;
                             gx[ib] += go * px->data[ia] * s * (T(1) - s);
                           }
                     });
}

template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, T p, bool training,
                  std::mt19937_64& rng) {
  Check<ValidationError>(p >= 0 && p < 1, "dropout probability ", p,
                         " outside [0, 1)");
  if (!training || p == T(0)) return x;
  std::bernoulli_distribution keep(1.0 - static_cast<double>(p));
  auto mask = std::make_shared<std::vector<T>>(x.numel());
  const T scale = T(1) / (T(1) - p);
  for (auto& m : *mask) m = keep(rng) ? scale : T(0);
  ImplPtr<T> px = x.impl();
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = px->data[i] * (*mask)[i];
  return RecordOp<T>("dropout", x.shape(), std::move(out), {x},
                     [px, mask](std::span<const T> g) {
                       auto gx = GradOf(px);
                       if (gx.empty()) return;
                       for (std::size_t i = 0; i < g.size(); ++i)
                         gx[i] += g[i] * (*mask)[i];
                     });
}

#define SEK_INSTANTIATE(T)                                                \
  template Tensor<T> Add(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> Sub(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> Mul(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> Scale(const Tensor<T>&, T);                          \
  template Tensor<T> AddScalar(const Tensor<T>&, T);                      \
  template Tensor<T> Relu(const Tensor<T>&);                              \
  template Tensor<T> Sigmoid(const Tensor<T>&);                           \
  template Tensor<T> Tanh(const Tensor<T>&);                              \
  template Tensor<T> Swish(const Tensor<T>&);                             \
  template Tensor<T> Gelu(const Tensor<T>&);                              \
  template Tensor<T> Square(const Tensor<T>&);                            \
  template Tensor<T> Sqrt(const Tensor<T>&);                              \
  template Tensor<T> ClampMin(const Tensor<T>&, T);                       \
  template Tensor<T> Glu(const Tensor<T>&, int);                          \
  template Tensor<T> Dropout(const Tensor<T>&, T, bool, std::mt19937_64&);
SEK_INSTANTIATE_FLOAT_DOUBLE(SEK_INSTANTIATE)
#undef SEK_INSTANTIATE

}  // namespace sek
