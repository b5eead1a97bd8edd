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
#include <set>

#include "op_util.h"
#include "sek/tensor/ops.h"

namespace sek {

using internal::BroadcastStrides;
using internal::ContiguousStrides;
using internal::ForEachStrided;
using internal::GradOf;
using internal::ImplPtr;

template <typename T>
Tensor<T> Sum(const Tensor<T>& x, std::vector<int> axes, bool keepdim) {
  std::set<int> axis_set;
  for (int a : axes) axis_set.insert(internal::NormalizeAxis(a, x.ndim()));
  Shape kept = x.shape();
  Shape squeezed;
  for (int i = 0; i < x.ndim(); ++i) {
    if (axis_set.count(i)) {
      kept[i] = 1;
    } else {
      squeezed.push_back(x.dim(i));
    }
  }
  const Shape in_shape = x.shape();
  const auto sx = ContiguousStrides(in_shape);
  const auto so = BroadcastStrides(kept, in_shape);
  ImplPtr<T> px = x.impl();
  std::vector<T> out(NumElements(kept), T(0));
  ForEachStrided(in_shape, sx, so, [&](int64_t, int64_t ix, int64_t io) {
    out[io] += px->data[ix];
  });
  return RecordOp<T>("sum", keepdim ? kept : squeezed, std::move(out), {x},
                     [px, in_shape, sx, so](std::span<const T> g) {
                       auto gx = GradOf(px);
                       if (gx.empty()) return;
                       ForEachStrided(in_shape, sx, so,
                                      [&](int64_t, int64_t ix, int64_t io) {
                                        gx[ix] += g[io];
                                      });
                     });
}

template <typename T>
Tensor<T> SumAll(const Tensor<T>& x) {
  ImplPtr<T> px = x.impl();
  T total = 0;
  for (T v : px->data) total += v;
  return RecordOp<T>("sum_all", Shape{}, {total}, {x},
                     [px](std::span<const T> g) {
                       auto gx = GradOf(px);
                       for (auto& v : gx) v += g[0];
                     });
}

template <typename T>
Tensor<T> Mean(const Tensor<T>& x, std::vector<int> axes, bool keepdim) {
  int64_t count = 1;
  std::set<int> axis_set;
  for (int a : axes) axis_set.insert(internal::NormalizeAxis(a, x.ndim()));
  for (int a : axis_set) count *= x.dim(a);
  return Scale(Sum(x, axes, keepdim), T(1) / static_cast<T>(count));
}

template <typename T>
Tensor<T> Variance(const Tensor<T>& x, std::vector<int> axes, bool keepdim) {
  Tensor<T> centered = Sub(x, Mean(x, axes, true));
  return Mean(Square(centered), axes, keepdim);
}

template <typename T>
Tensor<T> Concat(const std::vector<Tensor<T>>& parts, int axis) {
  Check<ValidationError>(!parts.empty(), "concat of zero tensors");
  const int nd = parts[0].ndim();
  const int ax = internal::NormalizeAxis(axis, nd);
  Shape out_shape = parts[0].shape();
  out_shape[ax] = 0;
  for (const auto& p : parts) {
    Check<ShapeError>(p.ndim() == nd, "concat: rank mismatch ", p.ndim(),
                      " vs ", nd);
    for (int i = 0; i < nd; ++i)
      if (i != ax)
        Check<ShapeError>(p.dim(i) == parts[0].dim(i), "concat along axis ",
                          ax, ": axis ", i, " differs (", p.dim(i), " vs ",
                          parts[0].dim(i), ")");
    out_shape[ax] += p.dim(ax);
  }
  const auto split = internal::SplitAt(out_shape, ax);
  std::vector<ImplPtr<T>> impls;
  std::vector<int64_t> extents;
  for (const auto& p : parts) {
    impls.push_back(p.impl());
    extents.push_back(p.dim(ax));
  }
  std::vector<T> out(NumElements(out_shape));
  int64_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const int64_t block = extents[p] * split.inner;
    for (int64_t o = 0; o < split.outer; ++o)
      std::copy_n(impls[p]->data.data() + o * block, block,
                  out.data() + o * split.extent * split.inner + offset);
    offset += block;
  }
  return RecordOp<T>("concat", out_shape, std::move(out), parts,
                     [impls, extents, split](std::span<const T> g) {
                       int64_t offset = 0;
                       for (std::size_t p = 0; p < impls.size(); ++p) {
                         const int64_t block = extents[p] * split.inner;
                         auto gp = GradOf(impls[p]);
                         if (!gp.empty())
                           for (int64_t o = 0; o < split.outer; ++o) {
                             const T* src = g.data() +
                                            o * split.extent * split.inner +
                                            offset;
                             T* dst = gp.data() + o * block;
                             for (int64_t i = 0; i < block; ++i) dst[i] += src[i];
                           }
                         offset += block;
                       }
                     });
}

template <typename T>
Tensor<T> Reshape(const Tensor<T>& x, Shape shape) {
  int infer = -1;
  int64_t known = 1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == -1) {
      Check<ShapeError>(infer < 0, "reshape: more than one -1 extent");
      infer = static_cast<int>(i);
    } else {
      known *= shape[i];
    }
  }
  if (infer >= 0) {
    Check<ShapeError>(known > 0 && x.numel() % known == 0, "reshape: cannot infer axis ",
                      infer, " for ", ShapeToString(x.shape()));
    shape[infer] = x.numel() / known;
  }
  Check<ShapeError>(NumElements(shape) == x.numel(), "reshape ",
                    ShapeToString(x.shape()), " -> ", ShapeToString(shape),
                    " changes the element count");
  ImplPtr<T> px = x.impl();
  return RecordOp<T>("reshape", shape, px->data, {x},
                     [px](std::span<const T> g) {
                       auto gx = GradOf(px);
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
                     });
}

template <typename T>
Tensor<T> Permute(const Tensor<T>& x, const std::vector<int>& perm) {
  const int nd = x.ndim();
  Check<ShapeError>(static_cast<int>(perm.size()) == nd,
                    "permute: got ", perm.size(), " axes for rank ", nd);
  std::vector<bool> seen(nd, false);
  Shape out_shape(nd);
  const auto in_strides = ContiguousStrides(x.shape());
  std::vector<int64_t> strides(nd);
  for (int i = 0; i < nd; ++i) {
    const int a = internal::NormalizeAxis(perm[i], nd);
    Check<ShapeError>(!seen[a], "permute: axis ", a, " repeated");
    seen[a] = true;
    out_shape[i] = x.dim(a);
    strides[i] = in_strides[a];
  }
  const std::vector<int64_t> zeros(nd, 0);
  ImplPtr<T> px = x.impl();
  std::vector<T> out(x.numel());
  ForEachStrided(out_shape, strides, zeros,
                 [&](int64_t i, int64_t ix, int64_t) { out[i] = px->data[ix]; });
  return RecordOp<T>("permute", out_shape, std::move(out), {x},
                     [px, out_shape, strides, zeros](std::span<const T> g) {
                       auto gx = GradOf(px);
                       if (gx.empty()) return;
                       ForEachStrided(out_shape, strides, zeros,
                                      [&](int64_t i, int64_t ix, int64_t) {
                                        gx[ix] += g[i];
                                      });
                     });
}

template <typename T>
Tensor<T> Roll2d(const Tensor<T>& x, int axis0, int64_t shift0, int axis1,
                 int64_t shift1) {
  int a0 = internal::NormalizeAxis(axis0, x.ndim());
  int a1 = internal::NormalizeAxis(axis1, x.ndim());
  Check<ShapeError>(a0 != a1, "roll: axes must differ");
  if (a0 > a1) {
    std::swap(a0, a1);
    std::swap(shift0, shift1);
  }
  const Shape& s = x.shape();
  int64_t outer = 1, mid = 1, inner = 1;
  for (int i = 0; i < a0; ++i) outer *= s[i];
  for (int i = a0 + 1; i < a1; ++i) mid *= s[i];
  for (int i = a1 + 1; i < x.ndim(); ++i) inner *= s[i];
  const int64_t n0 = s[a0], n1 = s[a1];
  const int64_t r0 = ((shift0 % n0) + n0) % n0;
  const int64_t r1 = ((shift1 % n1) + n1) % n1;
  // Maps a source offset to its destination; the inverse map is used for
  // the gradient.
  auto dest = [=](int64_t o, int64_t i0, int64_t m, int64_t i1) {
    const int64_t d0 = (i0 + r0) % n0, d1 = (i1 + r1) % n1;
    return (((o * n0 + d0) * mid + m) * n1 + d1) * inner;
  };
  ImplPtr<T> px = x.impl();
  std::vector<T> out(x.numel());
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t i0 = 0; i0 < n0; ++i0)
      for (int64_t m = 0; m < mid; ++m)
        for (int64_t i1 = 0; i1 < n1; ++i1) {
          const int64_t src = (((o * n0 + i0) * mid + m) * n1 + i1) * inner;
          std::copy_n(px->data.data() + src, inner, out.data() + dest(o, i0, m, i1));
        }
  return RecordOp<T>("roll2d", s, std::move(out), {x},
                     [px, outer, n0, mid, n1, inner, dest](std::span<const T> g) {
                       auto gx = GradOf(px);
                       if (gx.empty()) return;
                       for (int64_t o = 0; o < outer; ++o)
                         for (int64_t i0 = 0; i0 < n0; ++i0)
                           for (int64_t m = 0; m < mid; ++m)
                             for (int64_t i1 = 0; i1 < n1; ++i1) {
                               const int64_t src =
                                   (((o * n0 + i0) * mid + m) * n1 + i1) * inner;
                               const int64_t d = dest(o, i0, m, i1);
                               for (int64_t k = 0; k < inner; ++k)
                                 gx[src + k] += g[d + k];
                             }
                     });
}

template <typename T>
Tensor<T> Pad(const Tensor<T>& x,
              const std::vector<std::pair<int64_t, int64_t>>& pads) {
  const int nd = x.ndim();
  Check<ShapeError>(static_cast<int>(pads.size()) == nd, "pad: got ",
                    pads.size(), " pairs for rank ", nd);
  Shape out_shape = x.shape();
  for (int i = 0; i < nd; ++i) {
    Check<ShapeError>(pads[i].first >= 0 && pads[i].second >= 0,
                      "pad: negative padding on axis ", i);
    out_shape[i] += pads[i].first + pads[i].second;
  }
  const auto out_strides = ContiguousStrides(out_shape);
  int64_t base = 0;
  for (int i = 0; i < nd; ++i) base += pads[i].first * out_strides[i];
  const Shape in_shape = x.shape();
  const std::vector<int64_t> zeros(nd, 0);
  ImplPtr<T> px = x.impl();
  std::vector<T> out(NumElements(out_shape), T(0));
  ForEachStrided(in_shape, out_strides, zeros,
                 [&](int64_t i, int64_t io, int64_t) {
                   out[base + io] = px->data[i];
                 });
  return RecordOp<T>("pad", out_shape, std::move(out), {x},
                     [px, in_shape, out_strides, zeros, base](std::span<const T> g) {
                       auto gx = GradOf(px);
                       if (gx.empty()) return;
                       ForEachStrided(in_shape, out_strides, zeros,
                                      [&](int64_t i, int64_t io, int64_t) {
                                        gx[i] += g[base + io];
                                      });
                     });
}

template <typename T>
Tensor<T> Slice(const Tensor<T>& x, int axis, int64_t start, int64_t length) {
  const int ax = internal::NormalizeAxis(axis, x.ndim());
  Check<ShapeError>(start >= 0 && length > 0 && start + length <= x.dim(ax),
                    "slice [", start, ", ", start + length, ") out of range for axis ",
                    ax, " of extent ", x.dim(ax));
  const auto split = internal::SplitAt(x.shape(), ax);
  Shape out_shape = x.shape();
  out_shape[ax] = length;
  ImplPtr<T> px = x.impl();
  const int64_t block = length * split.inner;
  const int64_t stride = split.extent * split.inner;
  const int64_t first = start * split.inner;
  std::vector<T> out(split.outer * block);
  for (int64_t o = 0; o < split.outer; ++o)
    std::copy_n(px->data.data() + o * stride + first, block,
                out.data() + o * block);
  return RecordOp<T>("slice", out_shape, std::move(out), {x},
                     [px, split, block, stride, first](std::span<const T> g) {
                       auto gx = GradOf(px);
                       if (gx.empty()) return;
                       for (int64_t o = 0; o < split.outer; ++o)
                         for (int64_t i = 0; i < block; ++i)
                           gx[o * stride + first + i] += g[o * block + i];
                     });
}

template <typename T>
Tensor<T> IndexSelectRows(const Tensor<T>& table,
                          const std::vector<int64_t>& index) {
  Check<ShapeError>(table.ndim() == 2, "index select expects a 2-D table, got ",
                    ShapeToString(table.shape()));
  Check<ShapeError>(!index.empty(), "index select with no indices");
  const int64_t rows = table.dim(0), d = table.dim(1);
  for (int64_t r : index)
    Check<ShapeError>(r >= 0 && r < rows, "index ", r, " out of range for axis 0 of extent ",
                      rows);
  ImplPtr<T> pt = table.impl();
  std::vector<T> out(index.size() * d);
  for (std::size_t i = 0; i < index.size(); ++i)
    std::copy_n(pt->data.data() + index[i] * d, d, out.data() + i * d);
  return RecordOp<T>("index_select", Shape{static_cast<int64_t>(index.size()), d},
                     std::move(out), {table},
                     [pt, index, d](std::span<const T> g) {
                       auto gt = GradOf(pt);
                       if (gt.empty()) return;
                       for (std::size_t i = 0; i < index.size(); ++i)
                         for (int64_t j = 0; j < d; ++j)
                           gt[index[i] * d + j] += g[i * d + j];
                     });
}

template <typename T>
Tensor<T> AddAttentionBias(const Tensor<T>& scores, const Tensor<T>& bias) {
  Check<ShapeError>(scores.ndim() == 4 && bias.ndim() == 4,
                    "attention bias expects rank-4 scores and bias, got ",
                    ShapeToString(scores.shape()), " and ",
                    ShapeToString(bias.shape()));
  const int64_t s = scores.dim(0), h = scores.dim(1), n = scores.dim(2),
                m = scores.dim(3);
  const int64_t groups = bias.dim(0), hb = bias.dim(1);
  Check<ShapeError>(s % groups == 0, "attention bias: axis 0 of scores (", s,
                    ") not a multiple of bias groups (", groups, ")");
  Check<ShapeError>(hb == 1 || hb == h, "attention bias: axis 1 must be 1 or ",
                    h, ", got ", hb);
  Check<ShapeError>(bias.dim(2) == n && bias.dim(3) == m,
                    "attention bias: axes 2, 3 must be ", n, "x", m);
  ImplPtr<T> ps = scores.impl(), pb = bias.impl();
  const int64_t plane = n * m;
  std::vector<T> out(scores.numel());
  for (int64_t i = 0; i < s; ++i)
    for (int64_t hi = 0; hi < h; ++hi) {
      const T* src = ps->data.data() + (i * h + hi) * plane;
      const T* bv = pb->data.data() + ((i % groups) * hb + (hb == 1 ? 0 : hi)) * plane;
      T* dst = out.data() + (i * h + hi) * plane;
      for (int64_t k = 0; k < plane; ++k) dst[k] = src[k] + bv[k];
    }
  return RecordOp<T>("attention_bias", scores.shape(), std::move(out),
                     {scores, bias},
                     [ps, pb, s, h, hb, groups, plane](std::span<const T> g) {
                       auto gs = GradOf(ps);
                       auto gb = GradOf(pb);
                       for (std::size_t k = 0; k < gs.size(); ++k) gs[k] += g[k];
                       if (gb.empty()) return;
                       for (int64_t i = 0; i < s; ++i)
                         for (int64_t hi = 0; hi < h; ++hi) {
                           const T* src = g.data() + (i * h + hi) * plane;
                           T* dst = gb.data() +
                                    ((i % groups) * hb + (hb == 1 ? 0 : hi)) * plane;
                           for (int64_t k = 0; k < plane; ++k) dst[k] += src[k];
                         }
                     });
}

template <typename T>
Tensor<T> RelativeShift(const Tensor<T>& x) {
  Check<ShapeError>(x.ndim() >= 2, "relative shift needs rank >= 2");
  const int64_t tq = x.dim(-2), width = x.dim(-1);
  Check<ShapeError>(width == 2 * tq - 1, "relative shift: last axis must be 2*",
                    tq, "-1, got ", width);
  const int64_t planes = x.numel() / (tq * width);
  Shape out_shape = x.shape();
  out_shape.back() = tq;
  ImplPtr<T> px = x.impl();
  std::vector<T> out(planes * tq * tq);
  for (int64_t p = 0; p < planes; ++p)
    for (int64_t i = 0; i < tq; ++i)
      for (int64_t j = 0; j < tq; ++j)
        out[(p * tq + i) * tq + j] = px->data[(p * tq + i) * width + j - i + tq - 1];
  return RecordOp<T>("relative_shift", out_shape, std::move(out), {x},
                     [px, planes, tq, width](std::span<const T> g) {
                       auto gx = GradOf(px);
                       if (gx.empty()) return;
                       for (int64_t p = 0; p < planes; ++p)
                         for (int64_t i = 0; i < tq; ++i)
                           for (int64_t j = 0; j < tq; ++j)
                             gx[(p * tq + i) * width + j - i + tq - 1] +=
                                 g[(p * tq + i) * tq + j];
                     });
}

#define SEK_INSTANTIATE(T)                                                    \
  template Tensor<T> Sum(const Tensor<T>&, std::vector<int>, bool);           \
  template Tensor<T> SumAll(const Tensor<T>&);                                \
  template Tensor<T> Mean(const Tensor<T>&, std::vector<int>, bool);          \
  template Tensor<T> Variance(const Tensor<T>&, std::vector<int>, bool);      \
  template Tensor<T> Concat(const std::vector<Tensor<T>>&, int);              \
  template Tensor<T> Reshape(const Tensor<T>&, Shape);                        \
  template Tensor<T> Permute(const Tensor<T>&, const std::vector<int>&);      \
  template Tensor<T> Roll2d(const Tensor<T>&, int, int64_t, int, int64_t);    \
  template Tensor<T> Pad(const Tensor<T>&,                                    \
                         const std::vector<std::pair<int64_t, int64_t>>&);    \
  template Tensor<T> Slice(const Tensor<T>&, int, int64_t, int64_t);          \
  template Tensor<T> IndexSelectRows(const Tensor<T>&,                        \
                                     const std::vector<int64_t>&);            \
  template Tensor<T> AddAttentionBias(const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> RelativeShift(const Tensor<T>&);
SEK_INSTANTIATE_FLOAT_DOUBLE(SEK_INSTANTIATE)
#undef SEK_INSTANTIATE

}  // namespace sek
