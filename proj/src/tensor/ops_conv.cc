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

#include <numeric>

#include "eigen_map.h"
#include "op_util.h"
#include "sek/tensor/ops.h"

namespace sek {

using internal::GradOf;
using internal::ImplPtr;

namespace {

using internal::ConstMapMat;
using internal::MapMat;

struct ConvGeometry {
  int64_t cin, h, w, kh, kw, ho, wo;
  Conv2dOptions opts;
  int64_t rows() const { return cin * kh * kw; }
  int64_t cols() const { return ho * wo; }
};

// Unfolds one image [Cin, H, W] into [Cin*kh*kw, Ho*Wo].
template <typename T>
void Im2Col(const T* img, const ConvGeometry& g, T* cols) {
  const auto& o = g.opts;
  for (int64_t c = 0; c < g.cin; ++c)
    for (int64_t ki = 0; ki < g.kh; ++ki)
      for (int64_t kj = 0; kj < g.kw; ++kj) {
        T* row = cols + ((c * g.kh + ki) * g.kw + kj) * g.cols();
        for (int64_t oh = 0; oh < g.ho; ++oh) {
          const int64_t ih = oh * o.stride_h - o.pad_h + ki;
          T* dst = row + oh * g.wo;
          if (ih < 0 || ih >= g.h) {
            std::fill(dst, dst + g.wo, T(0));
            continue;
          }
          const T* src = img + (c * g.h + ih) * g.w;
          for (int64_t ow = 0; ow < g.wo; ++ow) {
            const int64_t iw = ow * o.stride_w - o.pad_w + kj;
            dst[ow] = (iw >= 0 && iw < g.w) ? src[iw] : T(0);
          }
        }
      }
}

template <typename T>
void Col2ImAccumulate(const T* cols, const ConvGeometry& g, T* img) {
  const auto& o = g.opts;
  for (int64_t c = 0; c < g.cin; ++c)
    for (int64_t ki = 0; ki < g.kh; ++ki)
      for (int64_t kj = 0; kj < g.kw; ++kj) {
        const T* row = cols + ((c * g.kh + ki) * g.kw + kj) * g.cols();
        for (int64_t oh = 0; oh < g.ho; ++oh) {
          const int64_t ih = oh * o.stride_h - o.pad_h + ki;
          if (ih < 0 || ih >= g.h) continue;
          T* dst = img + (c * g.h + ih) * g.w;
          const T* src = row + oh * g.wo;
          for (int64_t ow = 0; ow < g.wo; ++ow) {
            const int64_t iw = ow * o.stride_w - o.pad_w + kj;
            if (iw >= 0 && iw < g.w) dst[iw] += src[ow];
          }
        }
      }
}

}  // namespace

template <typename T>
Tensor<T> DepthwiseConv1d(const Tensor<T>& x, const Tensor<T>& w,
                          const Tensor<T>& bias) {
  Check<ShapeError>(x.ndim() == 3, "depthwise conv expects [B, T, C], got ",
                    ShapeToString(x.shape()));
  Check<ShapeError>(w.ndim() == 2 && w.dim(0) == x.dim(2),
                    "depthwise conv: kernel axis 0 (", w.ndim() ? w.dim(0) : 0,
                    ") must equal input axis 2 (", x.dim(2), ")");
  const int64_t k = w.dim(1);
  Check<ShapeError>(k % 2 == 1, "depthwise conv kernel size must be odd, got ",
                    k);
  const bool has_bias = bias.defined();
  if (has_bias)
    Check<ShapeError>(bias.numel() == x.dim(2), "depthwise conv bias needs ",
                      x.dim(2), " elements");
  const int64_t b = x.dim(0), t = x.dim(1), c = x.dim(2), half = k / 2;
  ImplPtr<T> px = x.impl(), pw = w.impl();
  ImplPtr<T> pbias = has_bias ? bias.impl() : nullptr;
  // Tap-major copy of the kernel so the channel loop is contiguous.
  std::vector<T> wt(k * c);
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t j = 0; j < k; ++j) wt[j * c + ch] = pw->data[ch * k + j];
  std::vector<T> out(x.numel(), T(0));
  for (int64_t bi = 0; bi < b; ++bi)
    for (int64_t ti = 0; ti < t; ++ti) {
      T* dst = out.data() + (bi * t + ti) * c;
      if (has_bias)
        for (int64_t ch = 0; ch < c; ++ch) dst[ch] = pbias->data[ch];
      for (int64_t j = 0; j < k; ++j) {
        const int64_t src_t = ti + j - half;
        if (src_t < 0 || src_t >= t) continue;
        const T* src = px->data.data() + (bi * t + src_t) * c;
        const T* wj = wt.data() + j * c;
        for (int64_t ch = 0; ch < c; ++ch) dst[ch] += wj[ch] * src[ch];
      }
    }
  std::vector<Tensor<T>> inputs{x, w};
  if (has_bias) inputs.push_back(bias);
  return RecordOp<T>(
      "depthwise_conv1d", x.shape(), std::move(out), inputs,
      [px, pw, pbias, b, t, c, k, half](std::span<const T> g) {
        auto gx = GradOf(px);
        auto gw = GradOf(pw);
        auto gb = GradOf(pbias);
        std::vector<T> gwt(gw.empty() ? 0 : k * c, T(0));
        std::vector<T> wt(k * c);
        for (int64_t ch = 0; ch < c; ++ch)
          for (int64_t j = 0; j < k; ++j) wt[j * c + ch] = pw->data[ch * k + j];
        for (int64_t bi = 0; bi < b; ++bi)
          for (int64_t ti = 0; ti < t; ++ti) {
            const T* go = g.data() + (bi * t + ti) * c;
            if (!gb.empty())
              for (int64_t ch = 0; ch < c; ++ch) gb[ch] += go[ch];
            for (int64_t j = 0; j < k; ++j) {
              const int64_t src_t = ti + j - half;
              if (src_t < 0 || src_t >= t) continue;
              const int64_t off = (bi * t + src_t) * c;
              if (!gx.empty()) {
                const T* wj = wt.data() + j * c;
                for (int64_t ch = 0; ch < c; ++ch) gx[off + ch] += wj[ch] * go[ch];
              }
              if (!gwt.empty()) {
                const T* src = px->data.data() + off;
                T* gwj = gwt.data() + j * c;
                for (int64_t ch = 0; ch < c; ++ch) gwj[ch] += go[ch] * src[ch];
              }
            }
          }
        if (!gw.empty())
          for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t j = 0; j < k; ++j) gw[ch * k + j] += gwt[j * c + ch];
      });
}

template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 const Conv2dOptions& opts) {
  Check<ShapeError>(x.ndim() == 4, "conv2d expects [B, Cin, H, W], got ",
                    ShapeToString(x.shape()));
  Check<ShapeError>(w.ndim() == 4 && w.dim(1) == x.dim(1),
                    "conv2d: kernel axis 1 must equal input axis 1 (", x.dim(1),
                    "); kernel shape ", ShapeToString(w.shape()));
  Check<ValidationError>(opts.stride_h > 0 && opts.stride_w > 0 &&
                             opts.pad_h >= 0 && opts.pad_w >= 0,
                         "conv2d: invalid stride/padding");
  ConvGeometry geo{x.dim(1), x.dim(2), x.dim(3), w.dim(2), w.dim(3), 0, 0, opts};
  const int64_t span_h = geo.h + 2 * opts.pad_h - geo.kh;
  const int64_t span_w = geo.w + 2 * opts.pad_w - geo.kw;
  Check<ShapeError>(span_h >= 0 && span_w >= 0, "conv2d: padded input ",
                    geo.h + 2 * opts.pad_h, "x", geo.w + 2 * opts.pad_w,
                    " (axes 2, 3) smaller than kernel ", geo.kh, "x", geo.kw);
  geo.ho = span_h / opts.stride_h + 1;
  geo.wo = span_w / opts.stride_w + 1;
  const int64_t b = x.dim(0), cout = w.dim(0);
  const bool has_bias = bias.defined();
  if (has_bias)
    Check<ShapeError>(bias.numel() == cout, "conv2d bias needs ", cout,
                      " elements");
  ImplPtr<T> px = x.impl(), pw = w.impl();
  ImplPtr<T> pbias = has_bias ? bias.impl() : nullptr;
  std::vector<T> out(b * cout * geo.cols());
  std::vector<T> cols(geo.rows() * geo.cols());
  ConstMapMat<T> wm(pw->data.data(), cout, geo.rows());
  for (int64_t bi = 0; bi < b; ++bi) {
    Im2Col(px->data.data() + bi * geo.cin * geo.h * geo.w, geo, cols.data());
    MapMat<T> om(out.data() + bi * cout * geo.cols(), cout, geo.cols());
    om.noalias() =
        wm * ConstMapMat<T>(cols.data(), geo.rows(), geo.cols());
    if (has_bias)
      for (int64_t co = 0; co < cout; ++co) om.row(co).array() += pbias->data[co];
  }
  std::vector<Tensor<T>> inputs{x, w};
  if (has_bias) inputs.push_back(bias);
  return RecordOp<T>(
      "conv2d", Shape{b, cout, geo.ho, geo.wo}, std::move(out), inputs,
      [px, pw, pbias, geo, b, cout](std::span<const T> g) {
        auto gx = GradOf(px);
        auto gw = GradOf(pw);
        auto gb = GradOf(pbias);
        std::vector<T> cols(geo.rows() * geo.cols());
        std::vector<T> dcols(gx.empty() ? 0 : cols.size());
        ConstMapMat<T> wm(pw->data.data(), cout, geo.rows());
        for (int64_t bi = 0; bi < b; ++bi) {
          ConstMapMat<T> gm(g.data() + bi * cout * geo.cols(), cout, geo.cols());
          if (!gb.empty()) {
            // Not Eigen's sum(): its rounding depends on pointer alignment.
            for (int64_t co = 0; co < cout; ++co) {
              const T* row = g.data() + (bi * cout + co) * geo.cols();
              gb[co] += std::accumulate(row, row + geo.cols(), T(0));
            }
          }
          if (!gw.empty()) {
            Im2Col(px->data.data() + bi * geo.cin * geo.h * geo.w, geo,
                   cols.data());
            MapMat<T>(gw.data(), cout, geo.rows()).noalias() +=
                gm * ConstMapMat<T>(cols.data(), geo.rows(), geo.cols()).transpose();
          }
          if (!gx.empty()) {
            MapMat<T>(dcols.data(), geo.rows(), geo.cols()).noalias() =
                wm.transpose() * gm;
            Col2ImAccumulate(dcols.data(), geo,
                             gx.data() + bi * geo.cin * geo.h * geo.w);
          }
        }
      });
}

template <typename T>
Tensor<T> MaxPool2x2(const Tensor<T>& x) {
  Check<ShapeError>(x.ndim() >= 2 && x.dim(-2) >= 2 && x.dim(-1) >= 2,
                    "max pool needs the last two axes >= 2, got ",
                    ShapeToString(x.shape()));
  const int64_t h = x.dim(-2), w = x.dim(-1);
  const int64_t ho = h / 2, wo = w / 2;
  const int64_t planes = x.numel() / (h * w);
  Shape out_shape = x.shape();
  out_shape[x.ndim() - 2] = ho;
  out_shape[x.ndim() - 1] = wo;
  ImplPtr<T> px = x.impl();
  auto argmax = std::make_shared<std::vector<int64_t>>(planes * ho * wo);
  std::vector<T> out(planes * ho * wo);
  for (int64_t p = 0; p < planes; ++p)
    for (int64_t i = 0; i < ho; ++i)
      for (int64_t j = 0; j < wo; ++j) {
        int64_t best = p * h * w + (2 * i) * w + 2 * j;
        for (int64_t di = 0; di < 2; ++di)
          for (int64_t dj = 0; dj < 2; ++dj) {
            const int64_t idx = p * h * w + (2 * i + di) * w + 2 * j + dj;
            if (px->data[idx] > px->data[best]) best = idx;
          }
        const int64_t o = (p * ho + i) * wo + j;
        out[o] = px->data[best];
        (*argmax)[o] = best;
      }
  return RecordOp<T>("max_pool2x2", out_shape, std::move(out), {x},
                     [px, argmax](std::span<const T> g) {
                       auto gx = GradOf(px);
                       if (gx.empty()) return;
                       for (std::size_t o = 0; o < g.size(); ++o)
                         gx[(*argmax)[o]] += g[o];
                     });
}

#define SEK_INSTANTIATE(T)                                                 \
  template Tensor<T> DepthwiseConv1d(const Tensor<T>&, const Tensor<T>&,   \
                                     const Tensor<T>&);                    \
  template Tensor<T> Conv2d(const Tensor<T>&, const Tensor<T>&,            \
                            const Tensor<T>&, const Conv2dOptions&);       \
  template Tensor<T> MaxPool2x2(const Tensor<T>&);
SEK_INSTANTIATE_FLOAT_DOUBLE(SEK_INSTANTIATE)
#undef SEK_INSTANTIATE

}  // namespace sek
