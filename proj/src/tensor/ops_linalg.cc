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


#include "eigen_map.h"
#include "op_util.h"
#include "sek/tensor/ops.h"

namespace sek {

using internal::GradOf;
using internal::ImplPtr;

namespace {

using internal::ConstMapMat;
using internal::MapMat;

}  // namespace

template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b) {
  Check<ShapeError>(b.ndim() == 2, "matmul rhs must be 2-D, got ",
                    ShapeToString(b.shape()));
  Check<ShapeError>(a.ndim() >= 1, "matmul lhs must have rank >= 1");
  const int64_t k = a.dim(-1);
  Check<ShapeError>(k == b.dim(0), "matmul: lhs axis ", a.ndim() - 1,
                    " (extent ", k, ") != rhs axis 0 (extent ", b.dim(0),
                    "); shapes ", ShapeToString(a.shape()), " x ",
                    ShapeToString(b.shape()));
  const int64_t rows = a.numel() / k;
  const int64_t n = b.dim(1);
  Shape out_shape = a.shape();
  out_shape.back() = n;
  std::vector<T> out(rows * n);
  ImplPtr<T> pa = a.impl(), pb = b.impl();
  MapMat<T>(out.data(), rows, n).noalias() =
      ConstMapMat<T>(pa->data.data(), rows, k) * ConstMapMat<T>(pb->data.data(), k, n);
  return RecordOp<T>("matmul", out_shape, std::move(out), {a, b},
                     [pa, pb, rows, k, n](std::span<const T> g) {
                       ConstMapMat<T> gm(g.data(), rows, n);
                       auto ga = GradOf(pa);
                       auto gb = GradOf(pb);
                       if (!ga.empty())
                         MapMat<T>(ga.data(), rows, k).noalias() +=
                             gm * ConstMapMat<T>(pb->data.data(), k, n).transpose();
                       if (!gb.empty())
                         MapMat<T>(gb.data(), k, n).noalias() +=
                             ConstMapMat<T>(pa->data.data(), rows, k).transpose() * gm;
                     });
}

template <typename T>
Tensor<T> BatchMatMul(const Tensor<T>& a, const Tensor<T>& b,
                      bool transpose_b) {
  Check<ShapeError>(a.ndim() >= 2 && a.ndim() == b.ndim(),
                    "batch matmul needs equal ranks >= 2, got ",
                    ShapeToString(a.shape()), " and ",
                    ShapeToString(b.shape()));
  const int nd = a.ndim();
  for (int i = 0; i < nd - 2; ++i)
    Check<ShapeError>(a.dim(i) == b.dim(i), "batch matmul: axis ", i,
                      " differs (", a.dim(i), " vs ", b.dim(i), ")");
  const int64_t m = a.dim(-2), k = a.dim(-1);
  const int64_t kb = transpose_b ? b.dim(-1) : b.dim(-2);
  const int64_t n = transpose_b ? b.dim(-2) : b.dim(-1);
  Check<ShapeError>(k == kb, "batch matmul: contraction axes disagree (", k,
                    " vs ", kb, "); shapes ", ShapeToString(a.shape()), " x ",
                    ShapeToString(b.shape()),
                    transpose_b ? " (rhs transposed)" : "");
  const int64_t batch = a.numel() / (m * k);
  Shape out_shape = a.shape();
  out_shape[nd - 1] = n;
  std::vector<T> out(batch * m * n);
  ImplPtr<T> pa = a.impl(), pb = b.impl();
  for (int64_t i = 0; i < batch; ++i) {
    ConstMapMat<T> am(pa->data.data() + i * m * k, m, k);
    MapMat<T> om(out.data() + i * m * n, m, n);
    if (transpose_b)
      om.noalias() =
          am * ConstMapMat<T>(pb->data.data() + i * n * k, n, k).transpose();
    else
      om.noalias() =
          am * ConstMapMat<T>(pb->data.data() + i * k * n, k, n);
  }
  return RecordOp<T>(
      "batch_matmul", out_shape, std::move(out), {a, b},
      [pa, pb, batch, m, k, n, transpose_b](std::span<const T> g) {
        auto ga = GradOf(pa);
        auto gb = GradOf(pb);
        for (int64_t i = 0; i < batch; ++i) {
          ConstMapMat<T> gm(g.data() + i * m * n, m, n);
          ConstMapMat<T> am(pa->data.data() + i * m * k, m, k);
          if (transpose_b) {
            ConstMapMat<T> bm(pb->data.data() + i * n * k, n, k);
            if (!ga.empty())
              MapMat<T>(ga.data() + i * m * k, m, k).noalias() +=
                  gm * bm;
            if (!gb.empty())
              MapMat<T>(gb.data() + i * n * k, n, k).noalias() +=
                  gm.transpose() * am;
          } else {
            ConstMapMat<T> bm(pb->data.data() + i * k * n, k, n);
            if (!ga.empty())
              MapMat<T>(ga.data() + i * m * k, m, k).noalias() +=
                  gm * bm.transpose();
            if (!gb.empty())
              MapMat<T>(gb.data() + i * k * n, k, n).noalias() +=
                  am.transpose() * gm;
          }
        }
      });
}

#define SEK_INSTANTIATE(T)                                          \
  template Tensor<T> MatMul(const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> BatchMatMul(const Tensor<T>&, const Tensor<T>&, \
                                 bool);
SEK_INSTANTIATE_FLOAT_DOUBLE(SEK_INSTANTIATE)
#undef SEK_INSTANTIATE

}  // namespace sek
