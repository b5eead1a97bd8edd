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

// Helpers shared by the kernel implementations. Not installed.

#ifndef SEK_SRC_TENSOR_OP_UTIL_H_
#define SEK_SRC_TENSOR_OP_UTIL_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sek/tensor/autodiff.h"
#include "sek/tensor/tensor.h"

namespace sek::internal {

template <typename T>
using ImplPtr = std::shared_ptr<TensorImpl<T>>;

// Gradient buffer of `impl` if it takes part in differentiation, else empty.
template <typename T>
std::span<T> GradOf(const ImplPtr<T>& impl) {
  if (!impl || !impl->requires_grad) return {};
  return impl->GradBuffer();
}

int NormalizeAxis(int axis, int ndim);
std::vector<int64_t> ContiguousStrides(const Shape& shape);
Shape BroadcastShapes(const Shape& a, const Shape& b);
// Strides of `in` addressed with indices of `out` (0 on broadcast axes).
std::vector<int64_t> BroadcastStrides(const Shape& in, const Shape& out);

// Calls f(flat_out_index, offset_a, offset_b) for every element of `out`,
// walking the two stride sets in lockstep.
template <typename F>
void ForEachStrided(const Shape& out, const std::vector<int64_t>& sa,
                    const std::vector<int64_t>& sb, F&& f) {
  const int nd = static_cast<int>(out.size());
  if (nd == 0) {
    f(int64_t{0}, int64_t{0}, int64_t{0});
    return;
  }
  const int64_t total = NumElements(out);
  const int64_t inner = out[nd - 1];
  const int64_t ia = sa[nd - 1], ib = sb[nd - 1];
  std::vector<int64_t> idx(nd, 0);
  int64_t oa = 0, ob = 0;
  for (int64_t i = 0; i < total; i += inner) {
    for (int64_t k = 0; k < inner; ++k) f(i + k, oa + k * ia, ob + k * ib);
    for (int d = nd - 2; d >= 0; --d) {
      ++idx[d];
      oa += sa[d];
      ob += sb[d];
      if (idx[d] < out[d]) break;
      oa -= sa[d] * out[d];
      ob -= sb[d] * out[d];
      idx[d] = 0;
    }
  }
}

// outer x axis x inner decomposition around `axis`.
struct AxisSplit {
  int64_t outer = 1, extent = 1, inner = 1;
};
AxisSplit SplitAt(const Shape& shape, int axis);

}  // namespace sek::internal

#define SEK_INSTANTIATE_FLOAT_DOUBLE(MACRO) \
  MACRO(float)                              \
  MACRO(double)

#endif  // SEK_SRC_TENSOR_OP_UTIL_H_
