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

#include "op_util.h"

#include <algorithm>

namespace sek::internal {

int NormalizeAxis(int axis, int ndim) {
  const int a = axis < 0 ? axis + ndim : axis;
  Check<ShapeError>(a >= 0 && a < ndim, "axis ", axis,
                    " out of range for rank ", ndim);
  return a;
}

std::vector<int64_t> ContiguousStrides(const Shape& shape) {
  std::vector<int64_t> strides(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
    strides[i] = strides[i + 1] * shape[i + 1];
  return strides;
}

Shape BroadcastShapes(const Shape& a, const Shape& b) {
  const std::size_t nd = std::max(a.size(), b.size());
  Shape out(nd, 1);
  for (std::size_t i = 0; i < nd; ++i) {
    const int64_t da = i < nd - a.size() ? 1 : a[i - (nd - a.size())];
    const int64_t db = i < nd - b.size() ? 1 : b[i - (nd - b.size())];
    Check<ShapeError>(da == db || da == 1 || db == 1,
                      "cannot broadcast ", ShapeToString(a), " with ",
                      ShapeToString(b), ": axis ", i, " has extents ", da,
                      " vs ", db);
    out[i] = std::max(da, db);
  }
  return out;
}

std::vector<int64_t> BroadcastStrides(const Shape& in, const Shape& out) {
  std::vector<int64_t> contiguous = ContiguousStrides(in);
  std::vector<int64_t> strides(out.size(), 0);
  const std::size_t offset = out.size() - in.size();
  for (std::size_t i = 0; i < in.size(); ++i)
    strides[i + offset] = in[i] == 1 ? 0 : contiguous[i];
  return strides;
}

AxisSplit SplitAt(const Shape& shape, int axis) {
  AxisSplit s;
  for (int i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace sek::internal
