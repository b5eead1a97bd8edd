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

#ifndef SEK_TENSOR_TENSOR_H_
#define SEK_TENSOR_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sek/base/error.h"

namespace sek {

using Shape = std::vector<int64_t>;

enum class DType : uint8_t { kF32 = 0, kF64 = 1 };

template <typename T>
struct DTypeOf;
template <>
struct DTypeOf<float> {
  static constexpr DType value = DType::kF32;
};
template <>
struct DTypeOf<double> {
  static constexpr DType value = DType::kF64;
};

const char* DTypeName(DType dtype);
int64_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

template <typename T>
struct TensorImpl;

// One recorded differentiable operation. `backward` receives d(loss)/d(out)
// and accumulates into the grad buffers of `inputs` that require grad.
template <typename T>
struct GradNode {
  std::string op;
  std::vector<std::shared_ptr<TensorImpl<T>>> inputs;
  std::function<void(std::span<const T>)> backward;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::shared_ptr<GradNode<T>> node;  // null for leaves

  std::span<T> GradBuffer() {
    if (grad.empty()) grad.assign(data.size(), T(0));
    return grad;
  }
};

// Dense row-major tensor handle. Copies share storage; use Clone() for a
// deep copy. Every op returns a fresh tensor and never mutates its inputs.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<T> values);

  static Tensor Full(Shape shape, T value);
  static Tensor Scalar(T value) { return Tensor(Shape{}, {value}); }
  // Normal(0, stddev) entries.
  static Tensor Randn(Shape shape, std::mt19937_64& rng, T stddev = T(1));
  static Tensor Uniform(Shape shape, std::mt19937_64& rng, T low, T high);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int ndim() const { return static_cast<int>(impl_->shape.size()); }
  // Negative axes count from the back.
  int64_t dim(int axis) const;
  int64_t numel() const { return static_cast<int64_t>(impl_->data.size()); }

  std::span<T> data() { return impl_->data; }
  std::span<const T> data() const { return impl_->data; }
  T& operator[](int64_t i) { return impl_->data[i]; }
  T operator[](int64_t i) const { return impl_->data[i]; }
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on = true);
  bool is_leaf() const { return impl_->node == nullptr; }
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const T> grad() const { return impl_->grad; }
  // Gradient as a detached tensor (zeros if none accumulated).
  Tensor GradTensor() const;
  void ZeroGrad() { impl_->grad.clear(); }

  Tensor Clone() const;
  // Same values, no history, requires_grad = false.
  Tensor Detach() const;

  const std::shared_ptr<TensorImpl<T>>& impl() const { return impl_; }
  static Tensor FromImpl(std::shared_ptr<TensorImpl<T>> impl) {
    Tensor t;
    t.impl_ = std::move(impl);
    return t;
  }

 private:
  std::shared_ptr<TensorImpl<T>> impl_;
};

// Gradient recording is on by default; NoGradGuard disables it for the
// current thread.
bool GradEnabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
bool AllFinite(const Tensor<T>& t);

// Conversion between precisions (no history).
template <typename To, typename From>
Tensor<To> Cast(const Tensor<From>& t) {
  std::vector<To> values(t.data().begin(), t.data().end());
  return Tensor<To>(t.shape(), std::move(values));
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace sek

#endif  // SEK_TENSOR_TENSOR_H_
