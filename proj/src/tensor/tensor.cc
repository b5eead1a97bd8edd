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

#include "sek/tensor/tensor.h"

#include <cmath>
#include <sstream>

namespace sek {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

const char* DTypeName(DType dtype) {
  return dtype == DType::kF32 ? "f32" : "f64";
}

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Tensor<T>::Tensor(Shape shape) {
  for (int64_t d : shape)
    Check<ShapeError>(d > 0, "tensor extents must be positive, got ",
                      ShapeToString(shape));
  impl_ = std::make_shared<TensorImpl<T>>();
  impl_->data.assign(NumElements(shape), T(0));
  impl_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) {
  for (int64_t d : shape)
    Check<ShapeError>(d > 0, "tensor extents must be positive, got ",
                      ShapeToString(shape));
  Check<ShapeError>(NumElements(shape) == static_cast<int64_t>(values.size()),
                    "shape ", ShapeToString(shape), " needs ",
                    NumElements(shape), " values, got ", values.size());
  impl_ = std::make_shared<TensorImpl<T>>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

template <typename T>
Tensor<T> Tensor<T>::Full(Shape shape, T value) {
  Tensor t(std::move(shape));
  std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::Randn(Shape shape, std::mt19937_64& rng, T stddev) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
  for (T& v : t.impl_->data) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::Uniform(Shape shape, std::mt19937_64& rng, T low,
                             T high) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(low, high);
  for (T& v : t.impl_->data) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
int64_t Tensor<T>::dim(int axis) const {
  const int n = ndim();
  if (axis < 0) axis += n;
  Check<ShapeError>(axis >= 0 && axis < n, "axis ", axis,
                    " out of range for shape ", ShapeToString(shape()));
  return impl_->shape[axis];
}

template <typename T>
T Tensor<T>::item() const {
  Check<ShapeError>(numel() == 1, "item() needs a single element, shape is ",
                    ShapeToString(shape()));
  return impl_->data[0];
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  Check<ValidationError>(is_leaf() || on,
                         "cannot clear requires_grad on a non-leaf tensor");
  impl_->requires_grad = on;
  return *this;
}

template <typename T>
Tensor<T> Tensor<T>::GradTensor() const {
  if (impl_->grad.empty()) return Tensor(impl_->shape);
  return Tensor(impl_->shape, impl_->grad);
}

template <typename T>
Tensor<T> Tensor<T>::Clone() const {
  Tensor t(impl_->shape, impl_->data);
  t.impl_->requires_grad = impl_->requires_grad && is_leaf();
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::Detach() const {
  return Tensor(impl_->shape, impl_->data);
}

template <typename T>
bool AllFinite(const Tensor<T>& t) {
  for (T v : t.data())
    if (!std::isfinite(v)) return false;
  return true;
}

template class Tensor<float>;
template class Tensor<double>;
template bool AllFinite(const Tensor<float>&);
template bool AllFinite(const Tensor<double>&);

}  // namespace sek
