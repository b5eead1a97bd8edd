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

#include "sek/nn/parameters.h"

namespace sek::nn {

template <typename T>
Tensor<T> ParameterStore<T>::Add(const std::string& name, Tensor<T> value,
                                 ParamKind kind) {
  Check<ValidationError>(Find(name) == nullptr, "duplicate parameter name '",
                         name, "'");
  if (kind == ParamKind::kTrainable) value.set_requires_grad(true);
  entries_.push_back({name, value, kind});
  return value;
}

template <typename T>
std::vector<Tensor<T>> ParameterStore<T>::Trainable() const {
  std::vector<Tensor<T>> out;
  for (const auto& e : entries_)
    if (e.kind == ParamKind::kTrainable) out.push_back(e.tensor);
  return out;
}

template <typename T>
std::vector<std::string> ParameterStore<T>::Names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

template <typename T>
const NamedTensor<T>* ParameterStore<T>::Find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

template <typename T>
int64_t ParameterStore<T>::NumTrainableElements() const {
  int64_t n = 0;
  for (const auto& e : entries_)
    if (e.kind == ParamKind::kTrainable) n += e.tensor.numel();
  return n;
}

template <typename T>
void ParameterStore<T>::ZeroGrad() {
  for (auto& e : entries_) e.tensor.ZeroGrad();
}

template <typename T>
Tensor<T> ParamScope<T>::Uniform(const std::string& name, Shape shape,
                                 double bound) {
  return store_->Add(Qualify(name),
                     Tensor<T>::Uniform(std::move(shape), *rng_, T(-bound),
                                        T(bound)),
                     ParamKind::kTrainable);
}

template <typename T>
Tensor<T> ParamScope<T>::Normal(const std::string& name, Shape shape,
                                double stddev) {
  return store_->Add(Qualify(name),
                     Tensor<T>::Randn(std::move(shape), *rng_, T(stddev)),
                     ParamKind::kTrainable);
}

template <typename T>
Tensor<T> ParamScope<T>::Constant(const std::string& name, Shape shape,
                                  T value) {
  return store_->Add(Qualify(name), Tensor<T>::Full(std::move(shape), value),
                     ParamKind::kTrainable);
}

template <typename T>
Tensor<T> ParamScope<T>::Buffer(const std::string& name, Shape shape, T value) {
  return store_->Add(Qualify(name), Tensor<T>::Full(std::move(shape), value),
                     ParamKind::kBuffer);
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template class ParamScope<float>;
template class ParamScope<double>;

}  // namespace sek::nn
