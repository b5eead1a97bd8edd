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

#ifndef SEK_NN_PARAMETERS_H_
#define SEK_NN_PARAMETERS_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sek/tensor/tensor.h"

namespace sek::nn {

enum class ParamKind : uint8_t {
  kTrainable,
  kBuffer,  // persisted state that the optimizer does not touch
};

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
  ParamKind kind;
};

// Flat, insertion-ordered registry of every tensor a model owns. Names are
// dotted paths ("encoder.block0.ffn1.linear1.weight").
template <typename T>
class ParameterStore {
 public:
  Tensor<T> Add(const std::string& name, Tensor<T> value, ParamKind kind);

  const std::vector<NamedTensor<T>>& entries() const { return entries_; }
  std::vector<NamedTensor<T>>& entries() { return entries_; }
  std::vector<Tensor<T>> Trainable() const;
  std::vector<std::string> Names() const;
  // Returns nullptr if absent.
  const NamedTensor<T>* Find(const std::string& name) const;
  int64_t NumTrainableElements() const;
  void ZeroGrad();

 private:
  std::vector<NamedTensor<T>> entries_;
};

// Creates parameters under a name prefix.
template <typename T>
class ParamScope {
 public:
  ParamScope(ParameterStore<T>* store, std::mt19937_64* rng,
             std::string prefix = "")
      : store_(store), rng_(rng), prefix_(std::move(prefix)) {}

  ParamScope Sub(const std::string& name) const {
    return ParamScope(store_, rng_, Qualify(name));
  }

  // Uniform(-bound, bound), trainable.
  Tensor<T> Uniform(const std::string& name, Shape shape, double bound);
  Tensor<T> Normal(const std::string& name, Shape shape, double stddev);
  Tensor<T> Constant(const std::string& name, Shape shape, T value);
  Tensor<T> Buffer(const std::string& name, Shape shape, T value);

  std::mt19937_64& rng() const { return *rng_; }
  const std::string& prefix() const { return prefix_; }

 private:
  std::string Qualify(const std::string& name) const {
    return prefix_.empty() ? name : prefix_ + "." + name;
  }

  ParameterStore<T>* store_;
  std::mt19937_64* rng_;
  std::string prefix_;
};

extern template class ParameterStore<float>;
extern template class ParameterStore<double>;
extern template class ParamScope<float>;
extern template class ParamScope<double>;

}  // namespace sek::nn

#endif  // SEK_NN_PARAMETERS_H_
