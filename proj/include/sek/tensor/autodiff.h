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

#ifndef SEK_TENSOR_AUTODIFF_H_
#define SEK_TENSOR_AUTODIFF_H_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sek/tensor/tensor.h"

namespace sek {

// Topologically ordered record of the operations reachable from a loss:
// every tensor appears after all producers of its inputs, and each tensor
// appears once.
template <typename T>
class GradTape {
 public:
  // Walks the recorded graph that produced `root`.
  static GradTape Build(const Tensor<T>& root);

  const std::vector<std::shared_ptr<TensorImpl<T>>>& nodes() const {
    return nodes_;
  }
  std::size_t size() const { return nodes_.size(); }
  // Index of `impl` in the ordering, or -1.
  int64_t IndexOf(const TensorImpl<T>* impl) const;

 private:
  std::vector<std::shared_ptr<TensorImpl<T>>> nodes_;
};

// Reverse-mode pass from a scalar loss. Leaf gradients accumulate across
// calls until ZeroGrad(). Throws if `loss` is not a scalar or does not depend
// on any tensor that requires grad.
template <typename T>
void Backward(const Tensor<T>& loss);

// Wraps a result computed outside the kernel catalog into the graph.
// `backward` receives the output gradient and must accumulate into the
// inputs' GradBuffer() (only those that require grad).
template <typename T>
Tensor<T> RecordOp(std::string name, Shape shape, std::vector<T> values,
                   const std::vector<Tensor<T>>& inputs,
                   std::function<void(std::span<const T>)> backward);

}  // namespace sek

#endif  // SEK_TENSOR_AUTODIFF_H_
