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

#include "sek/tensor/autodiff.h"

#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace sek {

template <typename T>
GradTape<T> GradTape<T>::Build(const Tensor<T>& root) {
  GradTape tape;
  // Iterative post-order DFS; a node is emitted after all of its inputs.
  std::unordered_set<const TensorImpl<T>*> visited;
  std::vector<std::pair<std::shared_ptr<TensorImpl<T>>, std::size_t>> stack;
  stack.emplace_back(root.impl(), 0);
  visited.insert(root.impl().get());
  while (!stack.empty()) {
    auto& [impl, next] = stack.back();
    const auto* node = impl->node.get();
    if (node != nullptr && next < node->inputs.size()) {
      auto child = node->inputs[next++];
      if (child->requires_grad && visited.insert(child.get()).second)
        stack.emplace_back(std::move(child), 0);
      continue;
    }
    tape.nodes_.push_back(impl);
    stack.pop_back();
  }
  return tape;
}

template <typename T>
int64_t GradTape<T>::IndexOf(const TensorImpl<T>* impl) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].get() == impl) return static_cast<int64_t>(i);
  return -1;
}

template <typename T>
void Backward(const Tensor<T>& loss) {
  Check<ShapeError>(loss.defined() && loss.numel() == 1,
                    "backward needs a scalar loss, got shape ",
                    loss.defined() ? ShapeToString(loss.shape()) : "<undef>");
  Check<ValidationError>(loss.requires_grad(),
                         "loss is detached from the tape: it does not depend "
                         "on any tensor that requires grad");
  GradTape<T> tape = GradTape<T>::Build(loss);
  // Intermediate gradients are recomputed from scratch on every call; only
  // leaves accumulate.
  for (const auto& impl : tape.nodes())
    if (impl->node) impl->grad.assign(impl->data.size(), T(0));
  auto root = loss.impl();
  root->GradBuffer()[0] += T(1);
  const auto& nodes = tape.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    const auto& impl = *it;
    if (impl->node && impl->node->backward)
      impl->node->backward(std::span<const T>(impl->grad));
  }
}

template <typename T>
Tensor<T> RecordOp(std::string name, Shape shape, std::vector<T> values,
                   const std::vector<Tensor<T>>& inputs,
                   std::function<void(std::span<const T>)> backward) {
  Tensor<T> out(std::move(shape), std::move(values));
  if (!GradEnabled()) return out;
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (!any) return out;
  auto node = std::make_shared<GradNode<T>>();
  node->op = std::move(name);
  for (const auto& in : inputs) node->inputs.push_back(in.impl());
  node->backward = std::move(backward);
  out.impl()->node = std::move(node);
  out.impl()->requires_grad = true;
  return out;
}

template class GradTape<float>;
template class GradTape<double>;
template void Backward(const Tensor<float>&);
template void Backward(const Tensor<double>&);
template Tensor<float> RecordOp(std::string, Shape, std::vector<float>,
                                const std::vector<Tensor<float>>&,
                                std::function<void(std::span<const float>)>);
template Tensor<double> RecordOp(std::string, Shape, std::vector<double>,
                                 const std::vector<Tensor<double>>&,
                                 std::function<void(std::span<const double>)>);

}  // namespace sek
