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

#ifndef SEK_HARNESS_OPTIMIZER_H_
#define SEK_HARNESS_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "sek/harness/config.h"
#include "sek/nn/parameters.h"

namespace sek::harness {

// Learning rate for 1-based optimizer step `step`: a linear ramp to the peak
// over warmup_steps, then either constant or a triangular cycle that starts
// at the peak, falls to min_lr at half a period and climbs back.
double LearningRate(const RunConfig& cfg, int64_t step);

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Adam with decoupled weight decay over the trainable tensors of a store.
template <typename T>
class AdamW {
 public:
  AdamW(nn::ParameterStore<T>& store, AdamWOptions opts);

  // Applies one update with the gradients currently held by the parameters.
  // Parameters without a gradient are left untouched.
  void Step(double lr);

  // Global L2 norm of all gradients.
  double GradNorm() const;
  // Rescales gradients so their global norm is at most `max_norm`.
  void ClipGradNorm(double max_norm);

  int64_t steps() const { return t_; }

 private:
  std::vector<Tensor<T>> params_;
  std::vector<std::vector<double>> m_, v_;
  double clip_scale_ = 1.0;  // applied to gradients by the next Step
  AdamWOptions opts_;
  int64_t t_ = 0;
};

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace sek::harness

#endif  // SEK_HARNESS_OPTIMIZER_H_
