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

#include "sek/harness/optimizer.h"

#include <cmath>

#include "sek/base/error.h"

namespace sek::harness {

double LearningRate(const RunConfig& cfg, int64_t step) {
  Check<ValidationError>(step >= 1, "learning rate step must be >= 1, got ", step);
  if (step <= cfg.warmup_steps) {
    return cfg.lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
  }
  if (cfg.schedule == Schedule::kWarmupConstant) return cfg.lr;
  const int64_t period = cfg.cycle_steps;
  const double phase =
      static_cast<double>((step - cfg.warmup_steps) % period) / static_cast<double>(period);
  return cfg.min_lr + (cfg.lr - cfg.min_lr) * std::abs(1.0 - 2.0 * phase);
}

template <typename T>
AdamW<T>::AdamW(nn::ParameterStore<T>& store, AdamWOptions opts)
    : params_(store.Trainable()), opts_(opts) {
  for (const auto& p : params_) {
    m_.emplace_back(static_cast<size_t>(p.numel()), 0.0);
    v_.emplace_back(static_cast<size_t>(p.numel()), 0.0);
  }
}

template <typename T>
double AdamW<T>::GradNorm() const {
  double sq = 0.0;
  for (const auto& p : params_) {
    for (T g : p.grad()) sq += static_cast<double>(g) * g;
  }
  return std::sqrt(sq);
}

template <typename T>
void AdamW<T>::ClipGradNorm(double max_norm) {
  double norm = GradNorm();
  if (norm > max_norm && norm > 0) {
    clip_scale_ = max_norm / norm;
  }
}

template <typename T>
void AdamW<T>::Step(double lr) {
  ++t_;
  const double b1 = opts_.beta1, b2 = opts_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double decay = 1.0 - lr * opts_.weight_decay;
  for (size_t k = 0; k < params_.size(); ++k) {
    Tensor<T>& p = params_[k];
    if (!p.has_grad()) continue;
    auto grad = p.grad();
    auto data = p.data();
    auto& m = m_[k];
    auto& v = v_[k];
    for (size_t i = 0; i < data.size(); ++i) {
      double g = clip_scale_ * grad[i];
      m[i] = b1 * m[i] + (1 - b1) * g;
      v[i] = b2 * v[i] + (1 - b2) * g * g;
      double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + opts_.eps);
      data[i] = static_cast<T>(decay * data[i] - lr * update);
    }
  }
  clip_scale_ = 1.0;
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace sek::harness
