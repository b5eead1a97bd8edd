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

#include "sek/tensor/finite_difference.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sek {

namespace {

double ScalarOf(const Tensor<double>& t) {
  Check<ShapeError>(t.defined() && t.numel() == 1,
                    "finite difference: function must return a scalar, got ",
                    t.defined() ? ShapeToString(t.shape()) : "<undef>");
  return t.item();
}

}  // namespace

Tensor<double> FiniteDifferenceGradient(
    const std::function<Tensor<double>(const Tensor<double>&)>& f,
    const Tensor<double>& x, double h) {
  Tensor<double> probe = x.Detach();
  Tensor<double> grad(x.shape());
  // Evaluate once up front so a non-scalar f fails even for empty loops.
  ScalarOf(f(probe));
  for (int64_t i = 0; i < probe.numel(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double plus = ScalarOf(f(probe));
    probe[i] = orig - h;
    const double minus = ScalarOf(f(probe));
    probe[i] = orig;
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

Tensor<double> FiniteDifferenceGradientInPlace(
    const std::function<Tensor<double>()>& f, Tensor<double>& param, double h) {
  Tensor<double> grad(param.shape());
  ScalarOf(f());
  for (int64_t i = 0; i < param.numel(); ++i) {
    const double orig = param[i];
    param[i] = orig + h;
    const double plus = ScalarOf(f());
    param[i] = orig - h;
    const double minus = ScalarOf(f());
    param[i] = orig;
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

double MaxRelativeError(const Tensor<double>& analytic,
                        const Tensor<double>& numeric) {
  Check<ShapeError>(analytic.shape() == numeric.shape(),
                    "relative error: shapes differ ",
                    ShapeToString(analytic.shape()), " vs ",
                    ShapeToString(numeric.shape()));
  double worst = 0.0;
  for (int64_t i = 0; i < analytic.numel(); ++i) {
    const double err =
        std::abs(analytic[i] - numeric[i]) / (std::abs(numeric[i]) + 1e-8);
    if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace sek
