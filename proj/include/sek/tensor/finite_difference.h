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

#ifndef SEK_TENSOR_FINITE_DIFFERENCE_H_
#define SEK_TENSOR_FINITE_DIFFERENCE_H_

#include <functional>

#include "sek/tensor/tensor.h"

namespace sek {

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every
// coordinate of x. Throws ShapeError if f returns a non-scalar.
Tensor<double> FiniteDifferenceGradient(
    const std::function<Tensor<double>(const Tensor<double>&)>& f,
    const Tensor<double>& x, double h = 1e-5);

// Same, but perturbs `param` in place and evaluates the closure, which
// captures it. Values are restored before returning.
Tensor<double> FiniteDifferenceGradientInPlace(
    const std::function<Tensor<double>()>& f, Tensor<double>& param,
    double h = 1e-5);

// max_i |analytic_i - numeric_i| / (|numeric_i| + 1e-8).
double MaxRelativeError(const Tensor<double>& analytic,
                        const Tensor<double>& numeric);

}  // namespace sek

#endif  // SEK_TENSOR_FINITE_DIFFERENCE_H_
