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

#ifndef SEK_HARNESS_GRADCHECK_H_
#define SEK_HARNESS_GRADCHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "sek/tensor/tensor.h"

namespace sek::harness {

// Backward() of the scalar closure against central differences for every
// coordinate of every leaf; returns the worst relative error
// |a - n| / (|n| + 1e-8).
double CheckGradients(const std::function<Tensor<double>()>& loss,
                      const std::vector<Tensor<double>>& leaves, double h = 1e-5);

struct GradCheckUnit {
  std::string name;
  std::string scope;  // kernels, blocks, le_conformer, sst or head
  std::function<double()> run;
};

struct GradCheckRow {
  std::string name;
  std::string scope;
  double max_rel_error = 0;
  bool passed = false;
  double seconds = 0;
  std::string error;  // non-empty if the unit threw
};

// Every built-in check.
const std::vector<GradCheckUnit>& GradCheckRegistry();

bool IsGradCheckScope(const std::string& scope);

// Runs the units matching `scope` ("all" matches everything). Failures are
// reported as rows, never thrown.
std::vector<GradCheckRow> RunGradCheck(const std::vector<GradCheckUnit>& units,
                                       const std::string& scope,
                                       double tolerance = 1e-4);

}  // namespace sek::harness

#endif  // SEK_HARNESS_GRADCHECK_H_
