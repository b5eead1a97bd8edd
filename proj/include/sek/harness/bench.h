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

#ifndef SEK_HARNESS_BENCH_H_
#define SEK_HARNESS_BENCH_H_

#include <cstdint>
#include <ostream>
#include <vector>

#include "sek/swin/sst.h"

namespace sek::harness {

struct BenchOptions {
  std::vector<int64_t> sizes = {400, 800, 1600, 3200};  // tokens f * t
  std::vector<swin::AttentionMode> modes = {swin::AttentionMode::kWindowed,
                                            swin::AttentionMode::kGlobal};
  int64_t freq = 20;  // grid height along frequency; t = size / freq
  int64_t channels = 96;
  int64_t heads = 3;
  int64_t window = 5;
  int repetitions = 5;
  uint64_t seed = 1;

  void Validate() const;
};

struct BenchRow {
  swin::AttentionMode mode = swin::AttentionMode::kWindowed;
  int64_t tokens = 0, freq = 0, time = 0;
  double cost = 0.0;            // analytic, from AttentionCost
  double median_seconds = 0.0;  // forward pass wall time
  int repetitions = 0;
};

// Times one forward pass of windowed or global self-attention over each grid.
std::vector<BenchRow> BenchAttention(const BenchOptions& opts);

void WriteBenchCsv(std::ostream& out, const std::vector<BenchRow>& rows);

// Least-squares slope of log(median_seconds) against log(tokens) over the
// rows of `mode`.
double FitTimeExponent(const std::vector<BenchRow>& rows, swin::AttentionMode mode);

}  // namespace sek::harness

#endif  // SEK_HARNESS_BENCH_H_
