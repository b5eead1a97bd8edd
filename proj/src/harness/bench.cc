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

#include "sek/harness/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "sek/base/error.h"
#include "sek/nn/attention.h"
#include "sek/tensor/ops.h"

namespace sek::harness {

namespace {

const char* ModeName(swin::AttentionMode m) {
  return m == swin::AttentionMode::kGlobal ? "global" : "windowed";
}

template <typename F>
double MedianSeconds(F&& fn, int repetitions) {
  fn();  // warm-up
  std::vector<double> times;
  for (int r = 0; r < repetitions; ++r) {
    auto start = std::chrono::steady_clock::now();
    fn();
    times.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  size_t n = times.size();
  return n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

}  // namespace

void BenchOptions::Validate() const {
  Check<ValidationError>(!sizes.empty() && !modes.empty(), "bench: nothing to run");
  Check<ValidationError>(freq > 0 && channels > 0 && heads > 0 && window > 0,
                         "bench: dimensions must be positive");
  Check<ValidationError>(channels % heads == 0, "bench: channels must divide by heads");
  Check<ValidationError>(repetitions >= 5, "bench: need at least 5 repetitions");
  for (int64_t s : sizes) {
    Check<ValidationError>(s > 0 && s % freq == 0, "bench: size ", s,
                           " must be a positive multiple of ", freq);
  }
}

std::vector<BenchRow> BenchAttention(const BenchOptions& opts) {
  opts.Validate();
  using swin::AttentionMode;
  std::mt19937_64 rng(opts.seed);
  nn::ParameterStore<float> store;
  nn::ParamScope<float> root(&store, &rng);
  swin::WindowAttention<float> windowed(root.Sub("windowed"), opts.channels, opts.heads,
                                        opts.window, 0);
  nn::MultiHeadSelfAttention<float> global(
      root.Sub("global"), nn::MSAConfig{opts.channels, opts.heads,
                                        nn::RelativePosition::kNone, 0});
  NoGradGuard no_grad;

  std::vector<BenchRow> rows;
  for (int64_t size : opts.sizes) {
    const int64_t t = size / opts.freq;
    auto grid = Tensor<float>::Uniform({1, t, opts.freq, opts.channels}, rng, -1.f, 1.f);
    auto tokens = Reshape(grid, {1, size, opts.channels});
    for (AttentionMode mode : opts.modes) {
      BenchRow row;
      row.mode = mode;
      row.tokens = size;
      row.freq = opts.freq;
      row.time = t;
      row.cost = swin::AttentionCost(opts.freq, t, opts.channels, opts.window, mode);
      row.repetitions = opts.repetitions;
      if (mode == AttentionMode::kWindowed) {
        row.median_seconds = MedianSeconds([&] { windowed.Forward(grid); }, opts.repetitions);
      } else {
        row.median_seconds = MedianSeconds([&] { global.Forward(tokens); }, opts.repetitions);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void WriteBenchCsv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "mode,tokens,freq,time,cost,median_seconds,repetitions\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.cost);
    out << ModeName(r.mode) << ',' << r.tokens << ',' << r.freq << ',' << r.time << ','
        << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.9g", r.median_seconds);
    out << buf << ',' << r.repetitions << '\n';
  }
}

double FitTimeExponent(const std::vector<BenchRow>& rows, swin::AttentionMode mode) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (r.mode != mode) continue;
    xs.push_back(std::log(static_cast<double>(r.tokens)));
    ys.push_back(std::log(r.median_seconds));
  }
  Check<ValidationError>(xs.size() >= 2, "exponent fit needs at least two sizes");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  Check<ValidationError>(sxx > 0, "exponent fit needs distinct sizes");
  return sxy / sxx;
}

}  // namespace sek::harness
