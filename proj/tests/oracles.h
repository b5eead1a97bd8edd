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

// Slow reference implementations shared by the unit tests and the
// acceptance binary.

#ifndef SEK_TESTS_ORACLES_H_
#define SEK_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sek/eval/metrics.h"
#include "sek/nn/parameters.h"
#include "sek/tensor/tensor.h"

namespace sek::oracle {

inline const Tensor<double>& Param(const nn::ParameterStore<double>& store,
                                   const std::string& name) {
  const auto* e = store.Find(name);
  if (e == nullptr) throw std::runtime_error("missing parameter " + name);
  return e->tensor;
}

// x [C_in] row times weight [C_in, C_out] plus optional bias.
inline std::vector<double> Affine(const double* x, const Tensor<double>& w,
                                  const Tensor<double>* b) {
  const int64_t in = w.dim(0), out = w.dim(1);
  std::vector<double> y(out, 0.0);
  for (int64_t o = 0; o < out; ++o) {
    double acc = b ? (*b)[o] : 0.0;
    for (int64_t i = 0; i < in; ++i) acc += x[i] * w[i * out + o];
    y[o] = acc;
  }
  return y;
}

// Direct evaluation of (shifted) window attention on an H x W grid: the
// grid, padded up to whole windows, is cut at `shift`, shift + M, ... along
// each axis, and every valid token attends to the valid tokens of its own
// cell, with the learned bias of their 2-D offset.
inline Tensor<double> NaiveWindowAttention(const Tensor<double>& grid,
                                           const nn::ParameterStore<double>& store,
                                           const std::string& prefix, int64_t heads,
                                           int64_t m, int64_t shift) {
  const int64_t B = grid.dim(0), H = grid.dim(1), W = grid.dim(2), C = grid.dim(3);
  const int64_t dk = C / heads, span = 2 * m - 1;
  const Tensor<double>& wq = Param(store, prefix + ".query.weight");
  const Tensor<double>& bq = Param(store, prefix + ".query.bias");
  const Tensor<double>& wk = Param(store, prefix + ".key.weight");
  const Tensor<double>& wv = Param(store, prefix + ".value.weight");
  const Tensor<double>& bv = Param(store, prefix + ".value.bias");
  const Tensor<double>& wo = Param(store, prefix + ".output.weight");
  const Tensor<double>& bo = Param(store, prefix + ".output.bias");
  const Tensor<double>& table = Param(store, prefix + ".relative_bias");
  auto cell = [&](int64_t p) { return p < shift ? int64_t{-1} : (p - shift) / m; };

  Tensor<double> out({B, H, W, C});
  for (int64_t b = 0; b < B; ++b) {
    std::vector<std::vector<double>> q(H * W), k(H * W), v(H * W);
    for (int64_t p = 0; p < H * W; ++p) {
      const double* x = grid.data().data() + (b * H * W + p) * C;
      q[p] = Affine(x, wq, &bq);
      k[p] = Affine(x, wk, nullptr);
      v[p] = Affine(x, wv, &bv);
    }
    for (int64_t i = 0; i < H; ++i) {
      for (int64_t j = 0; j < W; ++j) {
        std::vector<double> ctx(C, 0.0);
        for (int64_t h = 0; h < heads; ++h) {
          std::vector<std::pair<int64_t, double>> scores;
          double top = -1e300;
          for (int64_t i2 = 0; i2 < H; ++i2) {
            for (int64_t j2 = 0; j2 < W; ++j2) {
              if (cell(i2) != cell(i) || cell(j2) != cell(j)) continue;
              double s = 0;
              for (int64_t d = 0; d < dk; ++d)
                s += q[i * W + j][h * dk + d] * k[i2 * W + j2][h * dk + d];
              s /= std::sqrt(static_cast<double>(dk));
              int64_t idx = (i - i2 + m - 1) * span + (j - j2 + m - 1);
              s += table[idx * heads + h];
              scores.push_back({i2 * W + j2, s});
              top = std::max(top, s);
            }
          }
          double z = 0;
          for (auto& [p, s] : scores) z += std::exp(s - top);
          for (auto& [p, s] : scores) {
            double a = std::exp(s - top) / z;
            for (int64_t d = 0; d < dk; ++d) ctx[h * dk + d] += a * v[p][h * dk + d];
          }
        }
        auto y = Affine(ctx.data(), wo, &bo);
        for (int64_t c = 0; c < C; ++c) out[((b * H + i) * W + j) * C + c] = y[c];
      }
    }
  }
  return out;
}

struct Rates {
  double frr, far;
};

// Error rates at threshold t counted directly from every trial.
inline Rates RatesAt(const eval::ScoreSet& s, double t) {
  double miss = 0, fa = 0, nt = 0, nn = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.is_target[i]) {
      ++nt;
      miss += s.scores[i] < t;
    } else {
      ++nn;
      fa += s.scores[i] >= t;
    }
  }
  return {miss / nt, fa / nn};
}

inline std::vector<double> Candidates(const eval::ScoreSet& s) {
  std::vector<double> c = s.scores;
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  c.push_back(std::numeric_limits<double>::infinity());
  return c;
}

inline double BruteEer(const eval::ScoreSet& s) {
  std::vector<double> c = Candidates(s);
  for (size_t i = 0; i < c.size(); ++i) {
    Rates r = RatesAt(s, c[i]);
    if (r.frr < r.far) continue;
    if (i == 0) return (r.frr + r.far) / 2;
    Rates p = RatesAt(s, c[i - 1]);
    // Intersection of the segment (p.frr, p.far) -> (r.frr, r.far) with frr == far.
    const double a = (p.far - p.frr) / ((p.far - p.frr) - (r.far - r.frr));
    return p.frr + a * (r.frr - p.frr);
  }
  return 1.0;
}

inline double BruteMinDcf(const eval::ScoreSet& s, double pt) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : Candidates(s)) {
    Rates r = RatesAt(s, t);
    best = std::min(best, (pt * r.frr + (1 - pt) * r.far) / std::min(pt, 1 - pt));
  }
  return best;
}

}  // namespace sek::oracle

#endif  // SEK_TESTS_ORACLES_H_
