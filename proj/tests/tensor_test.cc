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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sek/tensor/autodiff.h"
#include "sek/tensor/ops.h"

namespace sek {
namespace {

using TD = Tensor<double>;

TD RandomTensor(Shape shape, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return TD::Uniform(std::move(shape), rng, -1.0, 1.0);
}

TEST(TensorTest, ConstructionChecksValueCount) {
  EXPECT_THROW(TD({2, 3}, std::vector<double>(5)), ShapeError);
  TD t({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.numel(), 6);
  EXPECT_EQ(t.dim(-1), 3);
}

TEST(TensorTest, CopiesShareStorageAndCloneDoesNot) {
  TD a = TD::Full({3}, 1.0);
  TD b = a;
  TD c = a.Clone();
  b[0] = 5.0;
  EXPECT_EQ(a[0], 5.0);
  EXPECT_EQ(c[0], 1.0);
}

TEST(TensorTest, MatMulMatchesLoops) {
  TD a = RandomTensor({2, 3, 4}, 1), b = RandomTensor({4, 5}, 2);
  TD c = MatMul(a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 3, 5}));
  for (int r = 0; r < 6; ++r) {
    for (int n = 0; n < 5; ++n) {
      double ref = 0;
      for (int k = 0; k < 4; ++k) ref += a[r * 4 + k] * b[k * 5 + n];
      EXPECT_NEAR(c[r * 5 + n], ref, 1e-12);
    }
  }
  EXPECT_THROW(MatMul(a, RandomTensor({3, 5}, 3)), ShapeError);
}

TEST(TensorTest, BatchMatMulTransposeMatchesPlain) {
  TD a = RandomTensor({2, 3, 4}, 4), b = RandomTensor({2, 5, 4}, 5);
  TD bt = Permute(b, {0, 2, 1});
  TD x = BatchMatMul(a, b, true), y = BatchMatMul(a, bt);
  for (int64_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(x[i], y[i], 1e-12);
}

TEST(TensorTest, BroadcastAdd) {
  TD a = RandomTensor({2, 3}, 6), b({3}, {10, 20, 30});
  TD c = Add(a, b);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(c[i * 3 + j], a[i * 3 + j] + b[j]);
  }
  EXPECT_THROW(Add(a, RandomTensor({2}, 7)), ShapeError);
}

TEST(TensorTest, SoftmaxRowsSumToOneAndAreShiftInvariant) {
  TD x = RandomTensor({3, 7}, 8);
  TD p = Softmax(x), q = Softmax(AddScalar(x, 100.0));
  for (int r = 0; r < 3; ++r) {
    double sum = 0;
    for (int j = 0; j < 7; ++j) {
      sum += p[r * 7 + j];
      EXPECT_NEAR(p[r * 7 + j], q[r * 7 + j], 1e-12);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(TensorTest, LayerNormZeroMeanUnitVariance) {
  TD x = RandomTensor({4, 16}, 9);
  TD y = LayerNorm(x, TD(), TD(), 0.0);
  TD mean = Mean(y, {1}), var = Variance(y, {1});
  for (int r = 0; r < 4; ++r) {
    EXPECT_NEAR(mean[r], 0.0, 1e-12);
    EXPECT_NEAR(var[r], 1.0, 1e-10);
  }
}

TEST(TensorTest, BatchNormUpdatesRunningStatistics) {
  TD x({4, 1}, {1, 2, 3, 6});
  TD gamma = TD::Full({1}, 1.0), beta = TD::Full({1}, 0.0);
  TD rm = TD::Full({1}, 0.0), rv = TD::Full({1}, 1.0);
  BatchNormOptions opts;
  opts.momentum = 0.5;
  BatchNorm(x, gamma, beta, rm, rv, opts);
  EXPECT_NEAR(rm[0], 0.5 * 3.0, 1e-12);
  EXPECT_NEAR(rv[0], 0.5 * 1.0 + 0.5 * (14.0 / 3.0), 1e-12);  // unbiased 14/3
  opts.training = false;
  TD y = BatchNorm(x, gamma, beta, rm, rv, opts);
  EXPECT_NEAR(y[0], (1.0 - rm[0]) / std::sqrt(rv[0] + opts.eps), 1e-12);
}

TEST(TensorTest, DepthwiseConvMatchesLoops) {
  const int B = 2, T = 6, C = 3, K = 3;
  TD x = RandomTensor({B, T, C}, 10), w = RandomTensor({C, K}, 11), b = RandomTensor({C}, 12);
  TD y = DepthwiseConv1d(x, w, b);
  for (int n = 0; n < B; ++n) {
    for (int t = 0; t < T; ++t) {
      for (int c = 0; c < C; ++c) {
        double ref = b[c];
        for (int k = 0; k < K; ++k) {
          int s = t + k - K / 2;
          if (s >= 0 && s < T) ref += w[c * K + k] * x[(n * T + s) * C + c];
        }
        EXPECT_NEAR(y[(n * T + t) * C + c], ref, 1e-12);
      }
    }
  }
}

TEST(TensorTest, Conv2dMatchesLoops) {
  const int B = 1, Ci = 2, Co = 3, H = 7, W = 6, K = 3;
  TD x = RandomTensor({B, Ci, H, W}, 13), w = RandomTensor({Co, Ci, K, K}, 14);
  TD b = RandomTensor({Co}, 15);
  Conv2dOptions opts{2, 1, 1, 0};
  TD y = Conv2d(x, w, b, opts);
  const int Ho = (H + 2 - K) / 2 + 1, Wo = W - K + 1;
  ASSERT_EQ(y.shape(), (Shape{B, Co, Ho, Wo}));
  for (int o = 0; o < Co; ++o) {
    for (int i = 0; i < Ho; ++i) {
      for (int j = 0; j < Wo; ++j) {
        double ref = b[o];
        for (int c = 0; c < Ci; ++c) {
          for (int u = 0; u < K; ++u) {
            for (int v = 0; v < K; ++v) {
              int r = i * 2 + u - 1, s = j + v;
              if (r < 0 || r >= H) continue;
              ref += w[((o * Ci + c) * K + u) * K + v] * x[(c * H + r) * W + s];
            }
          }
        }
        EXPECT_NEAR(y[(o * Ho + i) * Wo + j], ref, 1e-12);
      }
    }
  }
}

TEST(TensorTest, MaxPoolDropsOddTail) {
  TD x({1, 3, 5}, {1, 9, 2, 3, 7,  //
                   4, 0, 8, 1, 6,  //
                   5, 5, 5, 5, 5});
  TD y = MaxPool2x2(x);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 2}));
  EXPECT_EQ(y[0], 9);
  EXPECT_EQ(y[1], 8);
}

TEST(TensorTest, RollPadSliceRoundTrip) {
  TD x = RandomTensor({2, 4, 5}, 16);
  TD back = Roll2d(Roll2d(x, 1, 3, 2, -2), 1, -3, 2, 2);
  for (int64_t i = 0; i < x.numel(); ++i) EXPECT_EQ(back[i], x[i]);
  TD rolled = Roll2d(x, 1, 1, 2, 0);
  EXPECT_EQ(rolled[1 * 5 + 2], x[0 * 5 + 2]);
  TD padded = Pad(x, {{0, 0}, {1, 2}, {0, 3}});
  ASSERT_EQ(padded.shape(), (Shape{2, 7, 8}));
  TD crop = Slice(Slice(padded, 1, 1, 4), 2, 0, 5);
  for (int64_t i = 0; i < x.numel(); ++i) EXPECT_EQ(crop[i], x[i]);
}

TEST(TensorTest, RelativeShiftIndexing) {
  const int Tq = 3;
  TD x = RandomTensor({2, Tq, 2 * Tq - 1}, 17);
  TD y = RelativeShift(x);
  for (int b = 0; b < 2; ++b) {
    for (int i = 0; i < Tq; ++i) {
      for (int j = 0; j < Tq; ++j) {
        EXPECT_EQ(y[(b * Tq + i) * Tq + j], x[(b * Tq + i) * (2 * Tq - 1) + j - i + Tq - 1]);
      }
    }
  }
}

TEST(TensorTest, SoftmaxCrossEntropyValue) {
  TD logits({2, 3}, {1, 2, 3, 0, 0, 0});
  double l0 = -std::log(std::exp(1) / (std::exp(1) + std::exp(2) + std::exp(3)));
  double l1 = std::log(3.0);
  EXPECT_NEAR(SoftmaxCrossEntropy(logits, {0, 2}).item(), 0.5 * (l0 + l1), 1e-12);
  EXPECT_THROW(SoftmaxCrossEntropy(logits, {0, 3}), ValidationError);
}

TEST(AutodiffTest, ProductRuleGradient) {
  TD a({3}, {1, 2, 3}), b({3}, {4, 5, 6});
  a.set_requires_grad();
  b.set_requires_grad();
  Backward(SumAll(Mul(Mul(a, b), a)));  // sum a^2 b
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(a.grad()[i], 2 * a[i] * b[i]);
    EXPECT_DOUBLE_EQ(b.grad()[i], a[i] * a[i]);
  }
}

TEST(AutodiffTest, GradientsAccumulateUntilZeroGrad) {
  TD a({2}, {1, 2});
  a.set_requires_grad();
  Backward(SumAll(Scale(a, 3.0)));
  Backward(SumAll(Scale(a, 3.0)));
  EXPECT_DOUBLE_EQ(a.grad()[0], 6.0);
  a.ZeroGrad();
  EXPECT_FALSE(a.has_grad());
}

TEST(AutodiffTest, SharedSubexpressionVisitedOnce) {
  TD a({1}, {2.0});
  a.set_requires_grad();
  TD s = Square(a);
  Backward(SumAll(Add(s, s)));  // 2 a^2
  EXPECT_DOUBLE_EQ(a.grad()[0], 8.0);
}

TEST(AutodiffTest, NoGradGuardSkipsRecording) {
  TD a({2}, {1, 2});
  a.set_requires_grad();
  TD y;
  {
    NoGradGuard guard;
    y = Square(a);
  }
  EXPECT_TRUE(y.is_leaf());
  EXPECT_THROW(Backward(SumAll(y)), ValidationError);
}

TEST(AutodiffTest, BackwardRequiresScalar) {
  TD a({2}, {1, 2});
  a.set_requires_grad();
  EXPECT_THROW(Backward(Square(a)), ShapeError);
}

TEST(AutodiffTest, FloatAndDoubleAgree) {
  TD x = RandomTensor({3, 4}, 18);
  Tensor<float> xf = Cast<float>(x);
  TD yd = Softmax(Tanh(x));
  Tensor<float> yf = Softmax(Tanh(xf));
  for (int64_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(yf[i], yd[i], 1e-6);
}

}  // namespace
}  // namespace sek
