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
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "sek/head/head.h"
#include "sek/tensor/ops.h"

namespace sek::head {
namespace {

using TD = Tensor<double>;

TEST(AMSoftmaxTest, ClosedFormAtUnitTargetCosine) {
  // cos(theta_y) = 1, cos(theta_other) = 0.
  TD emb({1, 2}, {3.0, 0.0});
  TD weight({2, 2}, {2.0, 0.0, 0.0, 5.0});
  double loss = AMSoftmaxLoss(emb, weight, {0}, 0.2, 30.0).item();
  double expected = std::log1p(std::exp(-24.0));
  EXPECT_LT(std::abs(loss - expected) / expected, 1e-12);
}

TEST(AMSoftmaxTest, ZeroMarginUnitScaleIsCrossEntropyOfCosines) {
  std::mt19937_64 rng(1);
  TD emb = TD::Randn({4, 6}, rng), weight = TD::Randn({5, 6}, rng);
  std::vector<int64_t> labels = {0, 3, 4, 1};
  double loss = AMSoftmaxLoss(emb, weight, labels, 0.0, 1.0).item();
  double ref = 0;
  for (int r = 0; r < 4; ++r) {
    std::vector<double> cos(5);
    double ne = 0;
    for (int d = 0; d < 6; ++d) ne += emb[r * 6 + d] * emb[r * 6 + d];
    for (int k = 0; k < 5; ++k) {
      double dot = 0, nw = 0;
      for (int d = 0; d < 6; ++d) {
        dot += emb[r * 6 + d] * weight[k * 6 + d];
        nw += weight[k * 6 + d] * weight[k * 6 + d];
      }
      cos[k] = dot / std::sqrt(ne * nw);
    }
    double z = 0;
    for (double c : cos) z += std::exp(c);
    ref += -(cos[labels[r]] - std::log(z));
  }
  EXPECT_NEAR(loss, ref / 4, 1e-9);
}

TEST(AMSoftmaxTest, MarginOnlyTouchesTargetLogit) {
  TD emb({1, 2}, {1.0, 1.0});
  TD weight({3, 2}, {1.0, 0.0, 0.0, 1.0, -1.0, 0.0});
  TD a = AMSoftmaxLogits(emb, weight, {1}, 0.0, 10.0);
  TD b = AMSoftmaxLogits(emb, weight, {1}, 0.3, 10.0);
  EXPECT_NEAR(a[0], b[0], 1e-12);
  EXPECT_NEAR(a[1] - b[1], 3.0, 1e-12);
  EXPECT_NEAR(a[2], b[2], 1e-12);
  EXPECT_THROW(AMSoftmaxLogits(emb, weight, {3}, 0.2, 30.0), ValidationError);
}

class AspTest : public ::testing::Test {
 protected:
  AspTest() : rng_(2), pool_(nn::ParamScope<double>(&store_, &rng_), 3, 4) {}
  nn::ParameterStore<double> store_;
  std::mt19937_64 rng_;
  AttentiveStatsPooling<double> pool_;
};

TEST_F(AspTest, ConstantInputGivesInputMeanAndZeroSpread) {
  TD x({1, 5, 3});
  for (int t = 0; t < 5; ++t)
    for (int c = 0; c < 3; ++c) x[t * 3 + c] = 0.5 * c - 1.0;
  TD out = pool_.Forward(x);
  ASSERT_EQ(out.shape(), (Shape{1, 6}));
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(out[c], 0.5 * c - 1.0, 1e-12);
    EXPECT_LE(out[3 + c], std::sqrt(kVarianceFloor) * (1 + 1e-9));
  }
}

TEST_F(AspTest, ZeroAttentionVectorGivesPlainStatistics) {
  for (double& v : pool_.attention_vector().data()) v = 0.0;
  TD x = TD::Randn({2, 7, 3}, rng_);
  TD weights;
  TD out = pool_.Forward(x, &weights);
  for (int64_t i = 0; i < weights.numel(); ++i) EXPECT_NEAR(weights[i], 1.0 / 7, 1e-15);
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < 3; ++c) {
      double mean = 0;
      for (int t = 0; t < 7; ++t) mean += x[(b * 7 + t) * 3 + c] / 7;
      double var = 0;
      for (int t = 0; t < 7; ++t) {
        double d = x[(b * 7 + t) * 3 + c] - mean;
        var += d * d / 7;
      }
      EXPECT_NEAR(out[b * 6 + c], mean, 1e-10);
      EXPECT_NEAR(out[b * 6 + 3 + c], std::sqrt(var), 1e-10);
    }
  }
}

TEST_F(AspTest, WeightsFormADistributionOverTime) {
  TD x = TD::Randn({2, 6, 3}, rng_);
  TD weights;
  pool_.Forward(x, &weights);
  ASSERT_EQ(weights.shape(), (Shape{2, 6, 1}));
  for (int b = 0; b < 2; ++b) {
    double sum = 0;
    for (int t = 0; t < 6; ++t) sum += weights[b * 6 + t];
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_THROW(pool_.Forward(TD::Randn({1, 4, 5}, rng_)), ShapeError);
}

TEST(EmbeddingHeadTest, OutputWidth) {
  nn::ParameterStore<double> store;
  std::mt19937_64 rng(3);
  EmbeddingHead<double> head(nn::ParamScope<double>(&store, &rng), 10, 7, 4);
  EXPECT_EQ(head.Forward(TD::Randn({3, 5, 10}, rng)).shape(), (Shape{3, 7}));
}

TEST(ScoringTest, CosineScoreEdgeCases) {
  std::vector<float> a = {1, 0, 0}, b = {2, 0, 0}, c = {0, 3, 0}, z = {0, 0, 0};
  EXPECT_FLOAT_EQ(CosineScore(a, b), 1.0);
  EXPECT_FLOAT_EQ(CosineScore(a, c), 0.0);
  EXPECT_EQ(CosineScore(a, z), 0.0);
  std::vector<float> neg = {-1, 0, 0};
  EXPECT_GE(CosineScore(b, neg), -1.0);
  EXPECT_THROW(CosineScore(a, std::vector<float>{1, 2}), ShapeError);
}

TEST(EmbeddingStoreTest, LookupAndRoundTrips) {
  EmbeddingStore store;
  store.Add("b", {1.5f, -2.25f, 1e-7f});
  store.Add("a", {0.1f, 0.2f, 0.3f});
  EXPECT_EQ(store.Get("a")[1], 0.2f);
  try {
    store.Get("zzz");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("zzz"), std::string::npos);
  }
  EXPECT_THROW(store.Add("a", {1, 2, 3}), ValidationError);

  auto dir = std::filesystem::temp_directory_path() / "sek_head_test";
  std::filesystem::create_directories(dir);
  WriteEmbeddingText((dir / "emb.txt").string(), store);
  EmbeddingStore back = ReadEmbeddingText((dir / "emb.txt").string());
  ASSERT_EQ(back.ids, store.ids);
  EXPECT_EQ(back.vectors, store.vectors);

  WriteEmbeddingBinary((dir / "one.seke").string(), store.vectors[0]);
  EXPECT_EQ(ReadEmbeddingBinary((dir / "one.seke").string()), store.vectors[0]);
  EXPECT_THROW(ReadEmbeddingBinary((dir / "emb.txt").string()), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sek::head
