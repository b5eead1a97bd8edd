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

#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "sek/conformer/le_conformer.h"
#include "sek/head/head.h"
#include "sek/tensor/ops.h"

namespace sek::conformer {
namespace {

using TD = Tensor<double>;

LEConformerConfig Tiny() {
  LEConformerConfig c;
  c.feature_dim = 8;
  c.vgg_channels1 = 2;
  c.vgg_channels2 = 3;
  c.blocks = 3;
  c.heads = 2;
  c.model_dim = 16;
  c.conv_kernel = 5;
  c.ffn_hidden = 32;
  c.se_reduction = 4;
  return c;
}

std::set<std::string> Registry(const LEConformerConfig& cfg) {
  nn::ParameterStore<float> store;
  std::mt19937_64 rng(1);
  LEConformerEncoder<float> enc(nn::ParamScope<float>(&store, &rng), cfg);
  auto names = store.Names();
  return {names.begin(), names.end()};
}

TEST(LEConformerConfigTest, PaperConstants) {
  auto c = LEConformerConfig::Paper();
  EXPECT_EQ(c.blocks, 6);
  EXPECT_EQ(c.heads, 4);
  EXPECT_EQ(c.model_dim, 512);
  EXPECT_EQ(c.conv_kernel, 15);
  EXPECT_EQ(c.ffn_hidden, 2048);
  EXPECT_EQ(c.feature_dim, 80);
  EXPECT_EQ(c.aggregation, Aggregation::kConcat);
  EXPECT_EQ(c.output_dim(), 6 * 512);
  EXPECT_NO_THROW(LEConformerConfig::Toy().Validate());
}

TEST(LEConformerConfigTest, ValidationRejectsBadFields) {
  auto c = Tiny();
  c.heads = 3;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = Tiny();
  c.conv_kernel = 4;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = Tiny();
  c.blocks = 0;
  EXPECT_THROW(c.Validate(), ValidationError);
  EXPECT_THROW(ParseAggregation("max"), ValidationError);
  for (auto a : {Aggregation::kConcat, Aggregation::kWeightedAverage, Aggregation::kLastOnly})
    EXPECT_EQ(ParseAggregation(AggregationName(a)), a);
}

TEST(LEConformerTest, PaperScaleShapePipeline) {
  // 2.0 s of 10 ms frames.
  auto cfg = LEConformerConfig::Paper();
  nn::ParameterStore<float> store;
  std::mt19937_64 rng(2);
  nn::ParamScope<float> root(&store, &rng);
  LEConformerEncoder<float> enc(root.Sub("encoder"), cfg);
  head::EmbeddingHead<float> head(root.Sub("head"), cfg.output_dim(), 256, 128);
  NoGradGuard no_grad;
  auto x = Tensor<float>::Randn({1, 200, 80}, rng);
  auto blocks = enc.BlockOutputs(x, false);
  ASSERT_EQ(blocks.size(), 6u);
  for (const auto& b : blocks) EXPECT_EQ(b.shape(), (Shape{1, 50, 512}));
  auto frames = AggregateBlocks(blocks, cfg.aggregation, Tensor<float>());
  EXPECT_EQ(frames.shape(), (Shape{1, 50, 3072}));
  auto pooled = head.pooling().Forward(frames);
  EXPECT_EQ(pooled.shape(), (Shape{1, 6144}));
  EXPECT_EQ(head.embedding().Forward(pooled).shape(), (Shape{1, 256}));
}

TEST(LEConformerTest, SubsamplerQuartersTimeAndRejectsShortInput) {
  auto cfg = Tiny();
  nn::ParameterStore<double> store;
  std::mt19937_64 rng(3);
  VggSubsampler<double> vgg(nn::ParamScope<double>(&store, &rng), cfg);
  EXPECT_EQ(vgg.Forward(TD::Randn({2, 17, 8}, rng)).shape(), (Shape{2, 4, 16}));
  EXPECT_THROW(vgg.Forward(TD::Randn({1, 3, 8}, rng)), ValidationError);
  EXPECT_THROW(vgg.Forward(TD::Randn({1, 16, 9}, rng)), ShapeError);
}

TEST(LEConformerTest, AggregationModes) {
  std::mt19937_64 rng(4);
  std::vector<TD> outs;
  for (int i = 0; i < 3; ++i) outs.push_back(TD::Randn({1, 2, 4}, rng));
  TD cat = AggregateBlocks(outs, Aggregation::kConcat, TD());
  ASSERT_EQ(cat.shape(), (Shape{1, 2, 12}));
  EXPECT_EQ(cat[4], outs[1][0]);
  TD last = AggregateBlocks(outs, Aggregation::kLastOnly, TD());
  for (int64_t i = 0; i < last.numel(); ++i) EXPECT_EQ(last[i], outs[2][i]);
  // Softmax over logits (0, log 2, log 5) gives weights (1, 2, 5) / 8.
  TD logits({3}, {0.0, std::log(2.0), std::log(5.0)});
  TD avg = AggregateBlocks(outs, Aggregation::kWeightedAverage, logits);
  ASSERT_EQ(avg.shape(), (Shape{1, 2, 4}));
  for (int64_t i = 0; i < avg.numel(); ++i) {
    EXPECT_NEAR(avg[i], (outs[0][i] + 2 * outs[1][i] + 5 * outs[2][i]) / 8, 1e-12);
  }
}

TEST(LEConformerTest, BlockPreservesShapeAndEvalIsDeterministic) {
  auto cfg = Tiny();
  nn::ParameterStore<double> store;
  std::mt19937_64 rng(5);
  LEConformerBlock<double> block(nn::ParamScope<double>(&store, &rng), cfg);
  TD z = TD::Randn({2, 6, 16}, rng);
  TD a = block.Forward(z, false), b = block.Forward(z, false);
  EXPECT_EQ(a.shape(), z.shape());
  for (int64_t i = 0; i < a.numel(); ++i) EXPECT_EQ(a[i], b[i]);
  // The closing LayerNorm leaves every frame zero-mean.
  TD mean = Mean(a, {2});
  for (int64_t i = 0; i < mean.numel(); ++i) EXPECT_NEAR(mean[i], 0.0, 1e-12);
}

TEST(LEConformerTest, AblationRegistriesAreDistinct) {
  auto base = Tiny();
  auto no_se = base, no_dw = base, last = base, avg = base;
  no_se.enable_se = false;
  no_dw.enable_dwconv = false;
  last.aggregation = Aggregation::kLastOnly;
  avg.aggregation = Aggregation::kWeightedAverage;
  auto rb = Registry(base), rse = Registry(no_se), rdw = Registry(no_dw);
  auto rlast = Registry(last), ravg = Registry(avg);
  EXPECT_NE(rb, rse);
  EXPECT_NE(rb, rdw);
  EXPECT_NE(rse, rdw);
  EXPECT_EQ(ravg.size(), rb.size() + 1);
  EXPECT_TRUE(ravg.count("aggregation_weights"));
  EXPECT_FALSE(rb.count("aggregation_weights"));
  // Concat and last-only own the same tensors; they differ in output width.
  EXPECT_EQ(rlast, rb);
  EXPECT_EQ(last.output_dim(), base.model_dim);
  EXPECT_EQ(base.output_dim(), base.blocks * base.model_dim);
}

TEST(LEConformerTest, EncoderOutputWidthFollowsAggregation) {
  for (auto mode : {Aggregation::kConcat, Aggregation::kWeightedAverage,
                    Aggregation::kLastOnly}) {
    auto cfg = Tiny();
    cfg.aggregation = mode;
    nn::ParameterStore<double> store;
    std::mt19937_64 rng(6);
    LEConformerEncoder<double> enc(nn::ParamScope<double>(&store, &rng), cfg);
    EXPECT_EQ(enc.Forward(TD::Randn({1, 16, 8}, rng), false).shape(),
              (Shape{1, 4, cfg.output_dim()}));
  }
}

}  // namespace
}  // namespace sek::conformer
