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
#include <set>

#include <gtest/gtest.h>

#include "sek/swin/sst.h"
#include "sek/tensor/ops.h"
#include "oracles.h"

namespace sek::swin {
namespace {

using TD = Tensor<double>;

TD RandomTensor(Shape shape, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return TD::Uniform(std::move(shape), rng, -1.0, 1.0);
}

TEST(SSTConfigTest, PaperConstantsAndStageGrids) {
  auto c = SSTConfig::Paper();
  EXPECT_EQ(c.patch, 7);
  EXPECT_EQ(c.stride, 4);
  EXPECT_EQ(c.embed_dim, 96);
  EXPECT_EQ(c.window, 5);
  EXPECT_EQ(c.shift_size(), 2);
  EXPECT_EQ(c.depths, (std::vector<int64_t>{2, 2, 6, 2}));
  auto grids = c.StageGrids();
  ASSERT_EQ(grids.size(), 4u);
  const int64_t expect[4][3] = {{40, 20, 96}, {20, 10, 192}, {10, 5, 384}, {5, 3, 768}};
  for (int s = 0; s < 4; ++s) {
    EXPECT_EQ(grids[s].time, expect[s][0]);
    EXPECT_EQ(grids[s].freq, expect[s][1]);
    EXPECT_EQ(grids[s].channels, expect[s][2]);
    EXPECT_EQ(c.stage_channels(s), expect[s][2]);
  }
  EXPECT_EQ(c.output_dim(), 3 * 768);
}

TEST(SSTConfigTest, NonOverlappingGridAndValidation) {
  auto c = SSTConfig::Paper();
  c.patch_mode = PatchMode::kNonOverlapping;
  auto g = c.EmbedGrid();
  EXPECT_EQ(g.time, 23);  // ceil(160 / 7)
  EXPECT_EQ(g.freq, 12);  // ceil(80 / 7)
  auto bad = SSTConfig::Paper();
  bad.heads = {3, 6, 12};
  EXPECT_THROW(bad.Validate(), ValidationError);
  bad = SSTConfig::Paper();
  bad.shift = 5;
  EXPECT_THROW(bad.Validate(), ValidationError);
  EXPECT_THROW(ParsePatchMode("diagonal"), ValidationError);
  EXPECT_EQ(ParsePatchMode(PatchModeName(PatchMode::kNonOverlapping)),
            PatchMode::kNonOverlapping);
  EXPECT_EQ(ParseFrequencyReduction(FrequencyReductionName(FrequencyReduction::kMean)),
            FrequencyReduction::kMean);
}

TEST(SSTTest, PaperScaleShapePipeline) {
  auto cfg = SSTConfig::Paper();
  nn::ParameterStore<float> store;
  std::mt19937_64 rng(1);
  SSTEncoder<float> enc(nn::ParamScope<float>(&store, &rng), cfg);
  NoGradGuard no_grad;
  auto x = Tensor<float>::Randn({1, 320, 80}, rng);
  auto chunks = ChunkSplit(x, cfg.chunk_frames);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].shape(), (Shape{1, 160, 80}));
  auto stages = enc.StageOutputs(x);
  ASSERT_EQ(stages.size(), 4u);
  EXPECT_EQ(stages[0].shape(), (Shape{2, 40, 20, 96}));
  EXPECT_EQ(stages[1].shape(), (Shape{2, 20, 10, 192}));
  EXPECT_EQ(stages[2].shape(), (Shape{2, 10, 5, 384}));
  EXPECT_EQ(stages[3].shape(), (Shape{2, 5, 3, 768}));
  EXPECT_EQ(enc.Forward(x).shape(), (Shape{1, 10, 3 * 768}));
}

TEST(SSTTest, ChunkSplitOrderAndErrors) {
  TD x = RandomTensor({2, 6, 3}, 2);
  auto chunks = ChunkSplit(x, 3);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[1][0], x[3 * 3]);
  EXPECT_THROW(ChunkSplit(x, 4), ValidationError);
}

TEST(SSTTest, WindowPartitionIsAnExactBijection) {
  for (auto [h, w, m] : {std::tuple<int64_t, int64_t, int64_t>{10, 10, 5}, {15, 10, 5},
                         {6, 9, 3}, {4, 4, 2}}) {
    TD g = RandomTensor({2, h, w, 3}, 3);
    TD win = WindowPartition(g, m);
    const int64_t nh = h / m, nw = w / m;
    ASSERT_EQ(win.shape(), (Shape{2 * nh * nw, m * m, 3}));
    for (int64_t b = 0; b < 2; ++b)
      for (int64_t wy = 0; wy < nh; ++wy)
        for (int64_t wx = 0; wx < nw; ++wx)
          for (int64_t t = 0; t < m * m; ++t)
            for (int64_t c = 0; c < 3; ++c) {
              int64_t y = wy * m + t / m, x = wx * m + t % m;
              EXPECT_EQ(win[(((b * nh + wy) * nw + wx) * m * m + t) * 3 + c],
                        g[((b * h + y) * w + x) * 3 + c]);
            }
    TD back = WindowReverse(win, m, h, w);
    for (int64_t i = 0; i < g.numel(); ++i) ASSERT_EQ(back[i], g[i]);
  }
  EXPECT_THROW(WindowPartition(RandomTensor({1, 7, 5, 2}, 4), 5), ShapeError);
}

TEST(SSTTest, PadGridRoundsUpToMultiples) {
  TD g = RandomTensor({1, 7, 9, 2}, 5);
  TD p = PadGrid(g, 5);
  EXPECT_EQ(p.shape(), (Shape{1, 10, 10, 2}));
  EXPECT_EQ(p[((0 * 10 + 7) * 10 + 0) * 2], 0.0);
  EXPECT_EQ(p[((0 * 10 + 6) * 10 + 8) * 2 + 1], g[((0 * 7 + 6) * 9 + 8) * 2 + 1]);
}

TEST(SSTTest, MaskAbsentOnlyWhenNothingToMask) {
  EXPECT_FALSE(WindowAttentionMask<double>(10, 10, 10, 10, 5, 0).defined());
  TD shifted = WindowAttentionMask<double>(10, 10, 10, 10, 5, 2);
  ASSERT_TRUE(shifted.defined());
  EXPECT_EQ(shifted.shape(), (Shape{4, 1, 25, 25}));
  // The top-left window of the shifted grid holds one region only.
  for (int64_t i = 0; i < 25 * 25; ++i) EXPECT_EQ(shifted[i], 0.0);
  // The bottom-right window mixes four regions.
  int64_t masked = 0;
  for (int64_t i = 0; i < 25 * 25; ++i) masked += std::isinf(shifted[3 * 625 + i]);
  EXPECT_EQ(masked, 25 * 25 - (9 * 9 + 6 * 6 + 6 * 6 + 4 * 4));
}

struct OracleCase {
  int64_t h, w, m;
};

class WindowOracleTest : public ::testing::TestWithParam<OracleCase> {};

TEST_P(WindowOracleTest, MatchesNaiveEnumeration) {
  const auto [h, w, m] = GetParam();
  for (int64_t shift : {int64_t{0}, m / 2}) {
    nn::ParameterStore<double> store;
    std::mt19937_64 rng(7 + shift);
    WindowAttention<double> attn(nn::ParamScope<double>(&store, &rng, "attn"), 8, 2, m,
                                 shift);
    // Larger relative biases than the initializer so their indexing matters.
    for (auto& e : store.entries())
      if (e.name == "attn.relative_bias")
        for (double& v : e.tensor.data()) v *= 50.0;
    TD grid = RandomTensor({2, h, w, 8}, 8 + h * w);
    TD fast = attn.Forward(grid);
    TD slow = oracle::NaiveWindowAttention(grid, store, "attn", 2, m, shift);
    ASSERT_EQ(fast.shape(), slow.shape());
    double worst = 0;
    for (int64_t i = 0; i < fast.numel(); ++i)
      worst = std::max(worst, std::abs(fast[i] - slow[i]));
    EXPECT_LT(worst, 1e-10) << h << "x" << w << " M=" << m << " shift=" << shift;
  }
}

INSTANTIATE_TEST_SUITE_P(Grids, WindowOracleTest,
                         ::testing::Values(OracleCase{10, 10, 5}, OracleCase{15, 10, 5},
                                           OracleCase{7, 9, 5}, OracleCase{10, 10, 3},
                                           OracleCase{7, 9, 3}, OracleCase{15, 10, 3}));

TEST(SSTTest, PatchMergeMatchesNeighbourhoodConcat) {
  nn::ParameterStore<double> store;
  std::mt19937_64 rng(9);
  PatchMerge<double> merge(nn::ParamScope<double>(&store, &rng, "merge"), 3);
  const int64_t H = 5, W = 4, C = 3;
  TD g = RandomTensor({1, H, W, C}, 10);
  TD y = merge.Forward(g);
  ASSERT_EQ(y.shape(), (Shape{1, 3, 2, 6}));
  const TD& wr = merge.reduction().weight();
  EXPECT_FALSE(merge.reduction().bias().defined());
  auto at = [&](int64_t i, int64_t j, int64_t c) {
    return i < H && j < W ? g[(i * W + j) * C + c] : 0.0;
  };
  for (int64_t i = 0; i < 3; ++i)
    for (int64_t j = 0; j < 2; ++j) {
      std::vector<double> cat;
      for (auto [dy, dx] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}})
        for (int64_t c = 0; c < C; ++c) cat.push_back(at(2 * i + dy, 2 * j + dx, c));
      auto ref = oracle::Affine(cat.data(), wr, nullptr);
      for (int64_t o = 0; o < 6; ++o) EXPECT_NEAR(y[(i * 2 + j) * 6 + o], ref[o], 1e-12);
    }
}

TEST(SSTTest, ToyEncoderBothReductions) {
  for (auto red : {FrequencyReduction::kFold, FrequencyReduction::kMean}) {
    auto cfg = SSTConfig::Toy();
    cfg.frequency_reduction = red;
    nn::ParameterStore<float> store;
    std::mt19937_64 rng(11);
    SSTEncoder<float> enc(nn::ParamScope<float>(&store, &rng), cfg);
    auto last = cfg.StageGrids().back();
    auto y = enc.Forward(Tensor<float>::Randn({2, 200, 80}, rng));
    EXPECT_EQ(y.shape(), (Shape{2, 2 * last.time, cfg.output_dim()}));
    EXPECT_THROW(enc.Forward(Tensor<float>::Randn({1, 150, 80}, rng)), ValidationError);
  }
}

TEST(SSTTest, RegistryLayoutAndShiftedOddBlocks) {
  auto cfg = SSTConfig::Toy();
  nn::ParameterStore<float> store;
  std::mt19937_64 rng(12);
  SSTEncoder<float> enc(nn::ParamScope<float>(&store, &rng), cfg);
  std::set<std::string> names;
  for (const auto& n : store.Names()) names.insert(n);
  EXPECT_TRUE(names.count("stage0.block1.attention.relative_bias"));
  EXPECT_TRUE(names.count("merge1.reduction.weight"));
  EXPECT_TRUE(names.count("patch_embed.proj.weight"));
  EXPECT_TRUE(names.count("final_norm.gamma"));
  for (const auto& stage : enc.stages()) {
    ASSERT_EQ(stage.size(), 2u);
    EXPECT_EQ(stage[0].attention().shift(), 0);
    EXPECT_EQ(stage[1].attention().shift(), cfg.window / 2);
  }
}

TEST(AttentionCostTest, ClosedForms) {
  const int64_t f = 20, t = 40, c = 96, m = 5;
  double w1 = AttentionCost(f, t, c, m, AttentionMode::kWindowed);
  double w2 = AttentionCost(f, 2 * t, c, m, AttentionMode::kWindowed);
  EXPECT_EQ(w2 / w1, 2.0);
  double ft = f * t;
  EXPECT_EQ(w1, 4 * ft * c * c + 2.0 * m * m * ft * c);
  double g1 = AttentionCost(f, t, c, m, AttentionMode::kGlobal);
  double g2 = AttentionCost(f, 2 * t, c, m, AttentionMode::kGlobal);
  EXPECT_EQ((g2 - 8 * ft * c * c) / (g1 - 4 * ft * c * c), 4.0);
  EXPECT_THROW(AttentionCost(0, t, c, m, AttentionMode::kGlobal), ValidationError);
}

}  // namespace
}  // namespace sek::swin
