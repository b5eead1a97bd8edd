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

#include <gtest/gtest.h>

#include "sek/harness/gradcheck.h"
#include "sek/tensor/autodiff.h"
#include "sek/tensor/ops.h"

namespace sek::harness {
namespace {

class RegistryTest : public ::testing::TestWithParam<size_t> {};

TEST_P(RegistryTest, MatchesCentralDifferences) {
  const GradCheckUnit& unit = GradCheckRegistry()[GetParam()];
  const double err = unit.run();
  EXPECT_LT(err, 1e-4) << unit.scope << "/" << unit.name;
}

INSTANTIATE_TEST_SUITE_P(
    AllUnits, RegistryTest, ::testing::Range<size_t>(0, GradCheckRegistry().size()),
    [](const ::testing::TestParamInfo<size_t>& info) {
      return GradCheckRegistry()[info.param].name;
    });

TEST(GradCheckTest, CorruptedGradientIsReportedAsFailure) {
  std::vector<GradCheckUnit> units = {
      {"corrupted_square", "kernels", [] {
         Tensor<double> x({3}, {0.5, -1.0, 2.0});
         return CheckGradients(
             [&] {
               std::vector<double> y(3);
               for (int i = 0; i < 3; ++i) y[i] = x[i] * x[i];
               // Backward deliberately off by a factor of 1.5.
               Tensor<double> sq = RecordOp<double>(
                   "bad_square", {3}, y, {x}, [impl = x.impl()](std::span<const double> g) {
                     auto gx = impl->GradBuffer();
                     for (int i = 0; i < 3; ++i) gx[i] += 3.0 * impl->data[i] * g[i];
                   });
               return SumAll(sq);
             },
             {x});
       }}};
  const auto rows = RunGradCheck(units, "kernels");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].passed);
  EXPECT_NEAR(rows[0].max_rel_error, 0.5, 1e-6);
}

TEST(GradCheckTest, ScopeFiltering) {
  const auto& reg = GradCheckRegistry();
  std::vector<GradCheckUnit> cheap;
  for (const auto& u : reg)
    if (u.name == "relu" || u.name == "asp") cheap.push_back(u);
  EXPECT_EQ(RunGradCheck(cheap, "kernels").size(), 1u);
  EXPECT_EQ(RunGradCheck(cheap, "head").size(), 1u);
  EXPECT_EQ(RunGradCheck(cheap, "all").size(), 2u);
  EXPECT_THROW(RunGradCheck(cheap, "bogus"), ValidationError);
}

TEST(GradCheckTest, RegistryCoversEveryScope) {
  for (const char* scope : {"kernels", "blocks", "le_conformer", "sst", "head"}) {
    int n = 0;
    for (const auto& u : GradCheckRegistry()) n += u.scope == scope;
    EXPECT_GT(n, 0) << scope;
  }
}

}  // namespace
}  // namespace sek::harness
