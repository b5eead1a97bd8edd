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

#include "sek/harness/gradcheck.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "sek/conformer/le_conformer.h"
#include "sek/head/head.h"
#include "sek/swin/sst.h"
#include "sek/tensor/autodiff.h"
#include "sek/tensor/finite_difference.h"
#include "sek/tensor/ops.h"

namespace sek::harness {

using TD = Tensor<double>;

double CheckGradients(const std::function<TD()>& loss, const std::vector<TD>& leaves,
                      double h) {
  for (TD leaf : leaves) {
    leaf.set_requires_grad(true);
    leaf.ZeroGrad();
  }
  Backward(loss());
  double worst = 0;
  NoGradGuard no_grad;
  for (TD leaf : leaves) {
    const TD analytic = leaf.GradTensor();
    const TD numeric = FiniteDifferenceGradientInPlace(loss, leaf, h);
    worst = std::max(worst, MaxRelativeError(analytic, numeric));
  }
  return worst;
}

namespace {

// Random linear functional of `out`, so every output coordinate carries a
// distinct upstream gradient. Central differences at h = 1e-5 carry about
// 1e-9 |f| of roundoff, while low-frequency relative-position coordinates
// have true derivatives near 1e-10 |f|. Keeping |f| near 1e-4 lets the 1e-8
// floor of the relative error act as an absolute tolerance of ~1e-8 |f|.
constexpr double kProjectionScale = 1e-4;

TD Project(const TD& out, uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  return SumAll(
      Mul(out, TD::Uniform(out.shape(), rng, -kProjectionScale, kProjectionScale)));
}

TD Input(Shape shape, std::mt19937_64& rng, double low = -1.0, double high = 1.0) {
  return TD::Uniform(std::move(shape), rng, low, high);
}

// Values bounded away from zero, for kinks and sqrt.
TD AwayFromZero(Shape shape, std::mt19937_64& rng, double low, double high) {
  TD x = TD::Uniform(std::move(shape), rng, low, high);
  std::bernoulli_distribution sign(0.5);
  for (auto& v : x.data()) v = sign(rng) ? v : -v;
  return x;
}

// Runs `one(shape_index, rng)` for three shape variants; worst error.
double OverShapes(const std::function<double(int, std::mt19937_64&)>& one) {
  double worst = 0;
  for (int s = 0; s < 3; ++s) {
    std::mt19937_64 rng(1234 + s);
    worst = std::max(worst, one(s, rng));
  }
  return worst;
}

// Unary kernel over three shapes.
GradCheckUnit Unary(std::string name, std::function<TD(const TD&)> op,
                    std::function<TD(Shape, std::mt19937_64&)> make = nullptr) {
  return {name, "kernels", [op, make] {
            static const Shape shapes[3] = {{6}, {3, 4}, {2, 3, 4}};
            return OverShapes([&](int s, std::mt19937_64& rng) {
              TD x = make ? make(shapes[s], rng) : Input(shapes[s], rng);
              return CheckGradients([&] { return Project(op(x)); }, {x});
            });
          }};
}

// Builds a module with double parameters and checks input + parameters.
template <typename Build>
double ModuleCheck(uint64_t seed, Build build) {
  nn::ParameterStore<double> store;
  std::mt19937_64 rng(seed);
  nn::ParamScope<double> scope(&store, &rng);
  std::vector<TD> inputs;
  std::function<TD()> forward = build(scope, rng, inputs);
  std::vector<TD> leaves = inputs;
  for (const TD& p : store.Trainable()) leaves.push_back(p);
  return CheckGradients([&] { return Project(forward()); }, leaves);
}

std::vector<GradCheckUnit> KernelUnits() {
  std::vector<GradCheckUnit> u;
  u.push_back({"matmul", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   static const Shape as[3] = {{3, 4}, {2, 3, 5}, {1, 6}};
                   TD a = Input(as[s], rng);
                   TD b = Input({as[s].back(), 3 + s}, rng);
                   return CheckGradients([&] { return Project(MatMul(a, b)); }, {a, b});
                 });
               }});
  u.push_back({"batch_matmul", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   TD a = Input({2, 1 + s, 3, 4}, rng);
                   TD b = Input({2, 1 + s, 4, 2}, rng);
                   TD bt = Input({2, 1 + s, 5, 4}, rng);
                   return std::max(
                       CheckGradients([&] { return Project(BatchMatMul(a, b)); }, {a, b}),
                       CheckGradients([&] { return Project(BatchMatMul(a, bt, true)); },
                                      {a, bt}));
                 });
               }});
  auto binary = [](std::string name, TD (*op)(const TD&, const TD&)) {
    return GradCheckUnit{name, "kernels", [op] {
                           return OverShapes([op](int s, std::mt19937_64& rng) {
                             static const Shape as[3] = {{3, 4}, {2, 3, 4}, {4, 1}};
                             static const Shape bs[3] = {{4}, {2, 1, 4}, {1, 5}};
                             TD a = Input(as[s], rng), b = Input(bs[s], rng);
                             return CheckGradients([&] { return Project(op(a, b)); },
                                                   {a, b});
                           });
                         }};
  };
  u.push_back(binary("add", &Add<double>));
  u.push_back(binary("sub", &Sub<double>));
  u.push_back(binary("mul", &Mul<double>));
  u.push_back(Unary("scale_add_scalar",
                    [](const TD& x) { return AddScalar(Scale(x, 1.7), -0.3); }));
  u.push_back(Unary("relu", [](const TD& x) { return Relu(x); },
                    [](Shape s, std::mt19937_64& r) { return AwayFromZero(s, r, 0.1, 1); }));
  u.push_back(Unary("sigmoid", [](const TD& x) { return Sigmoid(Scale(x, 2.0)); }));
  u.push_back(Unary("tanh", [](const TD& x) { return Tanh(Scale(x, 2.0)); }));
  u.push_back(Unary("swish", [](const TD& x) { return Swish(Scale(x, 2.0)); }));
  u.push_back(Unary("gelu", [](const TD& x) { return Gelu(Scale(x, 2.0)); }));
  u.push_back(Unary("glu", [](const TD& x) { return Glu(Reshape(x, {-1, 2})); }));
  u.push_back(Unary("square", [](const TD& x) { return Square(x); }));
  u.push_back(Unary("sqrt", [](const TD& x) { return Sqrt(x); },
                    [](Shape s, std::mt19937_64& r) { return Input(s, r, 0.2, 2.0); }));
  u.push_back(Unary("clamp_min", [](const TD& x) { return ClampMin(x, 0.0); },
                    [](Shape s, std::mt19937_64& r) { return AwayFromZero(s, r, 0.1, 1); }));
  u.push_back(Unary("dropout", [](const TD& x) {
    std::mt19937_64 rng(5);  // same mask on every evaluation
    return Dropout(x, 0.3, true, rng);
  }));
  u.push_back(Unary("softmax", [](const TD& x) {
    return Add(Softmax(x, -1), Softmax(Scale(x, 1.5), 0));
  }));
  u.push_back({"layer_norm", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   static const Shape xs[3] = {{6}, {3, 5}, {2, 2, 7}};
                   TD x = Input(xs[s], rng);
                   TD g = Input({xs[s].back()}, rng), b = Input({xs[s].back()}, rng);
                   return std::max(
                       CheckGradients([&] { return Project(LayerNorm(x, g, b)); }, {x, g, b}),
                       CheckGradients([&] { return Project(LayerNorm(x, TD(), TD())); }, {x}));
                 });
               }});
  u.push_back({"batch_norm", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   static const Shape xs[3] = {{4, 3}, {2, 5, 3}, {3, 2, 4}};
                   const int64_t c = xs[s].back();
                   TD x = Input(xs[s], rng), g = Input({c}, rng), b = Input({c}, rng);
                   TD rm = Input({c}, rng), rv = Input({c}, rng, 0.5, 1.5);
                   auto run = [&](bool training) {
                     BatchNormOptions o;
                     o.training = training;
                     return Project(BatchNorm(x, g, b, rm, rv, o));
                   };
                   return std::max(CheckGradients([&] { return run(true); }, {x, g, b}),
                                   CheckGradients([&] { return run(false); }, {x, g, b}));
                 });
               }});
  u.push_back({"depthwise_conv1d", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   static const int64_t k[3] = {1, 3, 5};
                   TD x = Input({2, 4 + s, 3}, rng), w = Input({3, k[s]}, rng);
                   TD b = Input({3}, rng);
                   return CheckGradients(
                       [&] { return Project(DepthwiseConv1d(x, w, b)); }, {x, w, b});
                 });
               }});
  u.push_back({"conv2d", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   Conv2dOptions o;
                   o.stride_h = 1 + s % 2;
                   o.stride_w = 1 + s / 2;
                   o.pad_h = s;
                   o.pad_w = 1;
                   TD x = Input({2, 2, 5, 6}, rng), w = Input({3, 2, 3, 3}, rng);
                   TD b = Input({3}, rng);
                   return CheckGradients([&] { return Project(Conv2d(x, w, b, o)); },
                                         {x, w, b});
                 });
               }});
  u.push_back(Unary("max_pool_2x2",
                    [](const TD& x) { return MaxPool2x2(Reshape(x, {1, 2, -1, 2})); },
                    [](Shape s, std::mt19937_64& r) {
                      // Distinct values so the arg-max is unambiguous.
                      s = {2, 2, 3, 2};
                      TD x(s);
                      std::vector<double> v(x.numel());
                      for (size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * i;
                      std::shuffle(v.begin(), v.end(), r);
                      std::copy(v.begin(), v.end(), x.data().begin());
                      return x;
                    }));
  u.push_back(Unary("sum_mean_variance", [](const TD& x) {
    const std::vector<int> axes{0};
    return Add(Add(Sum(x, axes, true), Mean(x, {-1}, true)),
               Mean(Variance(x, {-1}, true), {0}, true));
  }));
  u.push_back({"concat_slice", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   TD a = Input({2, 3, 1 + s}, rng), b = Input({2, 3, 2}, rng);
                   return CheckGradients(
                       [&] {
                         TD c = Concat(std::vector<TD>{a, b, a}, -1);
                         return Project(Slice(c, 2, 1, c.dim(2) - 2));
                       },
                       {a, b});
                 });
               }});
  u.push_back(Unary("reshape_permute", [](const TD& x) {
    return Permute(Reshape(x, {-1, x.numel() / 2 >= 2 ? 2 : 1}), {1, 0});
  }));
  u.push_back(Unary("roll2d", [](const TD& x) {
    TD g = Reshape(x, {2, -1, 2});
    return Add(Roll2d(g, 0, 1, 1, -2), Roll2d(g, 1, 3, 2, 1));
  }, [](Shape s, std::mt19937_64& r) {
    s[0] *= 2;
    return Input(s, r);
  }));
  u.push_back(Unary("pad", [](const TD& x) {
    std::vector<std::pair<int64_t, int64_t>> pads(x.ndim(), {1, 2});
    return Pad(x, pads);
  }));
  u.push_back({"index_select_rows", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   TD t = Input({4, 2 + s}, rng);
                   const std::vector<int64_t> idx{3, 0, 0, 2, 3, 1};
                   return CheckGradients([&] { return Project(IndexSelectRows(t, idx)); },
                                         {t});
                 });
               }});
  u.push_back({"attention_bias_mask", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   const int64_t g = 1 + s, n = 3, h = 2;
                   TD scores = Input({2 * g, h, n, n}, rng);
                   TD bias = Input({g, s == 1 ? 1 : h, n, n}, rng);
                   // A fixed -inf pattern off the diagonal.
                   TD mask({g, 1, n, n});
                   for (int64_t i = 0; i < mask.numel(); ++i)
                     if (i % 4 == 1) mask[i] = -std::numeric_limits<double>::infinity();
                   return CheckGradients(
                       [&] {
                         return Project(Softmax(
                             AddAttentionBias(AddAttentionBias(scores, bias), mask), -1));
                       },
                       {scores, bias});
                 });
               }});
  u.push_back({"relative_shift", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   const int64_t t = 1 + 2 * s;
                   TD x = Input({2, t, 2 * t - 1}, rng);
                   return CheckGradients([&] { return Project(RelativeShift(x)); }, {x});
                 });
               }});
  u.push_back(Unary("normalize_last_axis",
                    [](const TD& x) { return NormalizeLastAxis(Reshape(x, {-1, x.dim(-1)})); }));
  u.push_back({"softmax_cross_entropy", "kernels", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   TD z = Input({3, 2 + s}, rng, -3, 3);
                   const std::vector<int64_t> y{0, 1 + s, 1};
                   return CheckGradients([&] { return SoftmaxCrossEntropy(z, y); }, {z});
                 });
               }});
  return u;
}

std::vector<GradCheckUnit> BlockUnits() {
  std::vector<GradCheckUnit> u;
  u.push_back({"linear", "blocks", [] {
                 return ModuleCheck(1, [](auto scope, auto& rng, auto& in) {
                   auto m = std::make_shared<nn::Linear<double>>(scope.Sub("l"), 4, 3);
                   in.push_back(Input({2, 5, 4}, rng));
                   TD x = in[0];
                   return std::function<TD()>([m, x] { return m->Forward(x); });
                 });
               }});
  u.push_back({"se_block", "blocks", [] {
                 return ModuleCheck(2, [](auto scope, auto& rng, auto& in) {
                   auto m = std::make_shared<nn::SEBlock<double>>(scope.Sub("se"), 8, 4);
                   TD x = Input({2, 5, 8}, rng);
                   in.push_back(x);
                   return std::function<TD()>([m, x] { return m->Forward(x); });
                 });
               }});
  for (int mask = 0; mask < 4; ++mask) {
    const bool dw = mask & 1, se = mask & 2;
    u.push_back({std::string("le_ffn") + (dw ? "" : "_no_dwconv") + (se ? "" : "_no_se"),
                 "blocks", [dw, se] {
                   return ModuleCheck(3, [dw, se](auto scope, auto& rng, auto& in) {
                     nn::LocalityFFNConfig c;
                     c.model_dim = 6;
                     c.hidden_dim = 8;
                     c.se_reduction = 4;
                     c.enable_dwconv = dw;
                     c.enable_se = se;
                     auto m = std::make_shared<nn::LocalityEnhancedFFN<double>>(
                         scope.Sub("ffn"), c);
                     TD x = Input({2, 5, 6}, rng);
                     in.push_back(x);
                     return std::function<TD()>([m, x] { return m->Forward(x); });
                   });
                 }});
  }
  for (bool training : {true, false}) {
    u.push_back({std::string("conformer_conv_module_") + (training ? "train" : "eval"),
                 "blocks", [training] {
                   return ModuleCheck(4, [training](auto scope, auto& rng, auto& in) {
                     auto m = std::make_shared<nn::ConformerConvModule<double>>(
                         scope.Sub("conv"), 6, 5);
                     TD x = Input({2, 7, 6}, rng);
                     in.push_back(x);
                     return std::function<TD()>(
                         [m, x, training] { return m->Forward(x, training); });
                   });
                 }});
  }
  const std::pair<const char*, nn::RelativePosition> modes[] = {
      {"msa", nn::RelativePosition::kNone},
      {"msa_conformer_rel", nn::RelativePosition::kConformerRel},
      {"msa_window_bias", nn::RelativePosition::kWindowBias}};
  for (auto [name, rel] : modes) {
    u.push_back({name, "blocks", [rel] {
                   return ModuleCheck(5, [rel](auto scope, auto& rng, auto& in) {
                     nn::MSAConfig c;
                     c.model_dim = 8;
                     c.heads = 2;
                     c.relative_position = rel;
                     c.window = 2;
                     auto m = std::make_shared<nn::MultiHeadSelfAttention<double>>(
                         scope.Sub("msa"), c);
                     TD x = Input({2, 4, 8}, rng);
                     in.push_back(x);
                     return std::function<TD()>([m, x] { return m->Forward(x); });
                   });
                 }});
  }
  u.push_back({"msa_masked", "blocks", [] {
                 return ModuleCheck(6, [](auto scope, auto& rng, auto& in) {
                   nn::MSAConfig c;
                   c.model_dim = 6;
                   c.heads = 3;
                   auto m = std::make_shared<nn::MultiHeadSelfAttention<double>>(
                       scope.Sub("msa"), c);
                   // Shifted-window mask for a 3x2 grid padded to 4x2 with M = 2:
                   // two groups of four tokens.
                   auto mask = std::make_shared<TD>(
                       swin::WindowAttentionMask<double>(4, 2, 3, 2, 2, 1));
                   TD xw = Input({4, 4, 6}, rng);
                   in.push_back(xw);
                   return std::function<TD()>(
                       [m, xw, mask] { return m->Forward(xw, mask.get()); });
                 });
               }});
  for (int64_t shift : {0, 1}) {
    u.push_back({shift == 0 ? "window_attention_lw" : "window_attention_slw", "blocks",
                 [shift] {
                   return ModuleCheck(7, [shift](auto scope, auto& rng, auto& in) {
                     auto m = std::make_shared<swin::WindowAttention<double>>(
                         scope.Sub("wmsa"), 4, 2, 2, shift);
                     TD x = Input({1, 5, 3, 4}, rng);  // non-divisible grid
                     in.push_back(x);
                     return std::function<TD()>([m, x] { return m->Forward(x); });
                   });
                 }});
  }
  u.push_back({"swin_block", "blocks", [] {
                 return ModuleCheck(8, [](auto scope, auto& rng, auto& in) {
                   auto m = std::make_shared<swin::SwinBlock<double>>(scope.Sub("blk"), 4,
                                                                      2, 2, 1, 2);
                   TD x = Input({1, 4, 3, 4}, rng);
                   in.push_back(x);
                   return std::function<TD()>([m, x] { return m->Forward(x); });
                 });
               }});
  u.push_back({"patch_merge", "blocks", [] {
                 return ModuleCheck(9, [](auto scope, auto& rng, auto& in) {
                   auto m = std::make_shared<swin::PatchMerge<double>>(scope.Sub("pm"), 3);
                   TD x = Input({2, 3, 5, 3}, rng);
                   in.push_back(x);
                   return std::function<TD()>([m, x] { return m->Forward(x); });
                 });
               }});
  for (auto mode : {swin::PatchMode::kOverlapping, swin::PatchMode::kNonOverlapping}) {
    u.push_back({std::string("patch_embed_") + swin::PatchModeName(mode), "blocks", [mode] {
                   return ModuleCheck(10, [mode](auto scope, auto& rng, auto& in) {
                     swin::SSTConfig c;
                     c.patch = 3;
                     c.stride = 2;
                     c.padding = 1;
                     c.embed_dim = 4;
                     c.patch_mode = mode;
                     auto m = std::make_shared<swin::PatchEmbed<double>>(scope.Sub("pe"), c);
                     TD x = Input({1, 7, 8}, rng);
                     in.push_back(x);
                     return std::function<TD()>([m, x] { return m->Forward(x); });
                   });
                 }});
  }
  return u;
}

conformer::LEConformerConfig TinyConformer(conformer::Aggregation agg) {
  conformer::LEConformerConfig c;
  c.feature_dim = 8;
  c.vgg_channels1 = 2;
  c.vgg_channels2 = 3;
  c.blocks = 2;
  c.heads = 2;
  c.model_dim = 16;
  c.conv_kernel = 5;
  c.ffn_hidden = 32;
  c.se_reduction = 16;
  c.aggregation = agg;
  return c;
}

std::vector<GradCheckUnit> ConformerUnits() {
  using conformer::Aggregation;
  std::vector<GradCheckUnit> u;
  u.push_back({"vgg_subsampler", "le_conformer", [] {
                 return ModuleCheck(11, [](auto scope, auto& rng, auto& in) {
                   auto m = std::make_shared<conformer::VggSubsampler<double>>(
                       scope.Sub("vgg"), TinyConformer(Aggregation::kConcat));
                   TD x = Input({1, 9, 8}, rng);
                   in.push_back(x);
                   return std::function<TD()>([m, x] { return m->Forward(x); });
                 });
               }});
  u.push_back({"le_conformer_block", "le_conformer", [] {
                 return ModuleCheck(12, [](auto scope, auto& rng, auto& in) {
                   auto m = std::make_shared<conformer::LEConformerBlock<double>>(
                       scope.Sub("blk"), TinyConformer(Aggregation::kConcat));
                   TD x = Input({2, 4, 16}, rng);
                   in.push_back(x);
                   return std::function<TD()>([m, x] { return m->Forward(x, true); });
                 });
               }});
  for (auto agg : {Aggregation::kConcat, Aggregation::kWeightedAverage, Aggregation::kLastOnly}) {
    u.push_back({std::string("le_conformer_encoder_") + conformer::AggregationName(agg),
                 "le_conformer", [agg] {
                   return ModuleCheck(13, [agg](auto scope, auto& rng, auto& in) {
                     auto m = std::make_shared<conformer::LEConformerEncoder<double>>(
                         scope.Sub("enc"), TinyConformer(agg));
                     TD x = Input({1, 16, 8}, rng);
                     in.push_back(x);
                     return std::function<TD()>([m, x] { return m->Forward(x, true); });
                   });
                 }});
  }
  return u;
}

std::vector<GradCheckUnit> SstUnits() {
  std::vector<GradCheckUnit> u;
  for (auto red : {swin::FrequencyReduction::kFold, swin::FrequencyReduction::kMean}) {
    u.push_back({std::string("sst_encoder_") + swin::FrequencyReductionName(red), "sst",
                 [red] {
                   return ModuleCheck(14, [red](auto scope, auto& rng, auto& in) {
                     swin::SSTConfig c;
                     c.feature_dim = 12;
                     c.chunk_frames = 8;
                     c.patch = 3;
                     c.stride = 2;
                     c.padding = 1;
                     c.embed_dim = 16;
                     c.window = 2;
                     c.depths = {2, 2};
                     c.heads = {2, 4};
                     c.frequency_reduction = red;
                     auto m = std::make_shared<swin::SSTEncoder<double>>(scope.Sub("sst"), c);
                     TD x = Input({1, 16, 12}, rng);
                     in.push_back(x);
                     return std::function<TD()>([m, x] { return m->Forward(x); });
                   });
                 }});
  }
  return u;
}

std::vector<GradCheckUnit> HeadUnits() {
  std::vector<GradCheckUnit> u;
  u.push_back({"asp", "head", [] {
                 return ModuleCheck(15, [](auto scope, auto& rng, auto& in) {
                   auto m = std::make_shared<head::AttentiveStatsPooling<double>>(
                       scope.Sub("asp"), 5, 4);
                   TD x = Input({2, 6, 5}, rng);
                   in.push_back(x);
                   return std::function<TD()>([m, x] { return m->Forward(x); });
                 });
               }});
  u.push_back({"embedding_head", "head", [] {
                 return ModuleCheck(16, [](auto scope, auto& rng, auto& in) {
                   auto m = std::make_shared<head::EmbeddingHead<double>>(scope.Sub("head"),
                                                                          4, 3, 4);
                   TD x = Input({2, 5, 4}, rng);
                   in.push_back(x);
                   return std::function<TD()>([m, x] { return m->Forward(x); });
                 });
               }});
  u.push_back({"am_softmax", "head", [] {
                 return OverShapes([](int s, std::mt19937_64& rng) {
                   const int64_t k = 2 + s;
                   TD e = Input({3, 4}, rng), w = Input({k, 4}, rng);
                   const std::vector<int64_t> y{0, k - 1, 1};
                   return CheckGradients(
                       [&] { return head::AMSoftmaxLoss(e, w, y, 0.2, 5.0); }, {e, w});
                 });
               }});
  return u;
}

}  // namespace

const std::vector<GradCheckUnit>& GradCheckRegistry() {
  static const std::vector<GradCheckUnit> units = [] {
    std::vector<GradCheckUnit> all;
    for (auto group : {KernelUnits(), BlockUnits(), ConformerUnits(), SstUnits(), HeadUnits()})
      all.insert(all.end(), group.begin(), group.end());
    return all;
  }();
  return units;
}

bool IsGradCheckScope(const std::string& scope) {
  return scope == "all" || scope == "kernels" || scope == "blocks" ||
         scope == "le_conformer" || scope == "sst" || scope == "head";
}

std::vector<GradCheckRow> RunGradCheck(const std::vector<GradCheckUnit>& units,
                                       const std::string& scope, double tolerance) {
  Check<ValidationError>(IsGradCheckScope(scope), "unknown gradcheck scope '", scope,
                         "' (expected kernels, blocks, le_conformer, sst, head or all)");
  std::vector<GradCheckRow> rows;
  for (const GradCheckUnit& unit : units) {
    if (scope != "all" && unit.scope != scope) continue;
    GradCheckRow row{unit.name, unit.scope};
    const auto start = std::chrono::steady_clock::now();
    try {
      row.max_rel_error = unit.run();
      row.passed = std::isfinite(row.max_rel_error) && row.max_rel_error < tolerance;
    } catch (const std::exception& e) {
      row.max_rel_error = std::numeric_limits<double>::infinity();
      row.error = e.what();
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sek::harness
