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

#include "sek/conformer/le_conformer.h"

namespace sek::conformer {

const char* AggregationName(Aggregation a) {
  switch (a) {
    case Aggregation::kConcat:
      return "concat";
    case Aggregation::kWeightedAverage:
      return "weighted_avg";
    case Aggregation::kLastOnly:
      return "last_only";
  }
  return "?";
}

Aggregation ParseAggregation(const std::string& name) {
  if (name == "concat") return Aggregation::kConcat;
  if (name == "weighted_avg") return Aggregation::kWeightedAverage;
  if (name == "last_only") return Aggregation::kLastOnly;
  throw ValidationError("unknown aggregation '" + name +
                        "' (expected concat, weighted_avg or last_only)");
}

LEConformerConfig LEConformerConfig::Paper() { return LEConformerConfig{}; }

LEConformerConfig LEConformerConfig::Toy() {
  LEConformerConfig c;
  c.vgg_channels1 = 8;
  c.vgg_channels2 = 16;
  c.blocks = 3;
  c.heads = 2;
  c.model_dim = 64;
  c.conv_kernel = 7;
  c.ffn_hidden = 128;
  return c;
}

void LEConformerConfig::Validate() const {
  Check<ValidationError>(blocks >= 1, "le_conformer: blocks must be >= 1");
  Check<ValidationError>(feature_dim >= 4, "le_conformer: feature_dim must be >= 4");
  Check<ValidationError>(vgg_channels1 > 0 && vgg_channels2 > 0,
                         "le_conformer: VGG channel counts must be positive");
  Check<ValidationError>(heads > 0 && model_dim % heads == 0,
                         "le_conformer: model_dim ", model_dim,
                         " not divisible by heads ", heads);
  Check<ValidationError>(conv_kernel > 0 && conv_kernel % 2 == 1,
                         "le_conformer: conv_kernel must be odd");
  Check<ValidationError>(ffn_kernel > 0 && ffn_kernel % 2 == 1,
                         "le_conformer: ffn_kernel must be odd");
  Check<ValidationError>(ffn_hidden > 0, "le_conformer: ffn_hidden must be positive");
  if (enable_se)
    Check<ValidationError>(se_reduction > 0 && ffn_hidden % se_reduction == 0,
                           "le_conformer: ffn_hidden ", ffn_hidden,
                           " not divisible by se_reduction ", se_reduction);
}

template <typename T>
VggSubsampler<T>::VggSubsampler(nn::ParamScope<T> scope,
                                const LEConformerConfig& cfg)
    : feature_dim_(cfg.feature_dim) {
  Conv2dOptions same;
  same.pad_h = same.pad_w = 1;
  conv1a_ = nn::Conv2dLayer<T>(scope.Sub("conv1a"), 1, cfg.vgg_channels1, 3, same);
  conv1b_ = nn::Conv2dLayer<T>(scope.Sub("conv1b"), cfg.vgg_channels1,
                               cfg.vgg_channels1, 3, same);
  conv2a_ = nn::Conv2dLayer<T>(scope.Sub("conv2a"), cfg.vgg_channels1,
                               cfg.vgg_channels2, 3, same);
  conv2b_ = nn::Conv2dLayer<T>(scope.Sub("conv2b"), cfg.vgg_channels2,
                               cfg.vgg_channels2, 3, same);
  project_ = nn::Linear<T>(scope.Sub("project"),
                           cfg.vgg_channels2 * (cfg.feature_dim / 4), cfg.model_dim);
}

template <typename T>
Tensor<T> VggSubsampler<T>::Forward(const Tensor<T>& feats) const {
  Check<ShapeError>(feats.ndim() == 3, "VGG front-end expects [B, T, F], got ",
                    ShapeToString(feats.shape()));
  Check<ValidationError>(feats.dim(1) >= 4, "VGG front-end needs T >= 4 (axis 1), got ",
                         feats.dim(1));
  Check<ShapeError>(feats.dim(2) == feature_dim_, "VGG front-end expects ", feature_dim_,
                    " feature bins, got ", feats.dim(2));
  const int64_t b = feats.dim(0), t = feats.dim(1), f = feats.dim(2);
  Tensor<T> h = Reshape(feats, {b, 1, t, f});
  h = Relu(conv1b_.Forward(Relu(conv1a_.Forward(h))));
  h = MaxPool2x2(h);
  h = Relu(conv2b_.Forward(Relu(conv2a_.Forward(h))));
  h = MaxPool2x2(h);  // [B, C2, T/4, F/4]
  const int64_t c = h.dim(1), tq = h.dim(2), fq = h.dim(3);
  h = Reshape(Permute(h, {0, 2, 1, 3}), {b, tq, c * fq});
  return project_.Forward(h);
}

template <typename T>
LEConformerBlock<T>::LEConformerBlock(nn::ParamScope<T> scope,
                                      const LEConformerConfig& cfg) {
  nn::LocalityFFNConfig ffn;
  ffn.model_dim = cfg.model_dim;
  ffn.hidden_dim = cfg.ffn_hidden;
  ffn.dw_kernel = cfg.ffn_kernel;
  ffn.se_reduction = cfg.se_reduction;
  ffn.enable_dwconv = cfg.enable_dwconv;
  ffn.enable_se = cfg.enable_se;
  ffn1_ = nn::LocalityEnhancedFFN<T>(scope.Sub("ffn1"), ffn);
  attention_norm_ = nn::LayerNormLayer<T>(scope.Sub("attention_norm"), cfg.model_dim);
  nn::MSAConfig msa;
  msa.model_dim = cfg.model_dim;
  msa.heads = cfg.heads;
  msa.relative_position = cfg.relative_position
                              ? nn::RelativePosition::kConformerRel
                              : nn::RelativePosition::kNone;
  attention_ = nn::MultiHeadSelfAttention<T>(scope.Sub("attention"), msa);
  conv_ = nn::ConformerConvModule<T>(scope.Sub("conv"), cfg.model_dim, cfg.conv_kernel);
  ffn2_ = nn::LocalityEnhancedFFN<T>(scope.Sub("ffn2"), ffn);
  final_norm_ = nn::LayerNormLayer<T>(scope.Sub("final_norm"), cfg.model_dim);
}

template <typename T>
Tensor<T> LEConformerBlock<T>::Forward(const Tensor<T>& z, bool training) const {
  Tensor<T> h = Add(z, Scale(ffn1_.Forward(z), T(0.5)));
  h = Add(h, attention_.Forward(attention_norm_.Forward(h)));
  h = Add(h, conv_.Forward(h, training));
  return final_norm_.Forward(Add(h, Scale(ffn2_.Forward(h), T(0.5))));
}

template <typename T>
Tensor<T> AggregateBlocks(const std::vector<Tensor<T>>& outputs,
                          Aggregation mode, const Tensor<T>& weights) {
  Check<ValidationError>(!outputs.empty(), "aggregation of zero block outputs");
  for (const auto& o : outputs)
    Check<ShapeError>(o.shape() == outputs[0].shape(),
                      "aggregation: block output shapes differ (",
                      ShapeToString(o.shape()), " vs ",
                      ShapeToString(outputs[0].shape()), ")");
  switch (mode) {
    case Aggregation::kConcat:
      return outputs.size() == 1 ? outputs[0] : Concat(outputs, -1);
    case Aggregation::kLastOnly:
      return outputs.back();
    case Aggregation::kWeightedAverage: {
      const int64_t n = static_cast<int64_t>(outputs.size());
      Check<ShapeError>(weights.defined() && weights.numel() == n,
                        "aggregation weights must have ", n, " entries");
      Shape stacked_shape = outputs[0].shape();
      stacked_shape.insert(stacked_shape.begin(), n);
      std::vector<Tensor<T>> parts;
      for (const auto& o : outputs) {
        Shape s = o.shape();
        s.insert(s.begin(), 1);
        parts.push_back(Reshape(o, s));
      }
      Tensor<T> stacked = Concat(parts, 0);
      Shape wshape(stacked_shape.size(), 1);
      wshape[0] = n;
      Tensor<T> w = Reshape(Softmax(Reshape(weights, {n}), 0), wshape);
      return Sum(Mul(stacked, w), {0});
    }
  }
  throw ValidationError("unknown aggregation mode");
}

template <typename T>
LEConformerEncoder<T>::LEConformerEncoder(nn::ParamScope<T> scope,
                                          const LEConformerConfig& cfg)
    : cfg_(cfg) {
  cfg_.Validate();
  frontend_ = VggSubsampler<T>(scope.Sub("vgg"), cfg);
  for (int64_t i = 0; i < cfg.blocks; ++i)
    blocks_.emplace_back(scope.Sub("block" + std::to_string(i)), cfg);
  if (cfg.aggregation == Aggregation::kWeightedAverage)
    aggregation_weights_ = scope.Constant("aggregation_weights", {cfg.blocks}, T(0));
}

template <typename T>
std::vector<Tensor<T>> LEConformerEncoder<T>::BlockOutputs(const Tensor<T>& feats,
                                                            bool training) const {
  Tensor<T> z = frontend_.Forward(feats);
  std::vector<Tensor<T>> outputs;
  for (const auto& block : blocks_) {
    z = block.Forward(z, training);
    outputs.push_back(z);
  }
  return outputs;
}

template <typename T>
Tensor<T> LEConformerEncoder<T>::Forward(const Tensor<T>& feats,
                                         bool training) const {
  return AggregateBlocks(BlockOutputs(feats, training), cfg_.aggregation,
                         aggregation_weights_);
}

template class VggSubsampler<float>;
template class VggSubsampler<double>;
template class LEConformerBlock<float>;
template class LEConformerBlock<double>;
template class LEConformerEncoder<float>;
template class LEConformerEncoder<double>;
template Tensor<float> AggregateBlocks(const std::vector<Tensor<float>>&,
                                       Aggregation, const Tensor<float>&);
template Tensor<double> AggregateBlocks(const std::vector<Tensor<double>>&,
                                        Aggregation, const Tensor<double>&);

}  // namespace sek::conformer
