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

#ifndef SEK_CONFORMER_LE_CONFORMER_H_
#define SEK_CONFORMER_LE_CONFORMER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "sek/nn/attention.h"
#include "sek/nn/conformer_modules.h"
#include "sek/nn/layers.h"

namespace sek::conformer {

enum class Aggregation {
  kConcat,           // channel-wise concatenation of every block output
  kWeightedAverage,  // softmax-normalized learnable weights
  kLastOnly,
};

const char* AggregationName(Aggregation a);
Aggregation ParseAggregation(const std::string& name);

struct LEConformerConfig {
  int64_t feature_dim = 80;
  int64_t vgg_channels1 = 32;
  int64_t vgg_channels2 = 64;
  int64_t blocks = 6;
  int64_t heads = 4;
  int64_t model_dim = 512;
  int64_t conv_kernel = 15;
  int64_t ffn_hidden = 2048;
  int64_t ffn_kernel = 3;
  int64_t se_reduction = 16;
  Aggregation aggregation = Aggregation::kConcat;
  bool enable_se = true;
  bool enable_dwconv = true;
  bool relative_position = true;

  static LEConformerConfig Paper();
  static LEConformerConfig Toy();

  // Channel width of the aggregated frame sequence.
  int64_t output_dim() const {
    return aggregation == Aggregation::kConcat ? blocks * model_dim : model_dim;
  }
  void Validate() const;
};

// Two stages of (3x3 conv, ReLU, 3x3 conv, ReLU, 2x2 max-pool), then the
// channel x frequency plane of every frame is projected to model_dim.
// [B, T, F] -> [B, T/4, d].
template <typename T>
class VggSubsampler {
 public:
  VggSubsampler() = default;
  VggSubsampler(nn::ParamScope<T> scope, const LEConformerConfig& cfg);
  Tensor<T> Forward(const Tensor<T>& feats) const;

 private:
  int64_t feature_dim_ = 0;
  nn::Conv2dLayer<T> conv1a_, conv1b_, conv2a_, conv2b_;
  nn::Linear<T> project_;
};

// z~ = z + FFN(z)/2; z' = z~ + MSA(z~); z'' = z' + Conv(z');
// out = LayerNorm(z'' + FFN(z'')/2), both FFNs locality-enhanced.
template <typename T>
class LEConformerBlock {
 public:
  LEConformerBlock() = default;
  LEConformerBlock(nn::ParamScope<T> scope, const LEConformerConfig& cfg);

  Tensor<T> Forward(const Tensor<T>& z, bool training) const;

  nn::LocalityEnhancedFFN<T>& ffn1() { return ffn1_; }
  nn::LocalityEnhancedFFN<T>& ffn2() { return ffn2_; }
  nn::MultiHeadSelfAttention<T>& attention() { return attention_; }
  nn::ConformerConvModule<T>& conv() { return conv_; }

 private:
  nn::LocalityEnhancedFFN<T> ffn1_, ffn2_;
  nn::LayerNormLayer<T> attention_norm_, final_norm_;
  nn::MultiHeadSelfAttention<T> attention_;
  nn::ConformerConvModule<T> conv_;
};

// outputs: N tensors [B, T', d]. `weights` ([N] logits) is only read for
// kWeightedAverage.
template <typename T>
Tensor<T> AggregateBlocks(const std::vector<Tensor<T>>& outputs,
                          Aggregation mode, const Tensor<T>& weights);

template <typename T>
class LEConformerEncoder {
 public:
  LEConformerEncoder() = default;
  LEConformerEncoder(nn::ParamScope<T> scope, const LEConformerConfig& cfg);

  // [B, T, F] -> [B, T/4, output_dim()].
  Tensor<T> Forward(const Tensor<T>& feats, bool training) const;
  // Output of every block, [B, T/4, d] each.
  std::vector<Tensor<T>> BlockOutputs(const Tensor<T>& feats, bool training) const;

  const LEConformerConfig& config() const { return cfg_; }
  const VggSubsampler<T>& subsampler() const { return frontend_; }
  std::vector<LEConformerBlock<T>>& blocks() { return blocks_; }
  const Tensor<T>& aggregation_weights() const { return aggregation_weights_; }

 private:
  LEConformerConfig cfg_;
  VggSubsampler<T> frontend_;
  std::vector<LEConformerBlock<T>> blocks_;
  Tensor<T> aggregation_weights_;
};

}  // namespace sek::conformer

#endif  // SEK_CONFORMER_LE_CONFORMER_H_
