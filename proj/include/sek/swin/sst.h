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

#ifndef SEK_SWIN_SST_H_
#define SEK_SWIN_SST_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sek/nn/attention.h"
#include "sek/nn/layers.h"

// Speaker Swin Transformer. Grids are laid out [B, time, freq, C]; tokens
// are serialized in raster order with frequency fastest.
namespace sek::swin {

enum class PatchMode { kOverlapping, kNonOverlapping };
enum class FrequencyReduction { kFold, kMean };

const char* PatchModeName(PatchMode m);
PatchMode ParsePatchMode(const std::string& name);
const char* FrequencyReductionName(FrequencyReduction r);
FrequencyReduction ParseFrequencyReduction(const std::string& name);

struct GridShape {
  int64_t time = 0, freq = 0, channels = 0;
  bool operator==(const GridShape&) const = default;
};

struct SSTConfig {
  int64_t feature_dim = 80;
  int64_t chunk_frames = 160;
  int64_t patch = 7;
  int64_t stride = 4;
  int64_t padding = 3;
  int64_t embed_dim = 96;
  PatchMode patch_mode = PatchMode::kOverlapping;
  int64_t window = 5;
  int64_t shift = -1;  // -1 selects floor(window / 2)
  std::vector<int64_t> depths = {2, 2, 6, 2};
  std::vector<int64_t> heads = {3, 6, 12, 24};
  int64_t mlp_ratio = 4;
  FrequencyReduction frequency_reduction = FrequencyReduction::kFold;

  static SSTConfig Paper();
  static SSTConfig Toy();

  int64_t shift_size() const { return shift < 0 ? window / 2 : shift; }
  int64_t stage_channels(size_t stage) const { return embed_dim << stage; }
  void Validate() const;

  // Grid after patch embedding for one chunk.
  GridShape EmbedGrid() const;
  // Grid leaving each stage for one chunk.
  std::vector<GridShape> StageGrids() const;
  // Frame count contributed by one chunk and frame vector width.
  int64_t frames_per_chunk() const { return StageGrids().back().time; }
  int64_t output_dim() const;
};

// Splits the time axis (second to last) of [T, F] or [B, T, F] into
// contiguous chunks of `chunk` frames.
template <typename T>
std::vector<Tensor<T>> ChunkSplit(const Tensor<T>& feats, int64_t chunk);

// Zero-pads axes 1 and 2 of [B, H, W, C] up to multiples of `multiple`.
template <typename T>
Tensor<T> PadGrid(const Tensor<T>& grid, int64_t multiple);

// [B, H, W, C] with H, W multiples of M -> [B * nW, M*M, C]; windows in
// row-major order per batch item.
template <typename T>
Tensor<T> WindowPartition(const Tensor<T>& grid, int64_t window);

// Inverse of WindowPartition.
template <typename T>
Tensor<T> WindowReverse(const Tensor<T>& windows, int64_t window,
                        int64_t height, int64_t width);

// Additive mask [nW, 1, M*M, M*M] (0 or -inf) for a padded grid of
// height x width holding `valid_h` x `valid_w` real tokens, after a cyclic
// roll by (-shift, -shift). Pairs from different pre-roll regions are
// masked, as are padded keys (except each token's own position).
// Returns an undefined tensor when nothing needs masking.
template <typename T>
Tensor<T> WindowAttentionMask(int64_t height, int64_t width, int64_t valid_h,
                              int64_t valid_w, int64_t window, int64_t shift);

// Grid-level (shifted) local-window self-attention.
template <typename T>
class WindowAttention {
 public:
  WindowAttention() = default;
  WindowAttention(nn::ParamScope<T> scope, int64_t channels, int64_t heads,
                  int64_t window, int64_t shift);

  // [B, H, W, C] -> [B, H, W, C]. `attention` receives the post-softmax
  // weights [B * nW, heads, M*M, M*M] in rolled window coordinates.
  Tensor<T> Forward(const Tensor<T>& grid, Tensor<T>* attention = nullptr) const;

  int64_t window() const { return window_; }
  int64_t shift() const { return shift_; }
  const nn::MultiHeadSelfAttention<T>& msa() const { return msa_; }

 private:
  nn::MultiHeadSelfAttention<T> msa_;
  int64_t window_ = 0, shift_ = 0;
};

// Pre-norm block: x + WMSA(LN x); x + MLP(LN x).
template <typename T>
class SwinBlock {
 public:
  SwinBlock() = default;
  SwinBlock(nn::ParamScope<T> scope, int64_t channels, int64_t heads,
            int64_t window, int64_t shift, int64_t mlp_ratio);
  Tensor<T> Forward(const Tensor<T>& grid) const;

  WindowAttention<T>& attention() { return attention_; }
  const WindowAttention<T>& attention() const { return attention_; }

 private:
  nn::LayerNormLayer<T> norm1_, norm2_;
  WindowAttention<T> attention_;
  nn::Linear<T> fc1_, fc2_;
};

// 2x2 neighbourhoods concatenated (4C) and projected to 2C. Odd extents
// are zero-padded to even first.
template <typename T>
class PatchMerge {
 public:
  PatchMerge() = default;
  PatchMerge(nn::ParamScope<T> scope, int64_t channels);
  Tensor<T> Forward(const Tensor<T>& grid) const;
  nn::Linear<T>& reduction() { return reduction_; }

 private:
  nn::Linear<T> reduction_;
};

// [B, Tc, F] chunk -> [B, time, freq, C] grid, followed by LayerNorm.
template <typename T>
class PatchEmbed {
 public:
  PatchEmbed() = default;
  PatchEmbed(nn::ParamScope<T> scope, const SSTConfig& cfg);
  Tensor<T> Forward(const Tensor<T>& chunk) const;

 private:
  PatchMode mode_ = PatchMode::kOverlapping;
  int64_t patch_ = 0;
  nn::Conv2dLayer<T> proj_;
  nn::LayerNormLayer<T> norm_;
};

template <typename T>
class SSTEncoder {
 public:
  SSTEncoder() = default;
  SSTEncoder(nn::ParamScope<T> scope, const SSTConfig& cfg);

  // [B, T, F] with T a multiple of chunk_frames -> [B, T_out, output_dim()].
  Tensor<T> Forward(const Tensor<T>& feats) const;

  // Per-stage grids of the chunk-batched input [B * chunks, ...].
  std::vector<Tensor<T>> StageOutputs(const Tensor<T>& feats) const;

  const SSTConfig& config() const { return cfg_; }
  const std::vector<std::vector<SwinBlock<T>>>& stages() const { return stages_; }

 private:
  Tensor<T> Embed(const Tensor<T>& feats) const;

  SSTConfig cfg_;
  PatchEmbed<T> embed_;
  std::vector<std::vector<SwinBlock<T>>> stages_;
  std::vector<PatchMerge<T>> merges_;
  nn::LayerNormLayer<T> final_norm_;
};

enum class AttentionMode { kGlobal, kWindowed };

// Multiply-accumulate style cost of one attention layer over an f x t
// grid: global 4ftC^2 + 2(ft)^2 C, windowed 4ftC^2 + 2 M^2 ft C.
double AttentionCost(int64_t f, int64_t t, int64_t channels, int64_t window,
                     AttentionMode mode);

}  // namespace sek::swin

#endif  // SEK_SWIN_SST_H_
