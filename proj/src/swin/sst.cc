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

#include "sek/swin/sst.h"

#include <limits>

namespace sek::swin {

namespace {

int64_t CeilDiv(int64_t a, int64_t b) { return (a + b - 1) / b; }

}  // namespace

const char* PatchModeName(PatchMode m) {
  return m == PatchMode::kOverlapping ? "overlapping" : "non_overlapping";
}

PatchMode ParsePatchMode(const std::string& name) {
  if (name == "overlapping") return PatchMode::kOverlapping;
  if (name == "non_overlapping") return PatchMode::kNonOverlapping;
  throw ValidationError("unknown patch mode '" + name +
                        "' (expected overlapping or non_overlapping)");
}

const char* FrequencyReductionName(FrequencyReduction r) {
  return r == FrequencyReduction::kFold ? "fold" : "mean";
}

FrequencyReduction ParseFrequencyReduction(const std::string& name) {
  if (name == "fold") return FrequencyReduction::kFold;
  if (name == "mean") return FrequencyReduction::kMean;
  throw ValidationError("unknown frequency reduction '" + name +
                        "' (expected fold or mean)");
}

SSTConfig SSTConfig::Paper() { return SSTConfig{}; }

SSTConfig SSTConfig::Toy() {
  SSTConfig c;
  c.chunk_frames = 100;
  c.embed_dim = 32;
  c.depths = {2, 2};
  c.heads = {2, 4};
  return c;
}

void SSTConfig::Validate() const {
  Check<ValidationError>(feature_dim > 0 && chunk_frames > 0,
                         "sst: feature_dim and chunk_frames must be positive");
  Check<ValidationError>(patch > 0 && embed_dim > 0, "sst: patch and embed_dim must be positive");
  if (patch_mode == PatchMode::kOverlapping) {
    Check<ValidationError>(stride > 0 && stride < patch,
                           "sst: overlapping patches need 0 < stride < patch");
    Check<ValidationError>(padding >= 0, "sst: padding must be >= 0");
    Check<ValidationError>(chunk_frames + 2 * padding >= patch &&
                               feature_dim + 2 * padding >= patch,
                           "sst: chunk smaller than one patch");
  }
  Check<ValidationError>(window >= 1, "sst: window must be >= 1");
  Check<ValidationError>(shift_size() < window, "sst: shift must be < window");
  Check<ValidationError>(!depths.empty(), "sst: at least one stage required");
  Check<ValidationError>(heads.size() == depths.size(), "sst: ", heads.size(),
                         " head counts for ", depths.size(), " stages");
  for (size_t i = 0; i < depths.size(); ++i) {
    Check<ValidationError>(depths[i] > 0 && depths[i] % 2 == 0, "sst: stage ", i,
                           " depth ", depths[i], " must be a positive even number");
    Check<ValidationError>(heads[i] > 0 && stage_channels(i) % heads[i] == 0,
                           "sst: stage ", i, " channels ", stage_channels(i),
                           " not divisible by heads ", heads[i]);
  }
  Check<ValidationError>(mlp_ratio >= 1, "sst: mlp_ratio must be >= 1");
}

GridShape SSTConfig::EmbedGrid() const {
  if (patch_mode == PatchMode::kNonOverlapping)
    return {CeilDiv(chunk_frames, patch), CeilDiv(feature_dim, patch), embed_dim};
  return {(chunk_frames + 2 * padding - patch) / stride + 1,
          (feature_dim + 2 * padding - patch) / stride + 1, embed_dim};
}

std::vector<GridShape> SSTConfig::StageGrids() const {
  std::vector<GridShape> grids{EmbedGrid()};
  for (size_t i = 1; i < depths.size(); ++i) {
    const GridShape& p = grids.back();
    grids.push_back({CeilDiv(p.time, 2), CeilDiv(p.freq, 2), 2 * p.channels});
  }
  return grids;
}

int64_t SSTConfig::output_dim() const {
  const GridShape last = StageGrids().back();
  return frequency_reduction == FrequencyReduction::kFold
             ? last.freq * last.channels
             : last.channels;
}

template <typename T>
std::vector<Tensor<T>> ChunkSplit(const Tensor<T>& feats, int64_t chunk) {
  Check<ShapeError>(feats.ndim() == 2 || feats.ndim() == 3,
                    "chunk_split expects [T, F] or [B, T, F], got ",
                    ShapeToString(feats.shape()));
  Check<ValidationError>(chunk > 0, "chunk length must be positive");
  const int axis = feats.ndim() - 2;
  const int64_t t = feats.dim(axis);
  Check<ValidationError>(t % chunk == 0, "chunk_split: time axis ", axis, " (",
                         t, " frames) not divisible by chunk length ", chunk);
  std::vector<Tensor<T>> out;
  for (int64_t s = 0; s < t; s += chunk) out.push_back(Slice(feats, axis, s, chunk));
  return out;
}

template <typename T>
Tensor<T> PadGrid(const Tensor<T>& grid, int64_t multiple) {
  const int64_t ph = CeilDiv(grid.dim(1), multiple) * multiple - grid.dim(1);
  const int64_t pw = CeilDiv(grid.dim(2), multiple) * multiple - grid.dim(2);
  if (ph == 0 && pw == 0) return grid;
  return Pad(grid, {{0, 0}, {0, ph}, {0, pw}, {0, 0}});
}

template <typename T>
Tensor<T> WindowPartition(const Tensor<T>& grid, int64_t window) {
  Check<ShapeError>(grid.ndim() == 4, "window_partition expects [B, H, W, C], got ",
                    ShapeToString(grid.shape()));
  const int64_t b = grid.dim(0), h = grid.dim(1), w = grid.dim(2), c = grid.dim(3);
  Check<ShapeError>(h % window == 0 && w % window == 0, "window_partition: axes 1, 2 (",
                    h, "x", w, ") must be multiples of window ", window);
  Tensor<T> x = Reshape(grid, {b, h / window, window, w / window, window, c});
  x = Permute(x, {0, 1, 3, 2, 4, 5});
  return Reshape(x, {b * (h / window) * (w / window), window * window, c});
}

template <typename T>
Tensor<T> WindowReverse(const Tensor<T>& windows, int64_t window, int64_t height,
                        int64_t width) {
  Check<ShapeError>(windows.ndim() == 3 && windows.dim(1) == window * window,
                    "window_reverse expects [B*nW, M*M, C], got ",
                    ShapeToString(windows.shape()));
  const int64_t nh = height / window, nw = width / window, c = windows.dim(2);
  Check<ShapeError>(windows.dim(0) % (nh * nw) == 0,
                    "window_reverse: axis 0 not a multiple of the window count");
  const int64_t b = windows.dim(0) / (nh * nw);
  Tensor<T> x = Reshape(windows, {b, nh, nw, window, window, c});
  x = Permute(x, {0, 1, 3, 2, 4, 5});
  return Reshape(x, {b, height, width, c});
}

template <typename T>
Tensor<T> WindowAttentionMask(int64_t height, int64_t width, int64_t valid_h,
                              int64_t valid_w, int64_t window, int64_t shift) {
  if (shift == 0 && valid_h == height && valid_w == width) return Tensor<T>();
  const int64_t n = window * window;
  const int64_t nh = height / window, nw = width / window;
  // Region of an original coordinate along one axis: the wrapped strip
  // [0, shift) or one of the window-aligned cells starting at `shift`.
  auto region = [&](int64_t orig) {
    return orig < shift ? int64_t{0} : 1 + (orig - shift) / window;
  };
  std::vector<T> mask(nh * nw * n * n, T(0));
  std::vector<int64_t> id(n);
  std::vector<bool> padded(n);
  const T neg_inf = -std::numeric_limits<T>::infinity();
  for (int64_t wy = 0; wy < nh; ++wy)
    for (int64_t wx = 0; wx < nw; ++wx) {
      for (int64_t i = 0; i < n; ++i) {
        const int64_t oy = (wy * window + i / window + shift) % height;
        const int64_t ox = (wx * window + i % window + shift) % width;
        id[i] = region(oy) * (width + 1) + region(ox);
        padded[i] = oy >= valid_h || ox >= valid_w;
      }
      T* m = mask.data() + (wy * nw + wx) * n * n;
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < n; ++j)
          if (i != j && (id[i] != id[j] || padded[j])) m[i * n + j] = neg_inf;
    }
  return Tensor<T>({nh * nw, 1, n, n}, std::move(mask));
}

template <typename T>
WindowAttention<T>::WindowAttention(nn::ParamScope<T> scope, int64_t channels,
                                    int64_t heads, int64_t window, int64_t shift)
    : window_(window), shift_(shift) {
  nn::MSAConfig cfg;
  cfg.model_dim = channels;
  cfg.heads = heads;
  cfg.relative_position = nn::RelativePosition::kWindowBias;
  cfg.window = window;
  msa_ = nn::MultiHeadSelfAttention<T>(scope, cfg);
}

template <typename T>
Tensor<T> WindowAttention<T>::Forward(const Tensor<T>& grid,
                                      Tensor<T>* attention) const {
  Check<ShapeError>(grid.ndim() == 4, "window attention expects [B, H, W, C], got ",
                    ShapeToString(grid.shape()));
  const int64_t h = grid.dim(1), w = grid.dim(2);
  Tensor<T> x = PadGrid(grid, window_);
  const int64_t hp = x.dim(1), wp = x.dim(2);
  if (shift_ > 0) x = Roll2d(x, 1, -shift_, 2, -shift_);
  Tensor<T> mask = WindowAttentionMask<T>(hp, wp, h, w, window_, shift_);
  Tensor<T> windows = msa_.Forward(WindowPartition(x, window_),
                                   mask.defined() ? &mask : nullptr, attention);
  x = WindowReverse(windows, window_, hp, wp);
  if (shift_ > 0) x = Roll2d(x, 1, shift_, 2, shift_);
  if (hp != h) x = Slice(x, 1, 0, h);
  if (wp != w) x = Slice(x, 2, 0, w);
  return x;
}

template <typename T>
SwinBlock<T>::SwinBlock(nn::ParamScope<T> scope, int64_t channels, int64_t heads,
                        int64_t window, int64_t shift, int64_t mlp_ratio) {
  norm1_ = nn::LayerNormLayer<T>(scope.Sub("norm1"), channels);
  attention_ = WindowAttention<T>(scope.Sub("attention"), channels, heads, window, shift);
  norm2_ = nn::LayerNormLayer<T>(scope.Sub("norm2"), channels);
  fc1_ = nn::Linear<T>(scope.Sub("fc1"), channels, mlp_ratio * channels);
  fc2_ = nn::Linear<T>(scope.Sub("fc2"), mlp_ratio * channels, channels);
}

template <typename T>
Tensor<T> SwinBlock<T>::Forward(const Tensor<T>& grid) const {
  Tensor<T> x = Add(grid, attention_.Forward(norm1_.Forward(grid)));
  return Add(x, fc2_.Forward(Gelu(fc1_.Forward(norm2_.Forward(x)))));
}

template <typename T>
PatchMerge<T>::PatchMerge(nn::ParamScope<T> scope, int64_t channels) {
  reduction_ = nn::Linear<T>(scope.Sub("reduction"), 4 * channels, 2 * channels,
                             /*bias=*/false);
}

template <typename T>
Tensor<T> PatchMerge<T>::Forward(const Tensor<T>& grid) const {
  Check<ShapeError>(grid.ndim() == 4, "patch_merge expects [B, H, W, C], got ",
                    ShapeToString(grid.shape()));
  Tensor<T> x = PadGrid(grid, 2);
  const int64_t b = x.dim(0), h2 = x.dim(1) / 2, w2 = x.dim(2) / 2, c = x.dim(3);
  // Concatenation order: (0,0), (1,0), (0,1), (1,1) as (time, freq) offsets.
  x = Permute(Reshape(x, {b, h2, 2, w2, 2, c}), {0, 1, 3, 4, 2, 5});
  return reduction_.Forward(Reshape(x, {b, h2, w2, 4 * c}));
}

template <typename T>
PatchEmbed<T>::PatchEmbed(nn::ParamScope<T> scope, const SSTConfig& cfg)
    : mode_(cfg.patch_mode), patch_(cfg.patch) {
  Conv2dOptions opts;
  if (mode_ == PatchMode::kOverlapping) {
    opts.stride_h = opts.stride_w = cfg.stride;
    opts.pad_h = opts.pad_w = cfg.padding;
  } else {
    opts.stride_h = opts.stride_w = cfg.patch;
  }
  proj_ = nn::Conv2dLayer<T>(scope.Sub("proj"), 1, cfg.embed_dim, cfg.patch, opts);
  norm_ = nn::LayerNormLayer<T>(scope.Sub("norm"), cfg.embed_dim);
}

template <typename T>
Tensor<T> PatchEmbed<T>::Forward(const Tensor<T>& chunk) const {
  Check<ShapeError>(chunk.ndim() == 3, "patch_embed expects [B, T, F], got ",
                    ShapeToString(chunk.shape()));
  Tensor<T> x = Reshape(chunk, {chunk.dim(0), 1, chunk.dim(1), chunk.dim(2)});
  if (mode_ == PatchMode::kNonOverlapping) {
    const int64_t pt = CeilDiv(chunk.dim(1), patch_) * patch_ - chunk.dim(1);
    const int64_t pf = CeilDiv(chunk.dim(2), patch_) * patch_ - chunk.dim(2);
    if (pt > 0 || pf > 0) x = Pad(x, {{0, 0}, {0, 0}, {0, pt}, {0, pf}});
  }
  x = Permute(proj_.Forward(x), {0, 2, 3, 1});
  return norm_.Forward(x);
}

template <typename T>
SSTEncoder<T>::SSTEncoder(nn::ParamScope<T> scope, const SSTConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
  embed_ = PatchEmbed<T>(scope.Sub("patch_embed"), cfg_);
  for (size_t s = 0; s < cfg_.depths.size(); ++s) {
    const int64_t c = cfg_.stage_channels(s);
    if (s > 0)
      merges_.emplace_back(scope.Sub("merge" + std::to_string(s)), c / 2);
    std::vector<SwinBlock<T>> blocks;
    for (int64_t i = 0; i < cfg_.depths[s]; ++i)
      blocks.emplace_back(
          scope.Sub("stage" + std::to_string(s) + ".block" + std::to_string(i)), c,
          cfg_.heads[s], cfg_.window, i % 2 == 1 ? cfg_.shift_size() : 0,
          cfg_.mlp_ratio);
    stages_.push_back(std::move(blocks));
  }
  final_norm_ = nn::LayerNormLayer<T>(scope.Sub("final_norm"),
                                      cfg_.stage_channels(cfg_.depths.size() - 1));
}

template <typename T>
Tensor<T> SSTEncoder<T>::Embed(const Tensor<T>& feats) const {
  Check<ShapeError>(feats.ndim() == 3 && feats.dim(2) == cfg_.feature_dim,
                    "sst expects [B, T, ", cfg_.feature_dim, "], got ",
                    ShapeToString(feats.shape()));
  const int64_t t = feats.dim(1);
  Check<ValidationError>(t % cfg_.chunk_frames == 0, "sst: time axis 1 (", t,
                         " frames) not divisible by chunk length ", cfg_.chunk_frames);
  // Chunks are contiguous in time, so batching them is a pure reshape.
  const int64_t chunks = t / cfg_.chunk_frames;
  return embed_.Forward(
      Reshape(feats, {feats.dim(0) * chunks, cfg_.chunk_frames, cfg_.feature_dim}));
}

template <typename T>
std::vector<Tensor<T>> SSTEncoder<T>::StageOutputs(const Tensor<T>& feats) const {
  std::vector<Tensor<T>> outs;
  Tensor<T> x = Embed(feats);
  for (size_t s = 0; s < stages_.size(); ++s) {
    if (s > 0) x = merges_[s - 1].Forward(x);
    for (const auto& block : stages_[s]) x = block.Forward(x);
    outs.push_back(x);
  }
  outs.back() = final_norm_.Forward(outs.back());
  return outs;
}

template <typename T>
Tensor<T> SSTEncoder<T>::Forward(const Tensor<T>& feats) const {
  const int64_t b = feats.dim(0);
  Tensor<T> g = StageOutputs(feats).back();  // [B * chunks, Ht, Wf, C]
  const int64_t ht = g.dim(1), wf = g.dim(2), c = g.dim(3);
  const int64_t chunks = g.dim(0) / b;
  if (cfg_.frequency_reduction == FrequencyReduction::kMean)
    return Reshape(Mean(g, {2}), {b, chunks * ht, c});
  return Reshape(g, {b, chunks * ht, wf * c});
}

double AttentionCost(int64_t f, int64_t t, int64_t channels, int64_t window,
                     AttentionMode mode) {
  Check<ValidationError>(f > 0 && t > 0 && channels > 0 && window > 0,
                         "attention_cost arguments must be positive");
  const double ft = static_cast<double>(f) * static_cast<double>(t);
  const double c = static_cast<double>(channels);
  const double projections = 4.0 * ft * c * c;
  if (mode == AttentionMode::kGlobal) return projections + 2.0 * ft * ft * c;
  return projections + 2.0 * static_cast<double>(window * window) * ft * c;
}

#define SEK_SST_INSTANTIATE(T)                                                  \
  template std::vector<Tensor<T>> ChunkSplit(const Tensor<T>&, int64_t);        \
  template Tensor<T> PadGrid(const Tensor<T>&, int64_t);                        \
  template Tensor<T> WindowPartition(const Tensor<T>&, int64_t);                \
  template Tensor<T> WindowReverse(const Tensor<T>&, int64_t, int64_t, int64_t); \
  template Tensor<T> WindowAttentionMask<T>(int64_t, int64_t, int64_t, int64_t, \
                                            int64_t, int64_t);                  \
  template class WindowAttention<T>;                                            \
  template class SwinBlock<T>;                                                  \
  template class PatchMerge<T>;                                                 \
  template class PatchEmbed<T>;                                                 \
  template class SSTEncoder<T>;

SEK_SST_INSTANTIATE(float)
SEK_SST_INSTANTIATE(double)

}  // namespace sek::swin
