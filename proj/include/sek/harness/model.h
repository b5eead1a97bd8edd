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

#ifndef SEK_HARNESS_MODEL_H_
#define SEK_HARNESS_MODEL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "sek/conformer/le_conformer.h"
#include "sek/harness/config.h"
#include "sek/head/head.h"
#include "sek/swin/sst.h"

namespace sek::harness {

// Encoder, embedding head and AM-softmax classifier. Parameters live under
// "encoder.", "head." and "classifier.".
template <typename T>
class SpeakerNet {
 public:
  // Initialization is seeded from cfg.seed.
  SpeakerNet(const RunConfig& cfg, int64_t num_speakers);

  // [B, T, F] -> frame-level features [B, T', D].
  Tensor<T> Frames(const Tensor<T>& feats, bool training) const;
  // [B, T, F] -> [B, embed_dim].
  Tensor<T> Embed(const Tensor<T>& feats, bool training) const;
  Tensor<T> Loss(const Tensor<T>& feats, const std::vector<int64_t>& labels,
                 bool training) const;

  // Frames the encoder needs per input: SST inputs are whole chunks.
  int64_t FrameMultiple() const;

  nn::ParameterStore<T>& store() { return *store_; }
  const nn::ParameterStore<T>& store() const { return *store_; }
  const RunConfig& config() const { return cfg_; }
  int64_t num_speakers() const { return num_speakers_; }

 private:
  RunConfig cfg_;
  int64_t num_speakers_ = 0;
  std::unique_ptr<nn::ParameterStore<T>> store_;
  std::optional<conformer::LEConformerEncoder<T>> le_;
  std::optional<swin::SSTEncoder<T>> sst_;
  head::EmbeddingHead<T> head_;
  head::AMSoftmax<T> classifier_;
};

extern template class SpeakerNet<float>;
extern template class SpeakerNet<double>;

}  // namespace sek::harness

#endif  // SEK_HARNESS_MODEL_H_
