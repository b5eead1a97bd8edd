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

#include "sek/harness/model.h"

#include "sek/base/error.h"

namespace sek::harness {

template <typename T>
SpeakerNet<T>::SpeakerNet(const RunConfig& cfg, int64_t num_speakers)
    : cfg_(cfg),
      num_speakers_(num_speakers),
      store_(std::make_unique<nn::ParameterStore<T>>()) {
  cfg_.Validate();
  Check<ValidationError>(num_speakers >= 2, "model needs at least 2 speakers, got ",
                         num_speakers);
  std::mt19937_64 rng(cfg_.seed);
  nn::ParamScope<T> root(store_.get(), &rng);
  int64_t frame_dim = 0;
  if (cfg_.model == ModelKind::kLEConformer) {
    le_.emplace(root.Sub("encoder"), cfg_.le);
    frame_dim = cfg_.le.output_dim();
  } else {
    sst_.emplace(root.Sub("encoder"), cfg_.sst);
    frame_dim = cfg_.sst.output_dim();
  }
  head_ = head::EmbeddingHead<T>(root.Sub("head"), frame_dim, cfg_.embed_dim,
                                 cfg_.asp_bottleneck);
  classifier_ = head::AMSoftmax<T>(root.Sub("classifier"), cfg_.embed_dim, num_speakers,
                                   static_cast<T>(cfg_.am_margin),
                                   static_cast<T>(cfg_.am_scale));
}

template <typename T>
Tensor<T> SpeakerNet<T>::Frames(const Tensor<T>& feats, bool training) const {
  return le_ ? le_->Forward(feats, training) : sst_->Forward(feats);
}

template <typename T>
Tensor<T> SpeakerNet<T>::Embed(const Tensor<T>& feats, bool training) const {
  return head_.Forward(Frames(feats, training));
}

template <typename T>
Tensor<T> SpeakerNet<T>::Loss(const Tensor<T>& feats, const std::vector<int64_t>& labels,
                              bool training) const {
  return classifier_.Loss(Embed(feats, training), labels);
}

template <typename T>
int64_t SpeakerNet<T>::FrameMultiple() const {
  return sst_ ? cfg_.sst.chunk_frames : 1;
}

template class SpeakerNet<float>;
template class SpeakerNet<double>;

}  // namespace sek::harness
