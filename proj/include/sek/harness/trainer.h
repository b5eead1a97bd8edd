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

#ifndef SEK_HARNESS_TRAINER_H_
#define SEK_HARNESS_TRAINER_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "sek/frontend/fbank.h"
#include "sek/harness/config.h"
#include "sek/harness/model.h"
#include "sek/harness/synth.h"
#include "sek/head/head.h"

namespace sek::harness {

// Features for one manifest path: "SEKF" files are read directly, anything
// else is decoded as a waveform and run through the extractor.
frontend::LogMelFeatures LoadFeatures(const std::string& path,
                                      const frontend::LogMelExtractor& extractor);

// In-memory training set. Speaker labels follow sorted speaker ids.
struct Dataset {
  std::vector<std::string> utt_ids;
  std::vector<frontend::LogMelFeatures> features;
  std::vector<int64_t> labels;
  std::vector<std::string> speakers;               // label -> speaker id
  std::vector<std::vector<int64_t>> by_speaker;    // label -> utterance indices

  size_t size() const { return features.size(); }
};

Dataset LoadDataset(const std::vector<ManifestEntry>& manifest,
                    const frontend::FbankOptions& opts = {});

struct StepRecord {
  int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

// Utterance indices of batch `step`: speakers uniformly, then utterances
// uniformly within the speaker. Deterministic in (seed, step).
std::vector<int64_t> SampleBatch(const Dataset& data, int64_t batch_size, uint64_t seed,
                                 int64_t step);

// Crop of utterance `utt` for `epoch`; fixed per (seed, epoch, utt).
frontend::LogMelFeatures EpochCrop(const frontend::LogMelFeatures& feats, int64_t frames,
                                   uint64_t seed, int64_t epoch, int64_t utt);

// Trains from scratch. Writes `out_dir`/train_log.csv (step,lr,loss),
// periodic checkpoint-<step>.sekt files and the final model.sekt. Aborts
// with RuntimeFailure on a non-finite loss.
std::vector<StepRecord> Train(const RunConfig& cfg, const Dataset& data,
                              const std::string& out_dir, std::ostream* progress = nullptr);

// Eval-mode embeddings, one per utterance. SST inputs are tiled cyclically
// up to a whole number of chunks.
template <typename T>
head::EmbeddingStore ExtractEmbeddings(const SpeakerNet<T>& net,
                                       const std::vector<std::string>& utt_ids,
                                       const std::vector<frontend::LogMelFeatures>& feats);

head::EmbeddingStore Extract(const std::string& checkpoint,
                             const std::vector<ManifestEntry>& manifest,
                             const frontend::FbankOptions& opts = {});

}  // namespace sek::harness

#endif  // SEK_HARNESS_TRAINER_H_
