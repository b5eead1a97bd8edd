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

#ifndef SEK_HARNESS_CONFIG_H_
#define SEK_HARNESS_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "sek/conformer/le_conformer.h"
#include "sek/swin/sst.h"

namespace sek::harness {

enum class ModelKind { kLEConformer, kSST };
enum class Schedule { kWarmupCyclic, kWarmupConstant };

const char* ModelKindName(ModelKind m);
const char* ScheduleName(Schedule s);

// Everything needed to build, train and evaluate one model. Serialized as
// "key = value" lines in a fixed canonical order.
struct RunConfig {
  ModelKind model = ModelKind::kLEConformer;
  uint64_t seed = 1;

  // Training.
  int64_t steps = 1000;
  int64_t batch_size = 32;
  int64_t segment_frames = 200;
  double lr = 3e-4;      // peak
  double min_lr = 1e-8;  // floor of the cyclic schedule
  double weight_decay = 5e-2;
  int64_t warmup_steps = 100;
  Schedule schedule = Schedule::kWarmupCyclic;
  int64_t cycle_steps = 10000;
  double grad_clip = 0.0;  // global L2 norm; 0 disables
  int64_t log_every = 10;
  int64_t checkpoint_every = 0;  // 0: final checkpoint only

  // Head.
  int64_t embed_dim = 256;
  int64_t asp_bottleneck = 128;
  double am_margin = 0.2;
  double am_scale = 30.0;

  conformer::LEConformerConfig le;
  swin::SSTConfig sst;

  static RunConfig PaperLEConformer();
  static RunConfig PaperSST();
  static RunConfig ToyLEConformer();
  static RunConfig ToySST();
  // "paper_le_conformer", "paper_sst", "toy_le_conformer", "toy_sst".
  static RunConfig Preset(const std::string& name);

  int64_t feature_dim() const {
    return model == ModelKind::kSST ? sst.feature_dim : le.feature_dim;
  }

  // Throws ValidationError describing the first bad field.
  void Validate() const;
};

// Parses "key = value" text. '#' starts a comment. Unspecified keys keep
// their defaults; unknown or repeated keys are rejected.
RunConfig ParseRunConfig(const std::string& text);
RunConfig LoadRunConfig(const std::string& path);

// Canonical form: every key, fixed order, shortest round-trip numbers.
std::string SerializeRunConfig(const RunConfig& cfg);
void SaveRunConfig(const std::string& path, const RunConfig& cfg);

// Applies "key=value" assignments on top of `base` and revalidates.
RunConfig ApplyOverrides(const RunConfig& base, const std::vector<std::string>& assignments);

// All recognized keys in canonical order.
std::vector<std::string> RunConfigKeys();

}  // namespace sek::harness

#endif  // SEK_HARNESS_CONFIG_H_
