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

#ifndef SEK_HARNESS_CHECKPOINT_H_
#define SEK_HARNESS_CHECKPOINT_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sek/harness/config.h"
#include "sek/harness/model.h"

namespace sek::harness {

enum class RecordType : uint8_t { kFloat32 = 0, kFloat64 = 1, kUInt8 = 2, kUInt64 = 3 };

struct CheckpointRecord {
  std::string name;
  RecordType type = RecordType::kFloat32;
  std::vector<uint32_t> dims;
  std::vector<unsigned char> payload;  // little-endian element bytes
};

// "SEKT", u32 version, u32 record count, then per record: u16 name length,
// name, u8 type, u8 ndim, u32 dims, payload. The run config and step counter
// are stored as the records "__config__" (u8 text) and "__step__" (u64).
struct CheckpointFile {
  RunConfig config;
  uint64_t step = 0;
  std::vector<CheckpointRecord> tensors;

  const CheckpointRecord* Find(const std::string& name) const;
  // Classifier rows.
  int64_t num_speakers() const;
};

inline constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void SaveCheckpoint(const std::string& path, const SpeakerNet<T>& net, uint64_t step);

CheckpointFile ReadCheckpoint(const std::string& path);

// Copies every tensor into `store`. The name sets must match exactly and
// shapes must agree (ValidationError); a tensor stored with another dtype
// raises DTypeError.
template <typename T>
void RestoreParameters(const CheckpointFile& file, nn::ParameterStore<T>& store);

// Builds the model described by the checkpoint and restores its parameters.
template <typename T>
std::unique_ptr<SpeakerNet<T>> LoadSpeakerNet(const std::string& path,
                                              uint64_t* step = nullptr);

}  // namespace sek::harness

#endif  // SEK_HARNESS_CHECKPOINT_H_
