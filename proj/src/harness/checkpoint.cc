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

#include "sek/harness/checkpoint.h"

#include <fstream>
#include <set>
#include <sstream>

#include "sek/base/binary_io.h"
#include "sek/base/error.h"

namespace sek::harness {

namespace {

constexpr char kMagic[4] = {'S', 'E', 'K', 'T'};
constexpr const char* kConfigRecord = "__config__";
constexpr const char* kStepRecord = "__step__";

size_t ElementSize(RecordType t) {
  switch (t) {
    case RecordType::kFloat32: return 4;
    case RecordType::kFloat64: return 8;
    case RecordType::kUInt8: return 1;
    case RecordType::kUInt64: return 8;
  }
  throw IoError("checkpoint: unknown record type " + std::to_string(static_cast<int>(t)));
}

const char* TypeName(RecordType t) {
  switch (t) {
    case RecordType::kFloat32: return "f32";
    case RecordType::kFloat64: return "f64";
    case RecordType::kUInt8: return "u8";
    case RecordType::kUInt64: return "u64";
  }
  return "?";
}

template <typename T>
constexpr RecordType TypeOf() {
  return sizeof(T) == 4 ? RecordType::kFloat32 : RecordType::kFloat64;
}

size_t NumElements(const std::vector<uint32_t>& dims) {
  size_t n = 1;
  for (uint32_t d : dims) n *= d;
  return n;
}

void WriteRecord(std::ostream& out, const CheckpointRecord& r) {
  Check<ValidationError>(r.name.size() <= 0xffff && r.dims.size() <= 0xff,
                         "checkpoint: record '", r.name, "' cannot be encoded");
  io::WriteLE<uint16_t>(out, static_cast<uint16_t>(r.name.size()));
  out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
  io::WriteLE<uint8_t>(out, static_cast<uint8_t>(r.type));
  io::WriteLE<uint8_t>(out, static_cast<uint8_t>(r.dims.size()));
  for (uint32_t d : r.dims) io::WriteLE<uint32_t>(out, d);
  out.write(reinterpret_cast<const char*>(r.payload.data()),
            static_cast<std::streamsize>(r.payload.size()));
}

template <typename V>
std::vector<unsigned char> EncodeLE(std::span<const V> values) {
  std::ostringstream ss(std::ios::binary);
  for (V v : values) io::WriteLE<V>(ss, v);
  std::string s = ss.str();
  return {s.begin(), s.end()};
}

}  // namespace

const CheckpointRecord* CheckpointFile::Find(const std::string& name) const {
  for (const auto& r : tensors) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

int64_t CheckpointFile::num_speakers() const {
  const CheckpointRecord* w = Find("classifier.weight");
  Check<ValidationError>(w != nullptr && w->dims.size() == 2,
                         "checkpoint: missing classifier.weight");
  return w->dims[0];
}

template <typename T>
void SaveCheckpoint(const std::string& path, const SpeakerNet<T>& net, uint64_t step) {
  std::vector<CheckpointRecord> records;
  std::string cfg = SerializeRunConfig(net.config());
  records.push_back({kConfigRecord, RecordType::kUInt8,
                     {static_cast<uint32_t>(cfg.size())},
                     {cfg.begin(), cfg.end()}});
  records.push_back({kStepRecord, RecordType::kUInt64, {},
                     EncodeLE<uint64_t>(std::span<const uint64_t>(&step, 1))});
  for (const auto& e : net.store().entries()) {
    CheckpointRecord r;
    r.name = e.name;
    r.type = TypeOf<T>();
    for (int64_t d : e.tensor.shape()) r.dims.push_back(static_cast<uint32_t>(d));
    r.payload = EncodeLE<T>(e.tensor.data());
    records.push_back(std::move(r));
  }

  std::ofstream out(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(out), "cannot write checkpoint '", path, "'");
  out.write(kMagic, 4);
  io::WriteLE<uint32_t>(out, kCheckpointVersion);
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(records.size()));
  for (const auto& r : records) WriteRecord(out, r);
  Check<IoError>(static_cast<bool>(out), "failed writing checkpoint '", path, "'");
}

CheckpointFile ReadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(in), "cannot open checkpoint '", path, "'");
  io::ExpectMagic(in, kMagic, path);
  auto version = io::ReadLE<uint32_t>(in, path);
  Check<IoError>(version == kCheckpointVersion, path, ": unsupported checkpoint version ",
                 version);
  auto count = io::ReadLE<uint32_t>(in, path);

  CheckpointFile file;
  bool have_config = false, have_step = false;
  std::set<std::string> names;
  for (uint32_t i = 0; i < count; ++i) {
    CheckpointRecord r;
    r.name.resize(io::ReadLE<uint16_t>(in, path));
    in.read(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    r.type = static_cast<RecordType>(io::ReadLE<uint8_t>(in, path));
    r.dims.resize(io::ReadLE<uint8_t>(in, path));
    for (auto& d : r.dims) d = io::ReadLE<uint32_t>(in, path);
    r.payload.resize(NumElements(r.dims) * ElementSize(r.type));
    in.read(reinterpret_cast<char*>(r.payload.data()),
            static_cast<std::streamsize>(r.payload.size()));
    Check<IoError>(static_cast<bool>(in), path, ": truncated record '", r.name, "'");
    Check<IoError>(names.insert(r.name).second, path, ": duplicate record '", r.name, "'");

    if (r.name == kConfigRecord) {
      Check<IoError>(r.type == RecordType::kUInt8, path, ": config record must be u8");
      file.config = ParseRunConfig(std::string(r.payload.begin(), r.payload.end()));
      have_config = true;
    } else if (r.name == kStepRecord) {
      Check<IoError>(r.type == RecordType::kUInt64 && r.dims.empty(), path,
                     ": step record must be a u64 scalar");
      std::istringstream ss(std::string(r.payload.begin(), r.payload.end()));
      file.step = io::ReadLE<uint64_t>(ss, path);
      have_step = true;
    } else {
      file.tensors.push_back(std::move(r));
    }
  }
  Check<IoError>(have_config && have_step, path, ": missing config or step record");
  char extra;
  Check<IoError>(!in.read(&extra, 1), path, ": trailing bytes after last record");
  return file;
}

template <typename T>
void RestoreParameters(const CheckpointFile& file, nn::ParameterStore<T>& store) {
  std::set<std::string> stored, expected;
  for (const auto& r : file.tensors) stored.insert(r.name);
  for (const auto& e : store.entries()) expected.insert(e.name);
  for (const auto& name : expected) {
    Check<ValidationError>(stored.count(name), "checkpoint lacks parameter '", name, "'");
  }
  for (const auto& name : stored) {
    Check<ValidationError>(expected.count(name), "checkpoint has unknown parameter '",
                           name, "'");
  }

  for (auto& e : store.entries()) {
    const CheckpointRecord& r = *file.Find(e.name);
    Check<DTypeError>(r.type == TypeOf<T>(), "checkpoint parameter '", e.name, "' is ",
                      TypeName(r.type), " but the model uses ", TypeName(TypeOf<T>()));
    Shape shape(r.dims.begin(), r.dims.end());
    Check<ValidationError>(shape == e.tensor.shape(), "checkpoint parameter '", e.name,
                           "' has shape ", ShapeToString(shape), ", model expects ",
                           ShapeToString(e.tensor.shape()));
    std::istringstream ss(std::string(r.payload.begin(), r.payload.end()));
    for (T& v : e.tensor.data()) v = io::ReadLE<T>(ss, e.name);
  }
}

template <typename T>
std::unique_ptr<SpeakerNet<T>> LoadSpeakerNet(const std::string& path, uint64_t* step) {
  CheckpointFile file = ReadCheckpoint(path);
  auto net = std::make_unique<SpeakerNet<T>>(file.config, file.num_speakers());
  RestoreParameters(file, net->store());
  if (step) *step = file.step;
  return net;
}

template void SaveCheckpoint(const std::string&, const SpeakerNet<float>&, uint64_t);
template void SaveCheckpoint(const std::string&, const SpeakerNet<double>&, uint64_t);
template void RestoreParameters(const CheckpointFile&, nn::ParameterStore<float>&);
template void RestoreParameters(const CheckpointFile&, nn::ParameterStore<double>&);
template std::unique_ptr<SpeakerNet<float>> LoadSpeakerNet(const std::string&, uint64_t*);
template std::unique_ptr<SpeakerNet<double>> LoadSpeakerNet(const std::string&, uint64_t*);

}  // namespace sek::harness
