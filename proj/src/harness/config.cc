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

#include "sek/harness/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sek/base/error.h"

namespace sek::harness {

namespace {

using conformer::Aggregation;
using swin::FrequencyReduction;
using swin::PatchMode;

std::string Trim(const std::string& s) {
  const char* ws = " \t\r\n";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename V>
V ParseNumber(const std::string& key, const std::string& text) {
  V v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  Check<ValidationError>(ec == std::errc() && ptr == end, "config key '", key,
                         "': cannot parse '", text, "' as a number");
  return v;
}

bool ParseBool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ValidationError("config key '" + key + "': expected true or false, got '" +
                        text + "'");
}

std::vector<int64_t> ParseIntList(const std::string& key, const std::string& text) {
  std::vector<int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(ParseNumber<int64_t>(key, Trim(item)));
  }
  Check<ValidationError>(!out.empty(), "config key '", key, "': empty list");
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string FormatList(const std::vector<int64_t>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define SEK_INT_FIELD(name, member)                                          \
  Field {                                                                    \
    name, [](const RunConfig& c) { return std::to_string(c.member); },       \
        [](RunConfig& c, const std::string& v) {                             \
          c.member = ParseNumber<decltype(c.member)>(name, v);               \
        }                                                                    \
  }
#define SEK_DOUBLE_FIELD(name, member)                                       \
  Field {                                                                    \
    name, [](const RunConfig& c) { return FormatDouble(c.member); },         \
        [](RunConfig& c, const std::string& v) {                             \
          c.member = ParseNumber<double>(name, v);                           \
        }                                                                    \
  }
#define SEK_BOOL_FIELD(name, member)                                         \
  Field {                                                                    \
    name,                                                                    \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }, \
        [](RunConfig& c, const std::string& v) { c.member = ParseBool(name, v); } \
  }
#define SEK_LIST_FIELD(name, member)                                         \
  Field {                                                                    \
    name, [](const RunConfig& c) { return FormatList(c.member); },           \
        [](RunConfig& c, const std::string& v) {                             \
          c.member = ParseIntList(name, v);                                  \
        }                                                                    \
  }

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      {"model", [](const RunConfig& c) { return std::string(ModelKindName(c.model)); },
       [](RunConfig& c, const std::string& v) {
         if (v == "le_conformer") {
           c.model = ModelKind::kLEConformer;
         } else if (v == "sst") {
           c.model = ModelKind::kSST;
         } else {
           throw ValidationError("config key 'model': unknown model '" + v + "'");
         }
       }},
      SEK_INT_FIELD("seed", seed),
      SEK_INT_FIELD("steps", steps),
      SEK_INT_FIELD("batch_size", batch_size),
      SEK_INT_FIELD("segment_frames", segment_frames),
      SEK_DOUBLE_FIELD("lr", lr),
      SEK_DOUBLE_FIELD("min_lr", min_lr),
      SEK_DOUBLE_FIELD("weight_decay", weight_decay),
      SEK_INT_FIELD("warmup_steps", warmup_steps),
      {"schedule", [](const RunConfig& c) { return std::string(ScheduleName(c.schedule)); },
       [](RunConfig& c, const std::string& v) {
         if (v == "linear_warmup_cyclic") {
           c.schedule = Schedule::kWarmupCyclic;
         } else if (v == "linear_warmup_constant") {
           c.schedule = Schedule::kWarmupConstant;
         } else {
           throw ValidationError("config key 'schedule': unknown schedule '" + v + "'");
         }
       }},
      SEK_INT_FIELD("cycle_steps", cycle_steps),
      SEK_DOUBLE_FIELD("grad_clip", grad_clip),
      SEK_INT_FIELD("log_every", log_every),
      SEK_INT_FIELD("checkpoint_every", checkpoint_every),
      SEK_INT_FIELD("embed_dim", embed_dim),
      SEK_INT_FIELD("asp_bottleneck", asp_bottleneck),
      SEK_DOUBLE_FIELD("am_margin", am_margin),
      SEK_DOUBLE_FIELD("am_scale", am_scale),
      {"feature_dim", [](const RunConfig& c) { return std::to_string(c.le.feature_dim); },
       [](RunConfig& c, const std::string& v) {
         c.le.feature_dim = c.sst.feature_dim = ParseNumber<int64_t>("feature_dim", v);
       }},
      SEK_INT_FIELD("le.vgg_channels1", le.vgg_channels1),
      SEK_INT_FIELD("le.vgg_channels2", le.vgg_channels2),
      SEK_INT_FIELD("le.blocks", le.blocks),
      SEK_INT_FIELD("le.heads", le.heads),
      SEK_INT_FIELD("le.model_dim", le.model_dim),
      SEK_INT_FIELD("le.conv_kernel", le.conv_kernel),
      SEK_INT_FIELD("le.ffn_hidden", le.ffn_hidden),
      SEK_INT_FIELD("le.ffn_kernel", le.ffn_kernel),
      SEK_INT_FIELD("le.se_reduction", le.se_reduction),
      {"le.aggregation",
       [](const RunConfig& c) { return std::string(conformer::AggregationName(c.le.aggregation)); },
       [](RunConfig& c, const std::string& v) {
         c.le.aggregation = conformer::ParseAggregation(v);
       }},
      SEK_BOOL_FIELD("le.enable_se", le.enable_se),
      SEK_BOOL_FIELD("le.enable_dwconv", le.enable_dwconv),
      SEK_BOOL_FIELD("le.relative_position", le.relative_position),
      SEK_INT_FIELD("sst.chunk_frames", sst.chunk_frames),
      SEK_INT_FIELD("sst.patch", sst.patch),
      SEK_INT_FIELD("sst.stride", sst.stride),
      SEK_INT_FIELD("sst.padding", sst.padding),
      SEK_INT_FIELD("sst.embed_dim", sst.embed_dim),
      {"sst.patch_mode",
       [](const RunConfig& c) { return std::string(swin::PatchModeName(c.sst.patch_mode)); },
       [](RunConfig& c, const std::string& v) { c.sst.patch_mode = swin::ParsePatchMode(v); }},
      SEK_INT_FIELD("sst.window", sst.window),
      SEK_INT_FIELD("sst.shift", sst.shift),
      SEK_LIST_FIELD("sst.depths", sst.depths),
      SEK_LIST_FIELD("sst.heads", sst.heads),
      SEK_INT_FIELD("sst.mlp_ratio", sst.mlp_ratio),
      {"sst.frequency_reduction",
       [](const RunConfig& c) {
         return std::string(swin::FrequencyReductionName(c.sst.frequency_reduction));
       },
       [](RunConfig& c, const std::string& v) {
         c.sst.frequency_reduction = swin::ParseFrequencyReduction(v);
       }},
  };
  return fields;
}

#undef SEK_INT_FIELD
#undef SEK_DOUBLE_FIELD
#undef SEK_BOOL_FIELD
#undef SEK_LIST_FIELD

}  // namespace

const char* ModelKindName(ModelKind m) {
  return m == ModelKind::kSST ? "sst" : "le_conformer";
}

const char* ScheduleName(Schedule s) {
  return s == Schedule::kWarmupConstant ? "linear_warmup_constant"
                                        : "linear_warmup_cyclic";
}

RunConfig RunConfig::PaperLEConformer() {
  RunConfig c;
  c.model = ModelKind::kLEConformer;
  c.le = conformer::LEConformerConfig::Paper();
  c.steps = 1000000;
  c.batch_size = 1024;
  c.segment_frames = 200;
  c.lr = 3e-4;
  c.min_lr = 1e-8;
  c.weight_decay = 5e-2;
  c.warmup_steps = 45000;
  c.log_every = 100;
  c.checkpoint_every = 10000;
  return c;
}

RunConfig RunConfig::PaperSST() {
  RunConfig c;
  c.model = ModelKind::kSST;
  c.sst = swin::SSTConfig::Paper();
  c.steps = 1000000;
  c.batch_size = 1600;
  c.segment_frames = 320;
  c.lr = 3e-2;
  c.min_lr = 1e-5;
  c.weight_decay = 5e-2;
  c.warmup_steps = 130000;
  c.log_every = 100;
  c.checkpoint_every = 10000;
  return c;
}

RunConfig RunConfig::ToyLEConformer() {
  RunConfig c;
  c.model = ModelKind::kLEConformer;
  c.le = conformer::LEConformerConfig::Toy();
  c.steps = 400;
  c.batch_size = 20;
  c.segment_frames = 200;
  c.lr = 2e-3;
  c.min_lr = 1e-5;
  c.warmup_steps = 30;
  c.cycle_steps = 10000;
  c.embed_dim = 64;
  c.asp_bottleneck = 32;
  c.am_margin = 0.2;
  c.am_scale = 30.0;
  return c;
}

RunConfig RunConfig::ToySST() {
  RunConfig c = ToyLEConformer();
  c.model = ModelKind::kSST;
  c.sst = swin::SSTConfig::Toy();
  return c;
}

RunConfig RunConfig::Preset(const std::string& name) {
  if (name == "paper_le_conformer") return PaperLEConformer();
  if (name == "paper_sst") return PaperSST();
  if (name == "toy_le_conformer") return ToyLEConformer();
  if (name == "toy_sst") return ToySST();
  throw ValidationError("unknown preset '" + name + "'");
}

void RunConfig::Validate() const {
  Check<ValidationError>(steps >= 1, "config: steps must be >= 1");
  Check<ValidationError>(batch_size >= 1, "config: batch_size must be >= 1");
  Check<ValidationError>(segment_frames >= 4, "config: segment_frames must be >= 4");
  Check<ValidationError>(lr > 0 && std::isfinite(lr), "config: lr must be positive");
  Check<ValidationError>(min_lr >= 0 && min_lr <= lr,
                         "config: min_lr must lie in [0, lr]");
  Check<ValidationError>(weight_decay >= 0, "config: weight_decay must be >= 0");
  Check<ValidationError>(warmup_steps >= 0, "config: warmup_steps must be >= 0");
  Check<ValidationError>(cycle_steps >= 2, "config: cycle_steps must be >= 2");
  Check<ValidationError>(grad_clip >= 0, "config: grad_clip must be >= 0");
  Check<ValidationError>(log_every >= 1, "config: log_every must be >= 1");
  Check<ValidationError>(checkpoint_every >= 0, "config: checkpoint_every must be >= 0");
  Check<ValidationError>(embed_dim >= 1, "config: embed_dim must be >= 1");
  Check<ValidationError>(asp_bottleneck >= 1, "config: asp_bottleneck must be >= 1");
  Check<ValidationError>(am_margin >= 0 && am_margin < 1,
                         "config: am_margin must lie in [0, 1)");
  Check<ValidationError>(am_scale > 0, "config: am_scale must be positive");
  Check<ValidationError>(le.feature_dim == sst.feature_dim,
                         "config: feature_dim differs between models");
  le.Validate();
  sst.Validate();
  if (model == ModelKind::kSST) {
    Check<ValidationError>(segment_frames % sst.chunk_frames == 0,
                           "config: segment_frames (", segment_frames,
                           ") must be a multiple of sst.chunk_frames (",
                           sst.chunk_frames, ")");
  }
}

std::vector<std::string> RunConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& f : Fields()) keys.push_back(f.key);
  return keys;
}

RunConfig ParseRunConfig(const std::string& text) {
  std::map<std::string, const Field*> by_key;
  for (const auto& f : Fields()) by_key[f.key] = &f;

  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    Check<ValidationError>(eq != std::string::npos, "config line ", line_no,
                           ": expected 'key = value'");
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    auto it = by_key.find(key);
    Check<ValidationError>(it != by_key.end(), "config line ", line_no,
                           ": unknown key '", key, "'");
    Check<ValidationError>(seen.insert(key).second, "config line ", line_no,
                           ": duplicate key '", key, "'");
    Check<ValidationError>(!value.empty(), "config line ", line_no, ": key '", key,
                           "' has no value");
    it->second->set(cfg, value);
  }
  cfg.Validate();
  return cfg;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  Check<IoError>(static_cast<bool>(in), "cannot open config '", path, "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseRunConfig(ss.str());
}

RunConfig ApplyOverrides(const RunConfig& base, const std::vector<std::string>& assignments) {
  std::map<std::string, std::string> values;
  for (const auto& f : Fields()) values[f.key] = f.get(base);
  for (const auto& a : assignments) {
    auto eq = a.find('=');
    Check<ValidationError>(eq != std::string::npos, "override '", a,
                           "' is not of the form key=value");
    std::string key = Trim(a.substr(0, eq));
    Check<ValidationError>(values.count(key), "override: unknown key '", key, "'");
    values[key] = Trim(a.substr(eq + 1));
  }
  std::string text;
  for (const auto& [key, value] : values) text += key + " = " + value + "\n";
  return ParseRunConfig(text);
}

std::string SerializeRunConfig(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : Fields()) {
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

void SaveRunConfig(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(out), "cannot write config '", path, "'");
  out << SerializeRunConfig(cfg);
  Check<IoError>(static_cast<bool>(out), "failed writing config '", path, "'");
}

}  // namespace sek::harness
