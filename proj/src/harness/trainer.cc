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

#include "sek/harness/trainer.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "sek/base/error.h"
#include "sek/harness/checkpoint.h"
#include "sek/harness/optimizer.h"
#include "sek/tensor/autodiff.h"

namespace sek::harness {

namespace {

namespace fs = std::filesystem;

bool IsFeatureFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in && std::memcmp(magic, "SEKF", 4) == 0;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
Tensor<T> StackFeatures(const std::vector<frontend::LogMelFeatures>& items) {
  const int64_t frames = items.front().frames, bins = items.front().bins;
  std::vector<T> values;
  values.reserve(items.size() * static_cast<size_t>(frames * bins));
  for (const auto& f : items) {
    Check<ShapeError>(f.frames == frames && f.bins == bins,
                      "batch items differ in shape");
    values.insert(values.end(), f.data.begin(), f.data.end());
  }
  return Tensor<T>({static_cast<int64_t>(items.size()), frames, bins}, std::move(values));
}

// Repeats rows cyclically up to the next multiple of `multiple`.
frontend::LogMelFeatures TileToMultiple(const frontend::LogMelFeatures& feats,
                                        int64_t multiple) {
  const int64_t target = (feats.frames + multiple - 1) / multiple * multiple;
  if (target == feats.frames) return feats;
  frontend::LogMelFeatures out;
  out.frames = target;
  out.bins = feats.bins;
  out.data.reserve(static_cast<size_t>(target * feats.bins));
  for (int64_t t = 0; t < target; ++t) {
    auto row = feats.row(t % feats.frames);
    out.data.insert(out.data.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace

frontend::LogMelFeatures LoadFeatures(const std::string& path,
                                      const frontend::LogMelExtractor& extractor) {
  if (IsFeatureFile(path)) return frontend::ReadFeatures(path);
  return extractor.Compute(frontend::ReadWaveform(path));
}

Dataset LoadDataset(const std::vector<ManifestEntry>& manifest,
                    const frontend::FbankOptions& opts) {
  std::map<std::string, int64_t> label_of;
  for (const auto& e : manifest) label_of.emplace(e.speaker_id, 0);
  Dataset data;
  for (auto& [id, label] : label_of) {
    label = static_cast<int64_t>(data.speakers.size());
    data.speakers.push_back(id);
  }
  data.by_speaker.resize(data.speakers.size());
  frontend::LogMelExtractor extractor(opts);
  for (const auto& e : manifest) {
    int64_t label = label_of.at(e.speaker_id);
    data.by_speaker[label].push_back(static_cast<int64_t>(data.features.size()));
    data.utt_ids.push_back(e.utt_id);
    data.labels.push_back(label);
    data.features.push_back(LoadFeatures(e.path, extractor));
  }
  return data;
}

std::vector<int64_t> SampleBatch(const Dataset& data, int64_t batch_size, uint64_t seed,
                                 int64_t step) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(step), 0xba7c4u};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<size_t> pick_speaker(0, data.speakers.size() - 1);
  std::vector<int64_t> batch;
  for (int64_t i = 0; i < batch_size; ++i) {
    const auto& utts = data.by_speaker[pick_speaker(rng)];
    std::uniform_int_distribution<size_t> pick_utt(0, utts.size() - 1);
    batch.push_back(utts[pick_utt(rng)]);
  }
  return batch;
}

frontend::LogMelFeatures EpochCrop(const frontend::LogMelFeatures& feats, int64_t frames,
                                   uint64_t seed, int64_t epoch, int64_t utt) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(epoch), static_cast<uint32_t>(utt), 0xc40bu};
  std::mt19937_64 rng(seq);
  return frontend::CropSegment(feats, frames, rng);
}

std::vector<StepRecord> Train(const RunConfig& cfg, const Dataset& data,
                              const std::string& out_dir, std::ostream* progress) {
  cfg.Validate();
  Check<ValidationError>(data.speakers.size() >= 2, "training needs at least 2 speakers");
  for (const auto& f : data.features) {
    Check<ValidationError>(f.bins == cfg.feature_dim(), "features have ", f.bins,
                           " bins, config expects ", cfg.feature_dim());
  }
  for (size_t i = 0; i < data.size(); ++i) {
    for (float v : data.features[i].data) {
      Check<ValidationError>(std::isfinite(v), "utterance '", data.utt_ids[i],
                             "' has non-finite features");
    }
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  Check<IoError>(!ec, "cannot create '", out_dir, "': ", ec.message());
  const fs::path root(out_dir);
  std::ofstream csv(root / "train_log.csv", std::ios::binary);
  Check<IoError>(static_cast<bool>(csv), "cannot write ", (root / "train_log.csv").string());
  csv << "step,lr,loss\n";

  SpeakerNet<float> net(cfg, static_cast<int64_t>(data.speakers.size()));
  AdamWOptions adam;
  adam.weight_decay = cfg.weight_decay;
  AdamW<float> optimizer(net.store(), adam);

  const auto num_utts = static_cast<int64_t>(data.size());
  std::vector<StepRecord> log;
  double window_loss = 0.0;
  for (int64_t step = 1; step <= cfg.steps; ++step) {
    const int64_t epoch = (step - 1) * cfg.batch_size / num_utts;
    std::vector<int64_t> batch = SampleBatch(data, cfg.batch_size, cfg.seed, step);
    std::vector<frontend::LogMelFeatures> crops;
    std::vector<int64_t> labels;
    for (int64_t utt : batch) {
      crops.push_back(EpochCrop(data.features[utt], cfg.segment_frames, cfg.seed, epoch, utt));
      labels.push_back(data.labels[utt]);
    }

    const double lr = LearningRate(cfg, step);
    net.store().ZeroGrad();
    Tensor<float> loss = net.Loss(StackFeatures<float>(crops), labels, true);
    const double value = loss.item();
    Check<RuntimeFailure>(std::isfinite(value), "non-finite loss (", value, ") at step ",
                          step);
    Backward(loss);
    if (cfg.grad_clip > 0) optimizer.ClipGradNorm(cfg.grad_clip);
    optimizer.Step(lr);

    log.push_back({step, lr, value});
    csv << step << ',' << FormatDouble(lr) << ',' << FormatDouble(value) << '\n';
    window_loss += value;
    if (progress && step % cfg.log_every == 0) {
      *progress << "step " << step << " lr " << lr << " loss "
                << window_loss / static_cast<double>(cfg.log_every) << std::endl;
    }
    if (step % cfg.log_every == 0) window_loss = 0.0;
    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 && step < cfg.steps) {
      SaveCheckpoint((root / ("checkpoint-" + std::to_string(step) + ".sekt")).string(),
                     net, static_cast<uint64_t>(step));
    }
  }
  Check<IoError>(static_cast<bool>(csv), "failed writing training log");
  SaveCheckpoint((root / "model.sekt").string(), net, static_cast<uint64_t>(cfg.steps));
  return log;
}

template <typename T>
head::EmbeddingStore ExtractEmbeddings(const SpeakerNet<T>& net,
                                       const std::vector<std::string>& utt_ids,
                                       const std::vector<frontend::LogMelFeatures>& feats) {
  Check<ValidationError>(utt_ids.size() == feats.size(),
                         "extract: ids and features differ in count");
  NoGradGuard no_grad;
  head::EmbeddingStore store;
  for (size_t i = 0; i < feats.size(); ++i) {
    Check<ValidationError>(feats[i].bins == net.config().feature_dim(), "utterance '",
                           utt_ids[i], "' has ", feats[i].bins, " bins, model expects ",
                           net.config().feature_dim());
    Check<ValidationError>(feats[i].frames >= 4, "utterance '", utt_ids[i],
                           "' is too short (", feats[i].frames, " frames)");
    auto tiled = TileToMultiple(feats[i], net.FrameMultiple());
    Tensor<T> emb = net.Embed(StackFeatures<T>({tiled}), false);
    store.Add(utt_ids[i], std::vector<float>(emb.data().begin(), emb.data().end()));
  }
  return store;
}

head::EmbeddingStore Extract(const std::string& checkpoint,
                             const std::vector<ManifestEntry>& manifest,
                             const frontend::FbankOptions& opts) {
  auto net = LoadSpeakerNet<float>(checkpoint);
  frontend::LogMelExtractor extractor(opts);
  std::vector<std::string> ids;
  std::vector<frontend::LogMelFeatures> feats;
  for (const auto& e : manifest) {
    ids.push_back(e.utt_id);
    feats.push_back(LoadFeatures(e.path, extractor));
  }
  return ExtractEmbeddings(*net, ids, feats);
}

template head::EmbeddingStore ExtractEmbeddings(const SpeakerNet<float>&,
                                                const std::vector<std::string>&,
                                                const std::vector<frontend::LogMelFeatures>&);
template head::EmbeddingStore ExtractEmbeddings(const SpeakerNet<double>&,
                                                const std::vector<std::string>&,
                                                const std::vector<frontend::LogMelFeatures>&);

}  // namespace sek::harness
