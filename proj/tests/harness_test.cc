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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "sek/harness/bench.h"
#include "sek/harness/checkpoint.h"
#include "sek/harness/config.h"
#include "sek/harness/optimizer.h"
#include "sek/harness/synth.h"
#include "sek/harness/trainer.h"
#include "sek/tensor/autodiff.h"
#include "sek/tensor/ops.h"

namespace sek::harness {
namespace {

namespace fs = std::filesystem;

std::string ReadBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class HarnessDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sek_harness_" + std::string(
                ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

// A small LE-Conformer that trains in well under a second per step.
RunConfig TinyConfig() {
  return ApplyOverrides(RunConfig::ToyLEConformer(),
                        {"steps=3", "batch_size=4", "segment_frames=40", "warmup_steps=2",
                         "le.blocks=1", "le.model_dim=16", "le.heads=2", "le.ffn_hidden=32",
                         "le.vgg_channels1=4", "le.vgg_channels2=4", "embed_dim=8",
                         "asp_bottleneck=8", "log_every=1"});
}

SynthOptions TinyCorpus() {
  SynthOptions o;
  o.speakers = 3;
  o.utterances_per_speaker = 3;
  o.min_seconds = 0.6;
  o.max_seconds = 0.8;
  return o;
}

// ---------------------------------------------------------------- config

TEST(ConfigTest, PresetsRoundTripCanonically) {
  for (const char* name : {"paper_le_conformer", "paper_sst", "toy_le_conformer", "toy_sst"}) {
    const std::string text = SerializeRunConfig(RunConfig::Preset(name));
    EXPECT_EQ(SerializeRunConfig(ParseRunConfig(text)), text) << name;
  }
  EXPECT_THROW(RunConfig::Preset("nope"), ValidationError);
}

TEST(ConfigTest, ShippedConfigFilesMatchPresets) {
  for (const char* name : {"paper_le_conformer", "paper_sst", "toy_le_conformer", "toy_sst"}) {
    const std::string path = std::string(SEK_CONFIG_DIR) + "/" + name + ".cfg";
    EXPECT_EQ(SerializeRunConfig(LoadRunConfig(path)), SerializeRunConfig(RunConfig::Preset(name)))
        << path;
  }
}

TEST(ConfigTest, EveryKeyIsSerialized) {
  const std::string text = SerializeRunConfig(RunConfig{});
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) seen.insert(line.substr(0, line.find(' ')));
  for (const std::string& key : RunConfigKeys()) EXPECT_TRUE(seen.count(key)) << key;
  EXPECT_EQ(seen.size(), RunConfigKeys().size());
}

TEST(ConfigTest, ParsesCommentsAndRejectsBadInput) {
  RunConfig c = ParseRunConfig(
      "# comment\n\nmodel = sst\nsteps = 7   # trailing\nsst.depths = 2,2\n"
      "sst.heads = 2,4\nsst.embed_dim = 16\nsst.chunk_frames = 100\n"
      "segment_frames = 200\n");
  EXPECT_EQ(c.model, ModelKind::kSST);
  EXPECT_EQ(c.steps, 7);
  EXPECT_EQ(c.sst.depths, (std::vector<int64_t>{2, 2}));
  EXPECT_EQ(c.lr, RunConfig{}.lr);

  EXPECT_THROW(ParseRunConfig("bogus = 1\n"), ValidationError);
  EXPECT_THROW(ParseRunConfig("steps = 1\nsteps = 2\n"), ValidationError);
  EXPECT_THROW(ParseRunConfig("steps =\n"), ValidationError);
  EXPECT_THROW(ParseRunConfig("steps = 1.5\n"), ValidationError);
  EXPECT_THROW(ParseRunConfig("lr = 1e\n"), ValidationError);
  EXPECT_THROW(ParseRunConfig("steps 10\n"), ValidationError);
  EXPECT_THROW(ParseRunConfig("le.enable_se = maybe\n"), ValidationError);
  EXPECT_THROW(ParseRunConfig("steps = 0\n"), ValidationError);
  EXPECT_THROW(ParseRunConfig("model = sst\nsegment_frames = 150\n"), ValidationError);
}

TEST(ConfigTest, Overrides) {
  RunConfig c = ApplyOverrides(RunConfig::ToySST(), {"lr=0.5", "sst.window = 3"});
  EXPECT_EQ(c.lr, 0.5);
  EXPECT_EQ(c.sst.window, 3);
  EXPECT_EQ(c.model, ModelKind::kSST);
  EXPECT_THROW(ApplyOverrides(c, {"lr"}), ValidationError);
  EXPECT_THROW(ApplyOverrides(c, {"nope=1"}), ValidationError);
}

TEST_F(HarnessDir, ConfigFileRoundTrip) {
  RunConfig c = RunConfig::PaperSST();
  SaveRunConfig(Path("c.conf"), c);
  EXPECT_EQ(SerializeRunConfig(LoadRunConfig(Path("c.conf"))), SerializeRunConfig(c));
  EXPECT_THROW(LoadRunConfig(Path("missing.conf")), IoError);
}

// ---------------------------------------------------------------- schedule

TEST(ScheduleTest, WarmupThenTriangle) {
  RunConfig c;
  c.lr = 1e-2;
  c.min_lr = 1e-4;
  c.warmup_steps = 100;
  c.cycle_steps = 40;
  EXPECT_DOUBLE_EQ(LearningRate(c, 50), 5e-3);
  EXPECT_DOUBLE_EQ(LearningRate(c, 1), 1e-4);
  EXPECT_DOUBLE_EQ(LearningRate(c, 100), 1e-2);
  EXPECT_DOUBLE_EQ(LearningRate(c, 120), 1e-4);
  EXPECT_DOUBLE_EQ(LearningRate(c, 110), (1e-2 + 1e-4) / 2);
  EXPECT_DOUBLE_EQ(LearningRate(c, 140), 1e-2);
  for (int64_t s = 101; s < 400; ++s) {
    EXPECT_GE(LearningRate(c, s), c.min_lr - 1e-15);
    EXPECT_LE(LearningRate(c, s), c.lr + 1e-15);
    EXPECT_DOUBLE_EQ(LearningRate(c, s), LearningRate(c, s + 40));
  }
  c.schedule = Schedule::kWarmupConstant;
  EXPECT_DOUBLE_EQ(LearningRate(c, 120), 1e-2);
  EXPECT_DOUBLE_EQ(LearningRate(c, 5000), 1e-2);
  EXPECT_THROW(LearningRate(c, 0), ValidationError);
}

// ---------------------------------------------------------------- AdamW

TEST(AdamWTest, MatchesHandComputation) {
  nn::ParameterStore<double> store;
  std::mt19937_64 rng(1);
  nn::ParamScope<double> scope(&store, &rng);
  Tensor<double> p = scope.Constant("p", {2}, 0.0);
  p.data()[0] = 1.0;
  p.data()[1] = -2.0;
  AdamW<double> opt(store, {0.9, 0.999, 1e-8, 0.1});

  double x[2] = {1.0, -2.0}, m[2] = {0, 0}, v[2] = {0, 0};
  const double lr = 0.01;
  for (int t = 1; t <= 3; ++t) {
    store.ZeroGrad();
    Backward(SumAll(Mul(p, p)));  // grad = 2x
    opt.Step(lr);
    for (int i = 0; i < 2; ++i) {
      const double g = 2 * x[i];
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      x[i] = x[i] * (1 - lr * 0.1) - lr * mh / (std::sqrt(vh) + 1e-8);
    }
    EXPECT_NEAR(p.data()[0], x[0], 1e-14);
    EXPECT_NEAR(p.data()[1], x[1], 1e-14);
  }
  EXPECT_EQ(opt.steps(), 3);
}

TEST(AdamWTest, ClippingScalesTheNextStepOnly) {
  nn::ParameterStore<double> store;
  std::mt19937_64 rng(1);
  nn::ParamScope<double> scope(&store, &rng);
  Tensor<double> p = scope.Constant("p", {2}, 3.0);
  AdamW<double> opt(store, {});
  Backward(SumAll(Mul(p, p)));
  EXPECT_NEAR(opt.GradNorm(), 6 * std::sqrt(2.0), 1e-12);
  opt.ClipGradNorm(1.0);
  opt.Step(0.1);
  // Adam normalizes the magnitude away on the first step; the direction stays.
  EXPECT_NEAR(p.data()[0], 3.0 - 0.1, 1e-6);
  EXPECT_NEAR(p.data()[0], p.data()[1], 1e-15);
}

// ---------------------------------------------------------------- synth

TEST(SynthTest, DeterministicAndDistinct) {
  SynthOptions o = TinyCorpus();
  auto a = SynthesizeUtterance(MakeSpeaker(1, 5), 2, 5, o);
  auto b = SynthesizeUtterance(MakeSpeaker(1, 5), 2, 5, o);
  EXPECT_EQ(a.samples, b.samples);
  auto c = SynthesizeUtterance(MakeSpeaker(1, 5), 3, 5, o);
  EXPECT_NE(a.samples, c.samples);
  const double secs = static_cast<double>(a.samples.size()) / o.sample_rate;
  EXPECT_GE(secs, o.min_seconds);
  EXPECT_LE(secs, o.max_seconds);
  for (float s : a.samples) ASSERT_LE(std::abs(s), 1.0f);

  std::set<std::array<double, 4>> formants;
  for (int64_t k = 0; k < 20; ++k) {
    SyntheticSpeakerSpec s = MakeSpeaker(k, 1);
    EXPECT_LT(s.f0_low, s.f0_high);
    for (size_t i = 1; i < 4; ++i) EXPECT_LT(s.formants[i - 1], s.formants[i]);
    formants.insert(s.formants);
  }
  EXPECT_EQ(formants.size(), 20u);
}

TEST(SynthTest, SameSpeakerFeaturesAreMoreSimilar) {
  SynthOptions o;
  o.min_seconds = 1.0;
  o.max_seconds = 1.5;
  frontend::LogMelExtractor ext;
  const int speakers = 6, utts = 4;
  std::vector<std::vector<double>> mean_spectra;
  for (int s = 0; s < speakers; ++s) {
    SyntheticSpeakerSpec spec = MakeSpeaker(s, 3);
    for (int u = 0; u < utts; ++u) {
      frontend::LogMelFeatures f = ext.Compute(SynthesizeUtterance(spec, u, 3, o), false);
      std::vector<double> m(f.bins, 0.0);
      for (int64_t t = 0; t < f.frames; ++t)
        for (int64_t k = 0; k < f.bins; ++k) m[k] += f.at(t, k) / f.frames;
      mean_spectra.push_back(m);
    }
  }
  // Remove the corpus average so cosines compare deviations.
  std::vector<double> avg(80, 0.0);
  for (const auto& m : mean_spectra)
    for (int k = 0; k < 80; ++k) avg[k] += m[k] / mean_spectra.size();
  std::vector<std::vector<float>> centered;
  for (const auto& m : mean_spectra) {
    std::vector<float> c(80);
    for (int k = 0; k < 80; ++k) c[k] = static_cast<float>(m[k] - avg[k]);
    centered.push_back(c);
  }
  double same = 0, diff = 0;
  int ns = 0, nd = 0;
  for (size_t a = 0; a < centered.size(); ++a) {
    for (size_t b = a + 1; b < centered.size(); ++b) {
      const double s = head::CosineScore(centered[a], centered[b]);
      if (a / utts == b / utts) {
        same += s;
        ++ns;
      } else {
        diff += s;
        ++nd;
      }
    }
  }
  EXPECT_GT(same / ns, diff / nd + 0.2);
}

TEST_F(HarnessDir, CorpusManifestAndSplits) {
  SynthOptions o = TinyCorpus();
  o.wav = false;
  std::vector<ManifestEntry> entries = GenerateCorpus(o, dir_.string());
  ASSERT_EQ(entries.size(), 9u);
  std::vector<ManifestEntry> back = ReadManifest(Path("manifest.txt"));
  ASSERT_EQ(back.size(), 9u);
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].utt_id, entries[i].utt_id);
    EXPECT_EQ(back[i].speaker_id, entries[i].speaker_id);
    EXPECT_TRUE(fs::equivalent(back[i].path, entries[i].path));
  }
  EXPECT_EQ(entries[4].speaker_id, "spk001");

  std::vector<ManifestEntry> train, eval;
  SplitManifest(entries, 1, &train, &eval);
  ASSERT_EQ(eval.size(), 3u);
  EXPECT_EQ(train.size(), 6u);
  EXPECT_EQ(eval[0].utt_id, entries[2].utt_id);
  EXPECT_THROW(SplitManifest(entries, 3, &train, &eval), ValidationError);

  std::vector<eval::Trial> trials = MakeTrials(entries, 6, 10, 1);
  ASSERT_EQ(trials.size(), 16u);
  std::set<std::pair<std::string, std::string>> pairs;
  int targets = 0;
  std::map<std::string, std::string> spk;
  for (const auto& e : entries) spk[e.utt_id] = e.speaker_id;
  for (const auto& t : trials) {
    EXPECT_NE(t.enroll, t.test);
    EXPECT_EQ(t.target, spk[t.enroll] == spk[t.test]);
    targets += t.target;
    auto key = std::minmax(t.enroll, t.test);
    EXPECT_TRUE(pairs.insert({key.first, key.second}).second);
  }
  EXPECT_EQ(targets, 6);
  EXPECT_EQ(MakeTrials(entries, 6, 10, 1).size(), trials.size());
  // Three speakers with three utterances give only nine target pairs.
  EXPECT_THROW(MakeTrials(entries, 10, 1, 1), ValidationError);
}

// ---------------------------------------------------------------- training

class TrainTest : public HarnessDir {
 protected:
  void SetUp() override {
    HarnessDir::SetUp();
    entries_ = GenerateCorpus(TinyCorpus(), Path("corpus"));
    data_ = LoadDataset(entries_);
  }
  std::vector<ManifestEntry> entries_;
  Dataset data_;
};

TEST_F(TrainTest, DeterministicRunsAndCheckpoints) {
  RunConfig cfg = TinyConfig();
  ASSERT_EQ(data_.speakers.size(), 3u);
  auto a = Train(cfg, data_, Path("a"));
  auto b = Train(cfg, data_, Path("b"));
  ASSERT_EQ(a.size(), 3u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].loss, b[i].loss);
    EXPECT_EQ(a[i].lr, LearningRate(cfg, a[i].step));
    EXPECT_TRUE(std::isfinite(a[i].loss));
  }
  EXPECT_EQ(ReadBytes(Path("a/model.sekt")), ReadBytes(Path("b/model.sekt")));
  EXPECT_EQ(ReadBytes(Path("a/train_log.csv")), ReadBytes(Path("b/train_log.csv")));

  uint64_t step = 0;
  auto net = LoadSpeakerNet<float>(Path("a/model.sekt"), &step);
  EXPECT_EQ(step, 3u);
  EXPECT_EQ(net->num_speakers(), 3);
  EXPECT_EQ(SerializeRunConfig(net->config()), SerializeRunConfig(cfg));
  SaveCheckpoint(Path("again.sekt"), *net, step);
  EXPECT_EQ(ReadBytes(Path("again.sekt")), ReadBytes(Path("a/model.sekt")));

  head::EmbeddingStore e1 = Extract(Path("a/model.sekt"), entries_);
  head::EmbeddingStore e2 = Extract(Path("a/model.sekt"), entries_);
  ASSERT_EQ(e1.size(), entries_.size());
  EXPECT_EQ(e1.vectors, e2.vectors);
  EXPECT_EQ(e1.vectors[0].size(), 8u);
}

TEST_F(TrainTest, PeriodicCheckpointsAndLog) {
  RunConfig cfg = ApplyOverrides(TinyConfig(), {"steps=4", "checkpoint_every=2"});
  Train(cfg, data_, Path("run"));
  EXPECT_TRUE(fs::exists(Path("run/checkpoint-2.sekt")));
  EXPECT_FALSE(fs::exists(Path("run/checkpoint-4.sekt")));
  EXPECT_TRUE(fs::exists(Path("run/model.sekt")));
  std::ifstream log(Path("run/train_log.csv"));
  std::string line;
  int lines = 0;
  std::getline(log, line);
  EXPECT_EQ(line, "step,lr,loss");
  while (std::getline(log, line)) ++lines;
  EXPECT_EQ(lines, 4);
}

TEST_F(TrainTest, NonFiniteLossAborts) {
  RunConfig cfg = ApplyOverrides(TinyConfig(), {"lr=1e30", "warmup_steps=0", "steps=20"});
  try {
    Train(cfg, data_, Path("diverged"));
    FAIL() << "expected RuntimeFailure";
  } catch (const RuntimeFailure& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite loss"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("at step"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(Path("diverged/model.sekt")));

  Dataset bad = data_;
  bad.features[1].data[5] = std::nanf("");
  EXPECT_THROW(Train(TinyConfig(), bad, Path("bad")), ValidationError);
}

TEST_F(TrainTest, CheckpointMismatchesAreRejected) {
  RunConfig cfg = TinyConfig();
  SpeakerNet<float> net(cfg, 3);
  SaveCheckpoint(Path("m.sekt"), net, 0);
  CheckpointFile file = ReadCheckpoint(Path("m.sekt"));
  EXPECT_EQ(file.num_speakers(), 3);

  SpeakerNet<double> as_double(cfg, 3);
  EXPECT_THROW(RestoreParameters(file, as_double.store()), DTypeError);
  SpeakerNet<float> wider(ApplyOverrides(cfg, {"embed_dim=12"}), 3);
  EXPECT_THROW(RestoreParameters(file, wider.store()), ValidationError);
  SpeakerNet<float> deeper(ApplyOverrides(cfg, {"le.blocks=2"}), 3);
  EXPECT_THROW(RestoreParameters(file, deeper.store()), ValidationError);
  SpeakerNet<float> same(cfg, 3);
  RestoreParameters(file, same.store());

  std::string bytes = ReadBytes(Path("m.sekt"));
  {
    std::ofstream out(Path("trailing.sekt"), std::ios::binary);
    out << bytes << 'x';
  }
  EXPECT_THROW(ReadCheckpoint(Path("trailing.sekt")), IoError);
  {
    std::ofstream out(Path("magic.sekt"), std::ios::binary);
    out << "XXXX" << bytes.substr(4);
  }
  EXPECT_THROW(ReadCheckpoint(Path("magic.sekt")), IoError);
  {
    std::ofstream out(Path("short.sekt"), std::ios::binary);
    out << bytes.substr(0, bytes.size() / 2);
  }
  EXPECT_THROW(ReadCheckpoint(Path("short.sekt")), IoError);
}

// ---------------------------------------------------------------- bench

TEST(BenchTest, CsvAndExponentFit) {
  BenchOptions o;
  o.sizes = {40, 80};
  o.freq = 4;
  o.channels = 8;
  o.heads = 2;
  o.window = 2;
  std::vector<BenchRow> rows = BenchAttention(o);
  ASSERT_EQ(rows.size(), 4u);
  std::ostringstream csv;
  WriteBenchCsv(csv, rows);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "mode,tokens,freq,time,cost,median_seconds,repetitions");
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 4);
  for (const BenchRow& r : rows) {
    EXPECT_EQ(r.freq * r.time, r.tokens);
    EXPECT_GT(r.median_seconds, 0.0);
  }

  std::vector<BenchRow> fake;
  for (int64_t t : {100, 200, 400, 800}) {
    BenchRow r;
    r.mode = swin::AttentionMode::kGlobal;
    r.tokens = t;
    r.median_seconds = 3e-6 * std::pow(static_cast<double>(t), 1.7);
    fake.push_back(r);
  }
  EXPECT_NEAR(FitTimeExponent(fake, swin::AttentionMode::kGlobal), 1.7, 1e-12);
  EXPECT_THROW(FitTimeExponent(fake, swin::AttentionMode::kWindowed), ValidationError);
  o.sizes = {42};
  EXPECT_THROW(BenchAttention(o), ValidationError);
}

// ---------------------------------------------------------------- CLI

int RunCli(const std::string& args) {
  const int rc = std::system((std::string(SEK_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST_F(HarnessDir, CliExitCodes) {
  EXPECT_EQ(RunCli("--help"), 0);
  EXPECT_EQ(RunCli("synth --out " + Path("c") + " --speakers 2 --utts 2"), 0);
  EXPECT_EQ(RunCli("synth --speakers 2"), 1);  // missing --out
  EXPECT_EQ(RunCli("synth --out " + Path("d") + " --speakers 1"), 1);
  EXPECT_EQ(RunCli("train --manifest " + Path("c/manifest.txt") + " --out " + Path("t") +
                   " --preset toy_le_conformer --set bogus=1"),
            1);
  EXPECT_EQ(RunCli("eval --scores " + Path("none.txt") + " --trials " + Path("none.txt")), 2);
  EXPECT_EQ(RunCli("no-such-command"), 1);
}

}  // namespace
}  // namespace sek::harness
