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

// sek: command-line driver for data generation, training, extraction,
// scoring, evaluation, gradient checks and attention benchmarks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sek/base/error.h"
#include "sek/eval/metrics.h"
#include "sek/frontend/fbank.h"
#include "sek/harness/bench.h"
#include "sek/harness/config.h"
#include "sek/harness/gradcheck.h"
#include "sek/harness/synth.h"
#include "sek/harness/trainer.h"
#include "sek/head/head.h"

namespace {

namespace fs = std::filesystem;
using namespace sek;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct SynthArgs {
  std::string out;
  harness::SynthOptions opts;
  std::string format = "wav";
  int64_t heldout = 0;
  int64_t targets = 100;
  int64_t nontargets = 100;
};

int RunSynth(const SynthArgs& args) {
  harness::SynthOptions opts = args.opts;
  Check<ValidationError>(args.format == "wav" || args.format == "sekw",
                         "unknown waveform format '", args.format, "'");
  opts.wav = args.format == "wav";
  auto entries = harness::GenerateCorpus(opts, args.out);
  std::cout << "wrote " << entries.size() << " utterances to " << args.out << "\n";
  if (args.heldout > 0) {
    // Manifest paths stay relative to the corpus root.
    auto relative = harness::ReadManifest((fs::path(args.out) / "manifest.txt").string());
    for (auto& e : relative) e.path = fs::relative(e.path, args.out).string();
    std::vector<harness::ManifestEntry> train, eval;
    harness::SplitManifest(relative, args.heldout, &train, &eval);
    harness::WriteManifest((fs::path(args.out) / "train.txt").string(), train);
    harness::WriteManifest((fs::path(args.out) / "eval.txt").string(), eval);
    auto trials = harness::MakeTrials(eval, args.targets, args.nontargets, opts.seed);
    eval::WriteTrials((fs::path(args.out) / "trials.txt").string(), trials);
    std::cout << "split " << train.size() << " train / " << eval.size()
              << " eval utterances, " << trials.size() << " trials\n";
  }
  return kExitOk;
}

struct FeaturesArgs {
  std::string manifest;
  std::string out;
};

int RunFeatures(const FeaturesArgs& args) {
  auto entries = harness::ReadManifest(args.manifest);
  fs::create_directories(fs::path(args.out) / "feats");
  frontend::LogMelExtractor extractor;
  std::vector<harness::ManifestEntry> out_entries;
  for (const auto& e : entries) {
    std::string rel = "feats/" + e.utt_id + ".sekf";
    frontend::WriteFeatures((fs::path(args.out) / rel).string(),
                            extractor.Compute(frontend::ReadWaveform(e.path)));
    out_entries.push_back({e.utt_id, e.speaker_id, rel});
  }
  harness::WriteManifest((fs::path(args.out) / "manifest.txt").string(), out_entries);
  std::cout << "wrote features for " << out_entries.size() << " utterances\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::string preset;
  std::vector<std::string> overrides;
  std::string manifest;
  std::string out;
};

int RunTrain(const TrainArgs& args) {
  Check<ValidationError>(args.config.empty() != args.preset.empty(),
                         "give exactly one of --config and --preset");
  harness::RunConfig cfg = args.config.empty() ? harness::RunConfig::Preset(args.preset)
                                               : harness::LoadRunConfig(args.config);
  cfg = harness::ApplyOverrides(cfg, args.overrides);
  auto data = harness::LoadDataset(harness::ReadManifest(args.manifest));
  fs::create_directories(args.out);
  harness::SaveRunConfig((fs::path(args.out) / "config.txt").string(), cfg);
  auto log = harness::Train(cfg, data, args.out, &std::cout);
  std::cout << "final loss " << log.back().loss << ", checkpoint "
            << (fs::path(args.out) / "model.sekt").string() << "\n";
  return kExitOk;
}

struct ExtractArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out;
};

int RunExtract(const ExtractArgs& args) {
  auto store = harness::Extract(args.checkpoint, harness::ReadManifest(args.manifest));
  head::WriteEmbeddingText(args.out, store);
  std::cout << "wrote " << store.size() << " embeddings to " << args.out << "\n";
  return kExitOk;
}

struct ScoreArgs {
  std::string embeddings;
  std::string trials;
  std::string out;
};

int RunScore(const ScoreArgs& args) {
  auto trials = eval::ReadTrials(args.trials);
  auto scores = eval::EvaluateTrials(trials, head::ReadEmbeddingText(args.embeddings));
  eval::WriteScores(args.out, trials, scores);
  std::cout << "scored " << trials.size() << " trials\n";
  return kExitOk;
}

struct EvalArgs {
  std::string scores;
  std::string trials;
  double p_target = 0.05;
};

int RunEval(const EvalArgs& args) {
  auto trials = eval::ReadTrials(args.trials);
  auto scores = eval::ReadScores(args.scores, trials);
  eval::DcfParams dcf;
  dcf.p_target = args.p_target;
  auto eer = eval::ComputeEer(scores);
  auto min_dcf = eval::ComputeMinDcf(scores, dcf);
  std::printf("EER %.4f%% (threshold %.6f)\nminDCF(p=%g) %.4f (threshold %.6f)\n",
              100.0 * eer.value, eer.threshold, args.p_target, min_dcf.value,
              min_dcf.threshold);
  return kExitOk;
}

struct GradCheckArgs {
  std::string scope = "all";
  double tolerance = 1e-4;
};

int RunGradCheckCommand(const GradCheckArgs& args) {
  Check<ValidationError>(harness::IsGradCheckScope(args.scope), "unknown scope '",
                         args.scope, "'");
  auto rows = harness::RunGradCheck(harness::GradCheckRegistry(), args.scope, args.tolerance);
  int failed = 0;
  for (const auto& r : rows) {
    std::printf("%-4s %-14s %-36s max_rel_error %.3e  %.2fs%s%s\n",
                r.passed ? "PASS" : "FAIL", r.scope.c_str(), r.name.c_str(),
                r.max_rel_error, r.seconds, r.error.empty() ? "" : "  ", r.error.c_str());
    failed += !r.passed;
  }
  std::printf("%zu units, %d failed\n", rows.size(), failed);
  return failed ? kExitRuntime : kExitOk;
}

struct BenchArgs {
  harness::BenchOptions opts;
  std::string mode = "both";
  std::string out;
};

int RunBench(BenchArgs args) {
  using swin::AttentionMode;
  if (args.mode == "windowed") {
    args.opts.modes = {AttentionMode::kWindowed};
  } else if (args.mode == "global") {
    args.opts.modes = {AttentionMode::kGlobal};
  } else {
    Check<ValidationError>(args.mode == "both", "unknown mode '", args.mode, "'");
  }
  auto rows = harness::BenchAttention(args.opts);
  if (args.out.empty()) {
    harness::WriteBenchCsv(std::cout, rows);
  } else {
    std::ofstream out(args.out);
    Check<IoError>(static_cast<bool>(out), "cannot write '", args.out, "'");
    harness::WriteBenchCsv(out, rows);
  }
  if (args.opts.sizes.size() >= 2) {
    for (AttentionMode m : args.opts.modes) {
      std::fprintf(stderr, "%s time exponent %.3f\n",
                   m == AttentionMode::kGlobal ? "global" : "windowed",
                   harness::FitTimeExponent(rows, m));
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker embedding toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic speaker corpus");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--speakers", synth.opts.speakers, "Number of speakers");
  synth_cmd->add_option("--utts", synth.opts.utterances_per_speaker, "Utterances per speaker");
  synth_cmd->add_option("--seed", synth.opts.seed, "Random seed");
  synth_cmd->add_option("--format", synth.format, "wav or sekw");
  synth_cmd->add_option("--heldout", synth.heldout,
                        "Utterances per speaker held out for trials (0: no split)");
  synth_cmd->add_option("--targets", synth.targets, "Target trials");
  synth_cmd->add_option("--nontargets", synth.nontargets, "Non-target trials");

  FeaturesArgs features;
  auto* features_cmd = app.add_subcommand("features", "Compute log-mel features");
  features_cmd->add_option("--manifest", features.manifest, "Waveform manifest")->required();
  features_cmd->add_option("--out", features.out, "Output directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a speaker embedding model");
  train_cmd->add_option("--config", train.config, "Config file");
  train_cmd->add_option("--preset", train.preset,
                        "paper_le_conformer, paper_sst, toy_le_conformer or toy_sst");
  train_cmd->add_option("--set", train.overrides, "key=value override (repeatable)");
  train_cmd->add_option("--manifest", train.manifest, "Training manifest")->required();
  train_cmd->add_option("--out", train.out, "Output directory")->required();

  ExtractArgs extract;
  auto* extract_cmd = app.add_subcommand("extract", "Extract utterance embeddings");
  extract_cmd->add_option("--checkpoint", extract.checkpoint, "Model checkpoint")->required();
  extract_cmd->add_option("--manifest", extract.manifest, "Utterance manifest")->required();
  extract_cmd->add_option("--out", extract.out, "Embedding text file")->required();

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Cosine-score a trial list");
  score_cmd->add_option("--embeddings", score.embeddings, "Embedding text file")->required();
  score_cmd->add_option("--trials", score.trials, "Trial list")->required();
  score_cmd->add_option("--out", score.out, "Score file")->required();

  EvalArgs evaluate;
  auto* eval_cmd = app.add_subcommand("eval", "Report EER and minDCF");
  eval_cmd->add_option("--scores", evaluate.scores, "Score file")->required();
  eval_cmd->add_option("--trials", evaluate.trials, "Trial list")->required();
  eval_cmd->add_option("--p-target", evaluate.p_target, "Target prior for minDCF");

  GradCheckArgs gradcheck;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck_cmd->add_option("--scope", gradcheck.scope,
                            "kernels, blocks, le_conformer, sst, head or all");
  gradcheck_cmd->add_option("--tolerance", gradcheck.tolerance, "Max relative error");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time windowed vs global attention");
  bench_cmd->add_option("--sizes", bench.opts.sizes, "Token counts")->delimiter(',');
  bench_cmd->add_option("--mode", bench.mode, "windowed, global or both");
  bench_cmd->add_option("--freq", bench.opts.freq, "Grid extent along frequency");
  bench_cmd->add_option("--channels", bench.opts.channels, "Channels C");
  bench_cmd->add_option("--heads", bench.opts.heads, "Attention heads");
  bench_cmd->add_option("--window", bench.opts.window, "Window side M");
  bench_cmd->add_option("--reps", bench.opts.repetitions, "Timed repetitions");
  bench_cmd->add_option("--out", bench.out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*synth_cmd) return RunSynth(synth);
    if (*features_cmd) return RunFeatures(features);
    if (*train_cmd) return RunTrain(train);
    if (*extract_cmd) return RunExtract(extract);
    if (*score_cmd) return RunScore(score);
    if (*eval_cmd) return RunEval(evaluate);
    if (*gradcheck_cmd) return RunGradCheckCommand(gradcheck);
    if (*bench_cmd) return RunBench(bench);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DTypeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
