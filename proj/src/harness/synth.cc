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

#include "sek/harness/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "sek/base/error.h"

namespace sek::harness {

namespace {

namespace fs = std::filesystem;

// Formant ratios of each vowel relative to the speaker's neutral vowel.
constexpr std::array<std::array<double, 4>, 6> kVowels = {{
    {1.45, 0.82, 0.97, 1.00},  // a
    {0.55, 1.55, 1.08, 1.03},  // i
    {0.62, 0.58, 0.93, 0.98},  // u
    {0.90, 1.30, 1.03, 1.01},  // e
    {1.00, 0.68, 0.95, 0.99},  // o
    {1.00, 1.00, 1.00, 1.00},  // schwa
}};

std::mt19937_64 SeededRng(uint64_t seed, uint64_t a, uint64_t b) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(a), static_cast<uint32_t>(b), 0x5e4u};
  return std::mt19937_64(seq);
}

// Klatt second-order resonator.
struct Resonator {
  double a = 0, b = 0, c = 0, y1 = 0, y2 = 0;

  void Tune(double freq, double bw, double fs) {
    const double pi = std::numbers::pi;
    c = -std::exp(-2 * pi * bw / fs);
    b = 2 * std::exp(-pi * bw / fs) * std::cos(2 * pi * freq / fs);
    a = 1 - b - c;
  }
  double Step(double x) {
    double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

constexpr double kMinVoiceDistance = 0.2;

struct Syllable {
  int vowel = 0;
  int64_t samples = 0;
  int64_t gap = 0;  // silence after the syllable
  double f0 = 0;
};

}  // namespace

void SynthOptions::Validate() const {
  Check<ValidationError>(speakers >= 2, "synth: need at least 2 speakers");
  Check<ValidationError>(utterances_per_speaker >= 1,
                         "synth: need at least 1 utterance per speaker");
  Check<ValidationError>(sample_rate >= 8000, "synth: sample rate too low");
  Check<ValidationError>(min_seconds > 0 && max_seconds >= min_seconds,
                         "synth: bad duration range");
  Check<ValidationError>(max_snr_db >= min_snr_db, "synth: bad SNR range");
}

SyntheticSpeakerSpec MakeSpeaker(int64_t index, uint64_t seed) {
  Check<ValidationError>(index >= 0, "speaker index must be >= 0");
  // Voices are drawn in index order; a candidate too close to an earlier
  // speaker in normalized (pitch, tract length) space is redrawn, so
  // speaker `index` depends on all speakers before it.
  std::vector<std::array<double, 3>> taken;
  SyntheticSpeakerSpec s;
  for (int64_t k = 0; k <= index; ++k) {
    auto rng = SeededRng(seed, static_cast<uint64_t>(k), ~0ull);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::array<double, 3> voice{};
    for (int attempt = 0;; ++attempt) {
      voice = {u(rng), u(rng), u(rng)};
      double nearest = 1e9;
      for (const auto& t : taken) {
        double d2 = 0.0;
        for (size_t i = 0; i < 2; ++i) d2 += (voice[i] - t[i]) * (voice[i] - t[i]);
        nearest = std::min(nearest, std::sqrt(d2));
      }
      if (nearest >= kMinVoiceDistance || attempt >= 1000) break;
    }
    taken.push_back(voice);
    if (k < index) continue;

    char id[32];
    std::snprintf(id, sizeof(id), "spk%03lld", static_cast<long long>(index));
    s.id = id;
    s.index = index;
    double f0 = 85.0 * std::pow(3.0, voice[0]);  // 85 to 255 Hz
    s.f0_low = f0 * 0.9;
    s.f0_high = f0 * 1.1;
    // Vocal tract length scales all formants together; each formant also
    // gets an individual offset.
    double vtl = 0.82 + 0.4 * voice[1];
    s.tilt = 0.8 + 0.17 * voice[2];
    s.formants = {500 * vtl * (0.97 + 0.06 * u(rng)), 1500 * vtl * (0.97 + 0.06 * u(rng)),
                  2500 * vtl * (0.95 + 0.1 * u(rng)), 3500 * vtl * (0.95 + 0.1 * u(rng))};
    double bw = 0.7 + 0.6 * u(rng);
    s.bandwidths = {70 * bw, 100 * bw, 140 * bw, 200 * bw};
  }
  return s;
}

frontend::Waveform SynthesizeUtterance(const SyntheticSpeakerSpec& speaker,
                                       int64_t utterance, uint64_t seed,
                                       const SynthOptions& opts) {
  auto rng = SeededRng(seed, static_cast<uint64_t>(speaker.index),
                       static_cast<uint64_t>(utterance));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double fs = opts.sample_rate;
  const auto total = static_cast<int64_t>(
      fs * (opts.min_seconds + (opts.max_seconds - opts.min_seconds) * u(rng)));

  // Syllable plan: random vowels and pitch targets, some followed by pauses.
  std::vector<Syllable> plan;
  int64_t planned = 0;
  while (planned < total) {
    Syllable syl;
    syl.vowel = static_cast<int>(u(rng) * kVowels.size()) % kVowels.size();
    syl.samples = static_cast<int64_t>(fs * (0.12 + 0.18 * u(rng)));
    syl.gap = u(rng) < 0.35 ? static_cast<int64_t>(fs * (0.04 + 0.12 * u(rng))) : 0;
    syl.f0 = speaker.f0_low + (speaker.f0_high - speaker.f0_low) * u(rng);
    planned += syl.samples + syl.gap;
    plan.push_back(syl);
  }

  std::vector<double> out(static_cast<size_t>(total), 0.0);
  std::array<Resonator, 4> tract;
  double source_lp = 0.0, phase = 1.0;
  const double breath = 0.02 + 0.05 * u(rng);
  const int64_t ramp = static_cast<int64_t>(0.02 * fs);
  constexpr int64_t kRetune = 64;
  int64_t pos = 0;
  for (size_t k = 0; k < plan.size() && pos < total; ++k) {
    const Syllable& syl = plan[k];
    const auto& next = plan[std::min(k + 1, plan.size() - 1)];
    for (int64_t n = 0; n < syl.samples && pos < total; ++n, ++pos) {
      // Formants and pitch glide towards the next syllable over its second half.
      double glide = std::max(0.0, (static_cast<double>(n) / syl.samples - 0.5) * 2.0);
      if (syl.gap > 0) glide = 0.0;
      if (n % kRetune == 0) {
        for (size_t f = 0; f < 4; ++f) {
          double ratio = (1 - glide) * kVowels[syl.vowel][f] + glide * kVowels[next.vowel][f];
          double freq = std::min(speaker.formants[f] * ratio, 0.45 * fs);
          tract[f].Tune(freq, speaker.bandwidths[f], fs);
        }
      }
      double f0 = (1 - glide) * syl.f0 + glide * next.f0;
      phase += f0 / fs;
      double pulse = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        pulse = 1.0;
      }
      source_lp = speaker.tilt * source_lp + (1 - speaker.tilt) * pulse;
      double x = source_lp + breath * 0.01 * normal(rng);
      for (auto& r : tract) x = r.Step(x);
      double env = 1.0;
      if (n < ramp) env = static_cast<double>(n) / ramp;
      if (syl.samples - n < ramp) env = std::min(env, static_cast<double>(syl.samples - n) / ramp);
      out[static_cast<size_t>(pos)] = env * x;
    }
    for (int64_t n = 0; n < syl.gap && pos < total; ++n, ++pos) {
      double x = 0.0;
      for (auto& r : tract) x = r.Step(x);
      out[static_cast<size_t>(pos)] = x;
    }
  }

  double peak = 1e-12, power = 0.0;
  for (double v : out) {
    peak = std::max(peak, std::abs(v));
    power += v * v;
  }
  const double gain = (0.25 + 0.4 * u(rng)) / peak;
  power = power * gain * gain / static_cast<double>(out.size());
  const double snr_db = opts.min_snr_db + (opts.max_snr_db - opts.min_snr_db) * u(rng);
  const double noise_std = std::sqrt(power / std::pow(10.0, snr_db / 10.0));

  frontend::Waveform wav;
  wav.sample_rate = opts.sample_rate;
  wav.samples.resize(out.size());
  for (size_t i = 0; i < out.size(); ++i) {
    double v = gain * out[i] + noise_std * normal(rng);
    wav.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return wav;
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  std::ifstream in(path);
  Check<IoError>(static_cast<bool>(in), "cannot open manifest '", path, "'");
  const fs::path base = fs::path(path).parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    ManifestEntry e;
    if (!(ss >> e.utt_id)) continue;
    std::string extra;
    Check<ValidationError>(static_cast<bool>(ss >> e.speaker_id >> e.path) && !(ss >> extra),
                           path, ":", line_no, ": expected 'utt_id speaker_id path'");
    if (fs::path(e.path).is_relative()) e.path = (base / e.path).string();
    entries.push_back(std::move(e));
  }
  return entries;
}

void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(out), "cannot write manifest '", path, "'");
  for (const auto& e : entries) {
    out << e.utt_id << ' ' << e.speaker_id << ' ' << e.path << '\n';
  }
  Check<IoError>(static_cast<bool>(out), "failed writing manifest '", path, "'");
}

std::vector<ManifestEntry> GenerateCorpus(const SynthOptions& opts,
                                          const std::string& out_dir) {
  opts.Validate();
  const fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root / "wav", ec);
  Check<IoError>(!ec, "cannot create '", (root / "wav").string(), "': ", ec.message());

  std::vector<ManifestEntry> entries;
  for (int64_t s = 0; s < opts.speakers; ++s) {
    SyntheticSpeakerSpec speaker = MakeSpeaker(s, opts.seed);
    for (int64_t k = 0; k < opts.utterances_per_speaker; ++k) {
      frontend::Waveform wav = SynthesizeUtterance(speaker, k, opts.seed, opts);
      char name[64];
      std::snprintf(name, sizeof(name), "%s-utt%03lld", speaker.id.c_str(),
                    static_cast<long long>(k));
      std::string rel = std::string("wav/") + name + (opts.wav ? ".wav" : ".sekw");
      if (opts.wav) {
        frontend::WriteWav((root / rel).string(), wav);
      } else {
        frontend::WriteSekw((root / rel).string(), wav);
      }
      entries.push_back({name, speaker.id, rel});
    }
  }
  WriteManifest((root / "manifest.txt").string(), entries);
  for (auto& e : entries) e.path = (root / e.path).string();
  return entries;
}

void SplitManifest(const std::vector<ManifestEntry>& all, int64_t heldout,
                   std::vector<ManifestEntry>* train, std::vector<ManifestEntry>* eval) {
  Check<ValidationError>(heldout >= 0, "held-out count must be >= 0");
  std::map<std::string, int64_t> total, seen;
  for (const auto& e : all) ++total[e.speaker_id];
  for (const auto& [speaker, count] : total) {
    Check<ValidationError>(count > heldout, "speaker ", speaker, " has ", count,
                           " utterances; holding out ", heldout, " leaves none to train on");
  }
  train->clear();
  eval->clear();
  for (const auto& e : all) {
    int64_t k = seen[e.speaker_id]++;
    (k >= total[e.speaker_id] - heldout ? eval : train)->push_back(e);
  }
}

std::vector<eval::Trial> MakeTrials(const std::vector<ManifestEntry>& entries,
                                    int64_t targets, int64_t nontargets, uint64_t seed) {
  const auto n = static_cast<int64_t>(entries.size());
  int64_t same = 0;
  for (int64_t a = 0; a < n; ++a) {
    for (int64_t b = a + 1; b < n; ++b) same += entries[a].speaker_id == entries[b].speaker_id;
  }
  const int64_t different = n * (n - 1) / 2 - same;
  Check<ValidationError>(targets >= 0 && targets <= same, "cannot draw ", targets,
                         " distinct target trials from ", same, " same-speaker pairs");
  Check<ValidationError>(nontargets >= 0 && nontargets <= different, "cannot draw ",
                         nontargets, " distinct non-target trials from ", different,
                         " cross-speaker pairs");

  auto rng = SeededRng(seed, 0x7e1a15ull, 0);
  std::uniform_int_distribution<int64_t> pick(0, n - 1);
  std::set<std::pair<int64_t, int64_t>> used;
  auto draw = [&](bool target) {
    while (true) {
      int64_t a = pick(rng), b = pick(rng);
      if (a == b || (entries[a].speaker_id == entries[b].speaker_id) != target) continue;
      if (!used.insert({std::min(a, b), std::max(a, b)}).second) continue;
      return eval::Trial{target, entries[a].utt_id, entries[b].utt_id};
    }
  };
  std::vector<eval::Trial> trials;
  for (int64_t i = 0; i < std::max(targets, nontargets); ++i) {
    if (i < targets) trials.push_back(draw(true));
    if (i < nontargets) trials.push_back(draw(false));
  }
  return trials;
}

}  // namespace sek::harness
