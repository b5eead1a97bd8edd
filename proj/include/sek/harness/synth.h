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

#ifndef SEK_HARNESS_SYNTH_H_
#define SEK_HARNESS_SYNTH_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sek/eval/metrics.h"
#include "sek/frontend/fbank.h"

namespace sek::harness {

// Voice of one synthetic speaker: neutral-vowel formants, their bandwidths,
// the pitch range and the glottal spectral tilt.
struct SyntheticSpeakerSpec {
  std::string id;
  int64_t index = 0;
  std::array<double, 4> formants{};    // Hz
  std::array<double, 4> bandwidths{};  // Hz
  double f0_low = 100.0;
  double f0_high = 140.0;
  double tilt = 0.9;  // one-pole source low-pass coefficient
};

struct SynthOptions {
  int64_t speakers = 20;
  int64_t utterances_per_speaker = 20;
  uint64_t seed = 1;
  int sample_rate = 16000;
  double min_seconds = 3.0;
  double max_seconds = 6.0;
  double min_snr_db = 15.0;
  double max_snr_db = 30.0;
  bool wav = true;  // false writes SEKW

  void Validate() const;
};

SyntheticSpeakerSpec MakeSpeaker(int64_t index, uint64_t seed);

// Deterministic in (speaker, utterance, seed).
frontend::Waveform SynthesizeUtterance(const SyntheticSpeakerSpec& speaker,
                                       int64_t utterance, uint64_t seed,
                                       const SynthOptions& opts);

struct ManifestEntry {
  std::string utt_id;
  std::string speaker_id;
  std::string path;
};

// Lines of "utt_id speaker_id path". Relative paths are resolved against the
// manifest's directory on read.
std::vector<ManifestEntry> ReadManifest(const std::string& path);
void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& entries);

// Writes one waveform per utterance under `out_dir`/wav and the manifest
// `out_dir`/manifest.txt; returns the entries.
std::vector<ManifestEntry> GenerateCorpus(const SynthOptions& opts,
                                          const std::string& out_dir);

// Moves the last `heldout` utterances of every speaker (in manifest order)
// to `eval`; the rest go to `train`.
void SplitManifest(const std::vector<ManifestEntry>& all, int64_t heldout,
                   std::vector<ManifestEntry>* train, std::vector<ManifestEntry>* eval);

// Distinct same-speaker and cross-speaker utterance pairs, drawn
// deterministically from `seed`, targets and non-targets interleaved.
std::vector<eval::Trial> MakeTrials(const std::vector<ManifestEntry>& entries,
                                    int64_t targets, int64_t nontargets, uint64_t seed);

}  // namespace sek::harness

#endif  // SEK_HARNESS_SYNTH_H_
