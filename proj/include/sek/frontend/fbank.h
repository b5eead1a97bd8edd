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

#ifndef SEK_FRONTEND_FBANK_H_
#define SEK_FRONTEND_FBANK_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sek::frontend {

struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;
};

struct FbankOptions {
  int sample_rate = 16000;
  int window = 400;  // 25 ms
  int hop = 160;     // 10 ms
  int fft_size = 512;
  int mel_bins = 80;
  double preemphasis = 0.97;
  double low_hz = 20.0;
  double high_hz = 8000.0;
  double energy_floor = 1e-10;

  void Validate() const;
};

// T x F row-major matrix.
struct LogMelFeatures {
  int64_t frames = 0;
  int64_t bins = 0;
  std::vector<float> data;

  float at(int64_t t, int64_t f) const { return data[t * bins + f]; }
  std::span<const float> row(int64_t t) const {
    return {data.data() + t * bins, static_cast<size_t>(bins)};
  }
};

// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// Center frequency (Hz) of each triangular filter.
std::vector<double> MelCenterFrequencies(const FbankOptions& opts);

// [mel_bins][fft_size / 2 + 1] filter weights. Triangles are linear on the
// mel axis between neighbouring centers.
std::vector<std::vector<double>> MelFilterbank(const FbankOptions& opts);

int64_t NumFrames(int64_t num_samples, const FbankOptions& opts);

// Log-mel filterbank front-end backed by a real-input FFT plan.
class LogMelExtractor {
 public:
  explicit LogMelExtractor(FbankOptions opts = {});
  ~LogMelExtractor();
  LogMelExtractor(const LogMelExtractor&) = delete;
  LogMelExtractor& operator=(const LogMelExtractor&) = delete;

  // Log mel energies, mean-normalized per coefficient when `normalize`.
  LogMelFeatures Compute(const Waveform& wav, bool normalize = true) const;

  const FbankOptions& options() const { return opts_; }

 private:
  struct Plan;
  FbankOptions opts_;
  std::vector<double> window_;
  std::vector<std::vector<double>> filters_;
  Plan* plan_;
};

// Subtracts each coefficient's utterance mean. Idempotent.
void MeanNormalize(LogMelFeatures& feats);

// Random contiguous crop of `frames` rows; short inputs are wrapped
// cyclically from a random start.
LogMelFeatures CropSegment(const LogMelFeatures& feats, int64_t frames,
                           std::mt19937_64& rng);

// Waveform files: 16-bit PCM mono WAV or "SEKW" raw f32.
Waveform ReadWaveform(const std::string& path);
void WriteWav(const std::string& path, const Waveform& wav);
void WriteSekw(const std::string& path, const Waveform& wav);

// "SEKF", u32 T, u32 F, f32 row-major data.
void WriteFeatures(const std::string& path, const LogMelFeatures& feats);
LogMelFeatures ReadFeatures(const std::string& path);

}  // namespace sek::frontend

#endif  // SEK_FRONTEND_FBANK_H_
