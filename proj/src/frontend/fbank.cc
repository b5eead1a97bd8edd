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

#include "sek/frontend/fbank.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <numbers>

#include "sek/base/binary_io.h"

namespace sek::frontend {

namespace {

// The FFTW planner is not re-entrant; execution with new arrays is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void FbankOptions::Validate() const {
  Check<ValidationError>(sample_rate > 0, "sample_rate must be positive");
  Check<ValidationError>(window > 0 && hop > 0, "window and hop must be positive");
  Check<ValidationError>(fft_size >= window, "fft_size ", fft_size,
                         " smaller than window ", window);
  Check<ValidationError>(mel_bins > 0, "mel_bins must be positive");
  Check<ValidationError>(0 <= low_hz && low_hz < high_hz && high_hz <= sample_rate / 2.0,
                         "mel range must satisfy 0 <= low < high <= Nyquist");
  Check<ValidationError>(energy_floor > 0, "energy_floor must be positive");
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> MelPoints(const FbankOptions& opts) {
  const double lo = HzToMel(opts.low_hz), hi = HzToMel(opts.high_hz);
  std::vector<double> pts(opts.mel_bins + 2);
  for (int i = 0; i < opts.mel_bins + 2; ++i)
    pts[i] = lo + (hi - lo) * i / (opts.mel_bins + 1);
  return pts;
}

}  // namespace

std::vector<double> MelCenterFrequencies(const FbankOptions& opts) {
  const std::vector<double> pts = MelPoints(opts);
  std::vector<double> centers(opts.mel_bins);
  for (int m = 0; m < opts.mel_bins; ++m) centers[m] = MelToHz(pts[m + 1]);
  return centers;
}

std::vector<std::vector<double>> MelFilterbank(const FbankOptions& opts) {
  opts.Validate();
  const std::vector<double> pts = MelPoints(opts);
  const int nbins = opts.fft_size / 2 + 1;
  std::vector<std::vector<double>> bank(opts.mel_bins, std::vector<double>(nbins, 0.0));
  for (int k = 0; k < nbins; ++k) {
    const double mel = HzToMel(static_cast<double>(k) * opts.sample_rate / opts.fft_size);
    for (int m = 0; m < opts.mel_bins; ++m) {
      const double left = pts[m], center = pts[m + 1], right = pts[m + 2];
      if (mel > left && mel < right)
        bank[m][k] = mel <= center ? (mel - left) / (center - left)
                                   : (right - mel) / (right - center);
    }
  }
  return bank;
}

int64_t NumFrames(int64_t num_samples, const FbankOptions& opts) {
  if (num_samples < opts.window) return 0;
  return 1 + (num_samples - opts.window) / opts.hop;
}

struct LogMelExtractor::Plan {
  fftw_plan plan;
};

LogMelExtractor::LogMelExtractor(FbankOptions opts)
    : opts_(opts), filters_(MelFilterbank(opts)), plan_(new Plan) {
  window_.resize(opts_.window);
  for (int i = 0; i < opts_.window; ++i)
    window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (opts_.window - 1));
  std::vector<double> in(opts_.fft_size);
  std::vector<std::complex<double>> out(opts_.fft_size / 2 + 1);
  std::lock_guard<std::mutex> lock(PlannerMutex());
  plan_->plan = fftw_plan_dft_r2c_1d(opts_.fft_size, in.data(),
                                     reinterpret_cast<fftw_complex*>(out.data()),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  Check<RuntimeFailure>(plan_->plan != nullptr, "FFT plan creation failed");
}

LogMelExtractor::~LogMelExtractor() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(plan_->plan);
  delete plan_;
}

LogMelFeatures LogMelExtractor::Compute(const Waveform& wav, bool normalize) const {
  Check<ValidationError>(wav.sample_rate == opts_.sample_rate, "waveform sample rate ",
                         wav.sample_rate, " Hz, front-end expects ", opts_.sample_rate);
  const int64_t n = static_cast<int64_t>(wav.samples.size());
  Check<ValidationError>(n >= opts_.window, "waveform has ", n,
                         " samples, shorter than one ", opts_.window, "-sample window");
  LogMelFeatures feats;
  feats.frames = NumFrames(n, opts_);
  feats.bins = opts_.mel_bins;
  feats.data.resize(feats.frames * feats.bins);

  const int nfft = opts_.fft_size, nbins = nfft / 2 + 1;
  std::vector<double> frame(nfft);
  std::vector<std::complex<double>> spec(nbins);
  std::vector<double> mag(nbins);
  for (int64_t t = 0; t < feats.frames; ++t) {
    const float* src = wav.samples.data() + t * opts_.hop;
    std::fill(frame.begin(), frame.end(), 0.0);
    for (int i = opts_.window - 1; i > 0; --i)
      frame[i] = src[i] - opts_.preemphasis * src[i - 1];
    frame[0] = src[0] - opts_.preemphasis * src[0];
    for (int i = 0; i < opts_.window; ++i) frame[i] *= window_[i];
    fftw_execute_dft_r2c(plan_->plan, frame.data(),
                         reinterpret_cast<fftw_complex*>(spec.data()));
    for (int k = 0; k < nbins; ++k) mag[k] = std::abs(spec[k]);
    float* dst = feats.data.data() + t * feats.bins;
    for (int m = 0; m < opts_.mel_bins; ++m) {
      double e = 0;
      for (int k = 0; k < nbins; ++k) e += filters_[m][k] * mag[k];
      dst[m] = static_cast<float>(std::log(std::max(e, opts_.energy_floor)));
    }
  }
  if (normalize) MeanNormalize(feats);
  return feats;
}

void MeanNormalize(LogMelFeatures& feats) {
  if (feats.frames == 0) return;
  for (int64_t f = 0; f < feats.bins; ++f) {
    // Accumulate relative to the first frame so constant columns map to 0
    // exactly.
    const double v0 = feats.data[f];
    double acc = 0;
    for (int64_t t = 0; t < feats.frames; ++t) acc += feats.data[t * feats.bins + f] - v0;
    const double mean = v0 + acc / static_cast<double>(feats.frames);
    for (int64_t t = 0; t < feats.frames; ++t) {
      float& v = feats.data[t * feats.bins + f];
      v = static_cast<float>(static_cast<double>(v) - mean);
    }
  }
}

LogMelFeatures CropSegment(const LogMelFeatures& feats, int64_t frames,
                           std::mt19937_64& rng) {
  Check<ValidationError>(frames > 0, "crop length must be positive");
  Check<ValidationError>(feats.frames > 0, "cannot crop an empty feature matrix");
  LogMelFeatures out;
  out.frames = frames;
  out.bins = feats.bins;
  out.data.resize(frames * feats.bins);
  const int64_t max_start = feats.frames >= frames ? feats.frames - frames : feats.frames - 1;
  const int64_t start = std::uniform_int_distribution<int64_t>(0, max_start)(rng);
  for (int64_t t = 0; t < frames; ++t) {
    const int64_t src = (start + t) % feats.frames;
    std::copy_n(feats.data.begin() + src * feats.bins, feats.bins,
                out.data.begin() + t * feats.bins);
  }
  return out;
}

namespace {

Waveform ReadWav(std::istream& in, const std::string& path) {
  io::ExpectMagic(in, "RIFF", path);
  io::ReadLE<uint32_t>(in, path);
  io::ExpectMagic(in, "WAVE", path);
  Waveform wav;
  bool have_fmt = false;
  uint16_t channels = 0, bits = 0, format = 0;
  for (;;) {
    char id[4];
    in.read(id, 4);
    Check<IoError>(static_cast<bool>(in), path, ": no data chunk");
    const uint32_t size = io::ReadLE<uint32_t>(in, path);
    const std::string chunk(id, 4);
    if (chunk == "fmt ") {
      format = io::ReadLE<uint16_t>(in, path);
      channels = io::ReadLE<uint16_t>(in, path);
      wav.sample_rate = static_cast<int>(io::ReadLE<uint32_t>(in, path));
      io::ReadLE<uint32_t>(in, path);  // byte rate
      io::ReadLE<uint16_t>(in, path);  // block align
      bits = io::ReadLE<uint16_t>(in, path);
      in.ignore(size - 16 + (size & 1));
      have_fmt = true;
    } else if (chunk == "data") {
      Check<IoError>(have_fmt, path, ": data chunk before fmt chunk");
      Check<IoError>(format == 1 && channels == 1 && bits == 16, path,
                     ": only 16-bit PCM mono WAV is supported (format ", format,
                     ", ", channels, " channels, ", bits, " bits)");
      wav.samples.resize(size / 2);
      for (float& s : wav.samples) s = io::ReadLE<int16_t>(in, path) / 32768.0f;
      return wav;
    } else {
      in.ignore(size + (size & 1));
    }
  }
}

}  // namespace

Waveform ReadWaveform(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(in), "cannot open '", path, "'");
  char magic[4] = {};
  in.read(magic, 4);
  Check<IoError>(static_cast<bool>(in), path, ": empty file");
  in.seekg(0);
  Waveform wav;
  if (std::string(magic, 4) == "SEKW") {
    io::ExpectMagic(in, "SEKW", path);
    wav.sample_rate = static_cast<int>(io::ReadLE<uint32_t>(in, path));
    wav.samples.resize(io::ReadLE<uint64_t>(in, path));
    for (float& s : wav.samples) s = io::ReadLE<float>(in, path);
  } else {
    wav = ReadWav(in, path);
  }
  Check<ValidationError>(wav.sample_rate > 0 && !wav.samples.empty(), path,
                         ": waveform must be non-empty with a positive sample rate");
  return wav;
}

void WriteWav(const std::string& path, const Waveform& wav) {
  std::ofstream out(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(out), "cannot open '", path, "' for writing");
  const uint32_t data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  out.write("RIFF", 4);
  io::WriteLE<uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  io::WriteLE<uint32_t>(out, 16);
  io::WriteLE<uint16_t>(out, 1);
  io::WriteLE<uint16_t>(out, 1);
  io::WriteLE<uint32_t>(out, wav.sample_rate);
  io::WriteLE<uint32_t>(out, wav.sample_rate * 2);
  io::WriteLE<uint16_t>(out, 2);
  io::WriteLE<uint16_t>(out, 16);
  out.write("data", 4);
  io::WriteLE<uint32_t>(out, data_bytes);
  for (float s : wav.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    io::WriteLE<int16_t>(out, static_cast<int16_t>(std::lrint(c * 32767.0f)));
  }
  Check<IoError>(static_cast<bool>(out), "write failed for '", path, "'");
}

void WriteSekw(const std::string& path, const Waveform& wav) {
  std::ofstream out(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(out), "cannot open '", path, "' for writing");
  out.write("SEKW", 4);
  io::WriteLE<uint32_t>(out, wav.sample_rate);
  io::WriteLE<uint64_t>(out, wav.samples.size());
  for (float s : wav.samples) io::WriteLE(out, s);
  Check<IoError>(static_cast<bool>(out), "write failed for '", path, "'");
}

void WriteFeatures(const std::string& path, const LogMelFeatures& feats) {
  std::ofstream out(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(out), "cannot open '", path, "' for writing");
  out.write("SEKF", 4);
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(feats.frames));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(feats.bins));
  for (float v : feats.data) io::WriteLE(out, v);
  Check<IoError>(static_cast<bool>(out), "write failed for '", path, "'");
}

LogMelFeatures ReadFeatures(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Check<IoError>(static_cast<bool>(in), "cannot open '", path, "'");
  io::ExpectMagic(in, "SEKF", path);
  LogMelFeatures feats;
  feats.frames = io::ReadLE<uint32_t>(in, path);
  feats.bins = io::ReadLE<uint32_t>(in, path);
  feats.data.resize(feats.frames * feats.bins);
  for (float& v : feats.data) v = io::ReadLE<float>(in, path);
  return feats;
}

}  // namespace sek::frontend
