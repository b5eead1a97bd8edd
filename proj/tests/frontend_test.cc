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

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sek/frontend/fbank.h"
#include "sek/base/error.h"

namespace sek::frontend {
namespace {

namespace fs = std::filesystem;

Waveform Noise(int64_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  Waveform w;
  w.samples.resize(n);
  for (float& s : w.samples) s = u(rng);
  return w;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sek_frontend_" + std::string(
                ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST(MelScaleTest, HtkFormula) {
  EXPECT_NEAR(HzToMel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(HzToMel(1000.0), 1000.0, 0.1);
  for (double hz : {0.0, 20.0, 440.0, 3999.0, 8000.0})
    EXPECT_NEAR(MelToHz(HzToMel(hz)), hz, 1e-8);
}

TEST(MelScaleTest, CentersAreUniformInMel) {
  FbankOptions opts;
  std::vector<double> c = MelCenterFrequencies(opts);
  ASSERT_EQ(c.size(), 80u);
  const double step = (HzToMel(8000.0) - HzToMel(20.0)) / 81;
  EXPECT_NEAR(HzToMel(c[0]), HzToMel(20.0) + step, 1e-9);
  for (size_t m = 1; m < c.size(); ++m)
    EXPECT_NEAR(HzToMel(c[m]) - HzToMel(c[m - 1]), step, 1e-9);
}

TEST(MelScaleTest, FilterbankTriangles) {
  FbankOptions opts;
  auto bank = MelFilterbank(opts);
  ASSERT_EQ(bank.size(), 80u);
  ASSERT_EQ(bank[0].size(), 257u);
  std::vector<double> c = MelCenterFrequencies(opts);
  for (size_t m = 0; m < bank.size(); ++m) {
    double peak = 0;
    int nonzero = 0;
    for (size_t k = 0; k < bank[m].size(); ++k) {
      const double w = bank[m][k];
      ASSERT_GE(w, 0.0);
      ASSERT_LE(w, 1.0);
      peak = std::max(peak, w);
      nonzero += w > 0;
      // Rising below the center, falling above it.
      const double hz = k * 16000.0 / 512;
      if (k > 0 && w > 0 && bank[m][k - 1] > 0) {
        if (hz <= c[m]) EXPECT_GE(w, bank[m][k - 1]);
        if ((k - 1) * 16000.0 / 512 >= c[m]) EXPECT_LE(w, bank[m][k - 1]);
      }
    }
    EXPECT_GT(nonzero, 0) << "filter " << m;
    EXPECT_GT(peak, 0.3) << "filter " << m;
  }
  // Adjacent triangles overlap so that the interior sums to one.
  for (size_t k = 0; k < 257; ++k) {
    const double hz = k * 16000.0 / 512;
    if (hz < c.front() || hz > c.back()) continue;
    double sum = 0;
    for (const auto& f : bank) sum += f[k];
    EXPECT_NEAR(sum, 1.0, 1e-9) << "bin " << k;
  }
}

TEST(FbankTest, FrameCount) {
  FbankOptions opts;
  EXPECT_EQ(NumFrames(399, opts), 0);
  EXPECT_EQ(NumFrames(400, opts), 1);
  EXPECT_EQ(NumFrames(559, opts), 1);
  EXPECT_EQ(NumFrames(560, opts), 2);
  EXPECT_EQ(NumFrames(32000, opts), 198);
  LogMelExtractor ext;
  EXPECT_EQ(ext.Compute(Noise(16000, 1)).frames, 98);
  EXPECT_THROW(ext.Compute(Noise(399, 1)), ValidationError);
  Waveform w = Noise(1000, 1);
  w.sample_rate = 8000;
  EXPECT_THROW(ext.Compute(w), ValidationError);
}

TEST(FbankTest, MatchesDirectDft) {
  FbankOptions opts;
  LogMelExtractor ext(opts);
  Waveform w = Noise(400 + 160 * 3, 7);
  LogMelFeatures got = ext.Compute(w, false);
  ASSERT_EQ(got.frames, 4);
  auto bank = MelFilterbank(opts);
  for (int64_t t = 0; t < got.frames; ++t) {
    std::vector<double> x(400);
    const float* s = w.samples.data() + t * 160;
    for (int i = 0; i < 400; ++i) {
      const double prev = i == 0 ? s[0] : s[i - 1];
      const double hann = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / 399);
      x[i] = (s[i] - 0.97 * prev) * hann;
    }
    for (int m = 0; m < 80; ++m) {
      double e = 0;
      for (int k = 0; k < 257; ++k) {
        if (bank[m][k] == 0) continue;
        std::complex<double> acc = 0;
        for (int i = 0; i < 400; ++i)
          acc += x[i] * std::polar(1.0, -2 * std::numbers::pi * k * i / 512);
        e += bank[m][k] * std::abs(acc);
      }
      EXPECT_NEAR(got.at(t, m), std::log(std::max(e, 1e-10)), 1e-4) << t << "," << m;
    }
  }
}

TEST(FbankTest, SilenceHitsEnergyFloor) {
  LogMelExtractor ext;
  Waveform w;
  w.samples.assign(800, 0.0f);
  LogMelFeatures f = ext.Compute(w, false);
  for (float v : f.data) EXPECT_FLOAT_EQ(v, static_cast<float>(std::log(1e-10)));
}

TEST(FbankTest, MeanNormalization) {
  LogMelExtractor ext;
  LogMelFeatures f = ext.Compute(Noise(8000, 3));
  for (int64_t m = 0; m < f.bins; ++m) {
    double mean = 0;
    for (int64_t t = 0; t < f.frames; ++t) mean += f.at(t, m);
    EXPECT_NEAR(mean / f.frames, 0.0, 1e-5);
  }
  LogMelFeatures again = f;
  MeanNormalize(again);
  for (size_t i = 0; i < f.data.size(); ++i) EXPECT_NEAR(again.data[i], f.data[i], 1e-5);

  LogMelFeatures flat;
  flat.frames = 3;
  flat.bins = 2;
  flat.data = {4, -1, 4, -1, 4, -1};
  MeanNormalize(flat);
  for (float v : flat.data) EXPECT_EQ(v, 0.0f);
}

TEST(CropTest, ContiguousAndWrapped) {
  LogMelFeatures f;
  f.frames = 10;
  f.bins = 2;
  for (int t = 0; t < 10; ++t) f.data.insert(f.data.end(), {float(t), float(-t)});
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    LogMelFeatures c = CropSegment(f, 4, rng);
    ASSERT_EQ(c.frames, 4);
    const int start = static_cast<int>(c.at(0, 0));
    EXPECT_LE(start, 6);
    for (int t = 0; t < 4; ++t) {
      EXPECT_EQ(c.at(t, 0), start + t);
      EXPECT_EQ(c.at(t, 1), -(start + t));
    }
    LogMelFeatures w = CropSegment(f, 25, rng);
    const int s = static_cast<int>(w.at(0, 0));
    for (int t = 0; t < 25; ++t) EXPECT_EQ(w.at(t, 0), (s + t) % 10);
  }
  EXPECT_THROW(CropSegment(f, 0, rng), ValidationError);
}

TEST_F(TempDir, WaveformRoundTrips) {
  Waveform w = Noise(1234, 9);
  WriteSekw(Path("a.sekw"), w);
  Waveform back = ReadWaveform(Path("a.sekw"));
  EXPECT_EQ(back.samples, w.samples);
  EXPECT_EQ(back.sample_rate, 16000);

  WriteWav(Path("a.wav"), w);
  back = ReadWaveform(Path("a.wav"));
  ASSERT_EQ(back.samples.size(), w.samples.size());
  for (size_t i = 0; i < w.samples.size(); ++i)
    EXPECT_NEAR(back.samples[i], w.samples[i], 1.0 / 32768 + 1e-7);
  EXPECT_EQ(fs::file_size(Path("a.wav")), 44u + 2 * 1234);
}

TEST_F(TempDir, FeatureRoundTrip) {
  LogMelExtractor ext;
  LogMelFeatures f = ext.Compute(Noise(4000, 2));
  WriteFeatures(Path("f.sekf"), f);
  LogMelFeatures back = ReadFeatures(Path("f.sekf"));
  EXPECT_EQ(back.frames, f.frames);
  EXPECT_EQ(back.bins, f.bins);
  EXPECT_EQ(back.data, f.data);
  EXPECT_EQ(fs::file_size(Path("f.sekf")), 12u + 4 * f.data.size());
}

TEST_F(TempDir, RejectsBadFiles) {
  EXPECT_THROW(ReadWaveform(Path("missing.wav")), IoError);
  {
    std::ofstream out(Path("junk.wav"), std::ios::binary);
    out << "JUNKJUNKJUNK";
  }
  EXPECT_THROW(ReadWaveform(Path("junk.wav")), IoError);
  EXPECT_THROW(ReadFeatures(Path("junk.wav")), IoError);
  LogMelExtractor ext;
  WriteFeatures(Path("f.sekf"), ext.Compute(Noise(4000, 2)));
  fs::resize_file(Path("f.sekf"), fs::file_size(Path("f.sekf")) - 3);
  EXPECT_THROW(ReadFeatures(Path("f.sekf")), IoError);
}

}  // namespace
}  // namespace sek::frontend
