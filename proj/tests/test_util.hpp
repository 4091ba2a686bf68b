// Copyright 2026 The kidvox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KIDVOX_TESTS_TEST_UTIL_HPP_
#define KIDVOX_TESTS_TEST_UTIL_HPP_

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "kidvox/audio.hpp"
#include "kidvox/features.hpp"
#include "kidvox/rng.hpp"

namespace kidvox::testutil {

inline constexpr double kPi = 3.14159265358979323846;

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("kidvox_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
}

inline Pcm make_sine(double freq, double dur_s, double rate = 16000.0, double amp = 0.8) {
  Pcm p;
  p.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(dur_s * rate);
  p.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.samples[i] = amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / rate);
  }
  return p;
}

inline Pcm make_sawtooth(double freq, double dur_s, double rate = 16000.0, double amp = 0.8) {
  Pcm p;
  p.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(dur_s * rate);
  p.samples.resize(n);
  // Integer phase accumulation: i*freq is exact for the test frequencies,
  // so the waveform is exactly periodic with no boundary rounding jitter.
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = std::fmod(static_cast<double>(i) * freq, rate) / rate;
    p.samples[i] = amp * (2.0 * ph - 1.0);
  }
  return p;
}

inline Pcm make_silence(double dur_s, double rate = 16000.0) {
  Pcm p;
  p.sample_rate = rate;
  p.samples.assign(static_cast<std::size_t>(dur_s * rate), 0.0);
  return p;
}

inline Pcm make_noise(double dur_s, std::uint64_t seed, double rate = 16000.0,
                      double amp = 0.9) {
  Pcm p;
  p.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(dur_s * rate);
  p.samples.resize(n);
  Rng rng(seed);
  for (auto& s : p.samples) s = amp * (2.0 * rng.uniform01() - 1.0);
  return p;
}

inline Pcm make_impulse_train(double f0, double dur_s, double rate = 16000.0,
                              double amp = 0.9) {
  Pcm p;
  p.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(dur_s * rate);
  p.samples.assign(n, 0.0);
  const double period = rate / f0;
  for (double pos = 0.0; pos < static_cast<double>(n); pos += period) {
    p.samples[static_cast<std::size_t>(pos)] = amp;
  }
  return p;
}

// Impulse train filtered by two-pole resonators: a crude but controllable
// vowel with known formant frequencies and bandwidths.
inline Pcm make_vowel(double f0, const std::vector<double>& formants, double dur_s,
                      double bw = 80.0, double rate = 16000.0) {
  Pcm p = make_impulse_train(f0, dur_s, rate, 1.0);
  for (double fc : formants) {
    const double r = std::exp(-kPi * bw / rate);
    const double a1 = 2.0 * r * std::cos(2.0 * kPi * fc / rate);
    const double a2 = -r * r;
    double y1 = 0.0, y2 = 0.0;
    for (auto& s : p.samples) {
      const double y = s + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      s = y;
    }
  }
  double peak = 0.0;
  for (double s : p.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0) {
    for (auto& s : p.samples) s *= 0.8 / peak;
  }
  return p;
}

// Dense matrix with per-subject structure: `per_class` subjects per sex,
// `per_subject` rows each, standard gaussian features, the two class means
// separated by `shift` along every column of `signal_cols`.
inline FeatureMatrix make_classed_matrix(std::size_t per_class, std::size_t per_subject,
                                         std::size_t n_features, double shift,
                                         std::uint64_t seed, std::size_t signal_cols = 1,
                                         double subject_sd = 0.0) {
  FeatureMatrix x;
  for (std::size_t c = 0; c < n_features; ++c) x.feature_names.push_back("f" + std::to_string(c));
  Rng rng(seed);
  for (int cls = 0; cls < 2; ++cls) {
    for (std::size_t s = 0; s < per_class; ++s) {
      std::vector<double> subj_off(n_features, 0.0);
      if (subject_sd > 0.0) {
        for (auto& v : subj_off) v = subject_sd * rng.gaussian();
      }
      for (std::size_t r = 0; r < per_subject; ++r) {
        SampleMeta m;
        m.subject_id = (cls == 0 ? "F" : "M") + std::to_string(s);
        m.age = 9;
        m.sex = cls == 0 ? Sex::F : Sex::M;
        m.segment_index = static_cast<int>(r);
        x.meta.push_back(m);
        for (std::size_t c = 0; c < n_features; ++c) {
          double v = rng.gaussian() + subj_off[c];
          if (cls == 1 && c < signal_cols) v += shift;
          x.data.push_back(v);
        }
      }
    }
  }
  return x;
}

}  // namespace kidvox::testutil

#endif  // KIDVOX_TESTS_TEST_UTIL_HPP_
