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

#include "kidvox/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "kidvox/errors.hpp"

namespace kidvox {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Pcm read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw DataError(path + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= n) {
    const unsigned char* chunk = p + off;
    std::uint32_t len = read_u32(chunk + 4);
    const unsigned char* body = chunk + 8;
    if (off + 8 + len > n) throw DataError(path + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw DataError(path + ": short fmt chunk");
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    off += 8 + len + (len & 1);  // chunks are word-aligned
  }

  if (format != 1 || bits != 16) {
    throw DataError(path + ": only 16-bit integer PCM is supported");
  }
  if (channels == 0 || rate == 0 || data == nullptr) {
    throw DataError(path + ": missing fmt or data chunk");
  }

  const std::size_t frames = data_len / (2 * channels);
  Pcm pcm;
  pcm.sample_rate = static_cast<double>(rate);
  pcm.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* s = data + 2 * (i * channels + c);
      std::int16_t v = static_cast<std::int16_t>(s[0] | (s[1] << 8));
      acc += static_cast<double>(v);
    }
    pcm.samples[i] = acc / (32768.0 * channels);
  }
  return pcm;
}

void write_wav(const std::string& path, const Pcm& pcm) {
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(pcm.sample_rate));
  const std::uint32_t data_len = static_cast<std::uint32_t>(pcm.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);   // integer PCM
  put_u16(out, 1);   // mono
  put_u32(out, rate);
  put_u32(out, rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_len);
  for (double v : pcm.samples) {
    double c = std::clamp(v, -1.0, 1.0);
    long q = std::lround(c * 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write to " + path);
}

Pcm resample(const Pcm& in, double target_rate) {
  if (in.sample_rate <= 0) throw DataError("resample: input has no sample rate");
  if (in.sample_rate == target_rate) return in;

  const double ratio = target_rate / in.sample_rate;
  const std::size_t out_n =
      static_cast<std::size_t>(std::floor(static_cast<double>(in.samples.size()) * ratio));
  Pcm out;
  out.sample_rate = target_rate;
  out.samples.resize(out_n);

  // Anti-alias cutoff at the Nyquist of the lower rate.
  const double scale = std::min(1.0, ratio);
  const int half_width = static_cast<int>(std::ceil(32.0 / scale));
  const std::ptrdiff_t nin = static_cast<std::ptrdiff_t>(in.samples.size());

  for (std::size_t k = 0; k < out_n; ++k) {
    const double t = static_cast<double>(k) / ratio;  // position in input samples
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(std::floor(t));
    double acc = 0.0;
    for (std::ptrdiff_t i = center - half_width; i <= center + half_width + 1; ++i) {
      if (i < 0 || i >= nin) continue;
      const double d = (t - static_cast<double>(i)) * scale;
      double sinc;
      if (std::abs(d) < 1e-12) {
        sinc = 1.0;
      } else {
        sinc = std::sin(kPi * d) / (kPi * d);
      }
      const double w = 0.5 + 0.5 * std::cos(kPi * d / (half_width * scale + 1.0));
      acc += in.samples[static_cast<std::size_t>(i)] * sinc * scale * w;
    }
    out.samples[k] = acc;
  }
  return out;
}

void fft(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft size not a power of two");
  // Bit reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> magnitude_spectrum(const double* frame, std::size_t n, std::size_t nfft) {
  std::vector<std::complex<double>> buf(nfft, std::complex<double>(0.0, 0.0));
  const std::size_t m = std::min(n, nfft);
  for (std::size_t i = 0; i < m; ++i) buf[i] = std::complex<double>(frame[i], 0.0);
  fft(buf);
  std::vector<double> mag(nfft / 2 + 1);
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(buf[i]);
  return mag;
}

}  // namespace kidvox
