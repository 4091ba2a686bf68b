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

#ifndef KIDVOX_AUDIO_HPP_
#define KIDVOX_AUDIO_HPP_

#include <complex>
#include <string>
#include <vector>

namespace kidvox {

// Mono audio in [-1, 1] doubles.
struct Pcm {
  std::vector<double> samples;
  double sample_rate = 0.0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a RIFF/WAVE file with 16-bit integer PCM. Multichannel input is
// downmixed by averaging. Raises DataError on anything else.
Pcm read_wav(const std::string& path);

// Writes mono 16-bit PCM. Samples are clipped to [-1, 1].
void write_wav(const std::string& path, const Pcm& pcm);

// Polyphase-free windowed-sinc resampler (Hann window, 32 zero crossings
// per side at the lower of the two rates). Passthrough when rates match.
Pcm resample(const Pcm& in, double target_rate);

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& x);

// Magnitude spectrum of a real frame zero-padded to `nfft` (power of two):
// bins 0..nfft/2 inclusive.
std::vector<double> magnitude_spectrum(const double* frame, std::size_t n,
                                       std::size_t nfft);

}  // namespace kidvox

#endif  // KIDVOX_AUDIO_HPP_
