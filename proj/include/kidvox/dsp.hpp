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

#ifndef KIDVOX_DSP_HPP_
#define KIDVOX_DSP_HPP_

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "kidvox/audio.hpp"

namespace kidvox {

// Per-frame values use NaN for "could not be computed"; aggregations skip
// such frames and nothing non-finite leaves this module in a feature.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return !(v == v); }

struct DspParams {
  double sample_rate = 16000.0;
  double frame_length_s = 0.025;
  double frame_hop_s = 0.010;
  // Peak normalization of the segment before framing. Tests that probe
  // amplitude behaviour switch this off.
  bool normalize = true;
  double pitch_min_hz = 100.0;
  double pitch_max_hz = 600.0;
  double voicing_threshold = 0.45;   // normalized autocorrelation peak
  double energy_gate = 0.01;         // frame RMS >= gate * max frame RMS
  int lpc_order = 12;
  double preemphasis = 0.97;
  double formant_min_hz = 90.0;
  double formant_max_hz = 7800.0;
  double formant_max_bw_hz = 700.0;
  std::size_t nfft = 512;
};

// Preprocessed segment: resampled, optionally peak-normalized signal plus
// the frame grid. Frames index into `signal`; the Hamming window is applied
// by the spectral consumers, time-domain analyses use the raw samples.
struct Frames {
  std::vector<double> signal;  // at params.sample_rate
  double sample_rate = 0.0;
  int length = 0;   // samples per frame
  int hop = 0;      // samples between frame starts
  int count = 0;
  std::vector<double> window;  // Hamming, `length` taps

  const double* frame(int i) const { return signal.data() + static_cast<std::ptrdiff_t>(i) * hop; }
  double hop_s() const { return hop / sample_rate; }
  double duration_s() const { return static_cast<double>(signal.size()) / sample_rate; }
};

// Resample to params.sample_rate, normalize peak to 1 (unless disabled),
// lay out the frame grid. Raises DataError if the audio is shorter than
// one frame.
Frames preprocess(const Pcm& audio, const DspParams& params);

struct PitchTrack {
  std::vector<double> f0;        // Hz; NaN when unvoiced
  std::vector<std::uint8_t> voiced;
  std::vector<double> peak_r;    // normalized autocorrelation at the pitch lag
  double hop_s = 0.0;

  int voiced_count() const {
    int n = 0;
    for (auto v : voiced) n += v;
    return n;
  }
};

// Normalized-autocorrelation pitch per frame. A frame is voiced iff the
// peak autocorrelation in the search range reaches the voicing threshold
// and the frame RMS reaches the energy gate.
PitchTrack pitch_track(const Frames& frames, const DspParams& params);

struct PulseTrain {
  std::vector<double> times;       // seconds, strictly increasing
  std::vector<double> amplitudes;  // peak absolute sample value per pulse
};

// Glottal pulse instants inside voiced regions: successive waveform peaks
// about one period apart (search window +-20% of the local period).
PulseTrain glottal_pulses(const Frames& frames, const PitchTrack& pitch,
                          const DspParams& params);

struct JitterFeatures {
  std::optional<double> local, local_abs, rap, ppq5, ddp;
};

// Period perturbation measures. Fewer than 5 pulses means too little
// voicing to measure: everything missing.
JitterFeatures jitter_features(const PulseTrain& pulses);

struct ShimmerFeatures {
  std::optional<double> local, apq3, apq5, apq11, dda;
};

// Amplitude analogs of the jitter measures; each variant needs enough
// pulses for its window (apq11 the most), shorter trains leave it missing.
ShimmerFeatures shimmer_features(const PulseTrain& pulses);

// Frame HNR from the autocorrelation peak r: 10*log10(r/(1-r)), r clamped
// away from 0 and 1.
double frame_hnr_db(double r);

// Mean frame HNR over voiced frames; missing if none.
std::optional<double> hnr_db(const PitchTrack& pitch);

struct FormantTrack {
  // Parallel to frames; count[i] formants are valid in freq[i]/bw[i],
  // ordered by frequency. Unvoiced frames have count 0.
  std::vector<std::array<double, 4>> freq;
  std::vector<std::array<double, 4>> bw;
  std::vector<int> count;
};

// Per voiced frame: pre-emphasis, Hamming window, LPC by the
// autocorrelation method, polynomial roots; roots inside the frequency
// and bandwidth gates become formant candidates, lowest four kept.
FormantTrack formant_track(const Frames& frames, const PitchTrack& pitch,
                           const DspParams& params);

// Auditory loudness per frame: power spectrum -> 26 triangular Bark-scale
// bands up to 8 kHz -> cube-root-ish (x^0.33) compression -> sum.
std::vector<double> loudness_contour(const Frames& frames, const DspParams& params);

struct SpectralSeries {
  std::vector<double> flux;
  std::vector<double> alpha_ratio;
  std::vector<double> hammarberg;
  std::vector<double> slope_0_500;
  std::vector<double> slope_500_1500;
  std::vector<double> h1_h2;  // voiced frames only
  std::vector<double> h1_a3;  // voiced frames with a valid F3 only
  std::array<std::vector<double>, 4> mfcc;
};

// Frame-level spectral descriptors; NaN where undefined.
SpectralSeries spectral_descriptors(const Frames& frames, const PitchTrack& pitch,
                                    const FormantTrack& formants, const DspParams& params);

struct VoicingStats {
  double uvl_mean = 0.0;              // mean unvoiced-run length, seconds
  double vl_mean = 0.0;               // mean voiced-run length, seconds
  double voiced_segments_per_sec = 0.0;
  double loudness_peak_rate = 0.0;    // peaks above 0.8 * P95, per second
};

VoicingStats voicing_structure(const PitchTrack& pitch, const std::vector<double>& loudness,
                               double duration_s);

// Everything the feature aggregators need for one segment.
struct SegmentDescriptors {
  double duration_s = 0.0;
  PitchTrack pitch;
  PulseTrain pulses;
  JitterFeatures jitter;
  ShimmerFeatures shimmer;
  std::optional<double> hnr;
  FormantTrack formants;
  std::vector<double> loudness;
  SpectralSeries spectral;
  VoicingStats voicing;
};

SegmentDescriptors analyze_segment(const Pcm& audio, const DspParams& params);

}  // namespace kidvox

#endif  // KIDVOX_DSP_HPP_
