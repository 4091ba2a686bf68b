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

#include "kidvox/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "kidvox/errors.hpp"
#include "kidvox/stats_util.hpp"

namespace kidvox {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Small penalty per octave above the minimum lag so that a subharmonic
// peak of nearly equal height does not win over the true period.
constexpr double kOctaveCost = 0.02;

double frame_rms(const double* x, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i] * x[i];
  return std::sqrt(s / n);
}

struct AcPeak {
  double lag = 0.0;  // samples, sub-sample resolution
  double r = 0.0;    // normalized autocorrelation at the peak
  bool found = false;
};

// Mean-removed normalized cross-correlation of a frame with itself at
// integer lags in [lag_min, lag_max], then the best local maximum after
// the octave penalty, refined by parabolic interpolation.
AcPeak autocorr_peak(const double* frame, int n, int lag_min, int lag_max) {
  AcPeak out;
  std::vector<double> x(frame, frame + n);
  const double m = mean_of(x);
  for (double& v : x) v -= m;

  lag_max = std::min(lag_max, n - 2);
  if (lag_min > lag_max) return out;

  std::vector<double> r(static_cast<std::size_t>(lag_max) + 2, 0.0);
  for (int tau = lag_min - 1; tau <= lag_max + 1; ++tau) {
    if (tau < 1 || tau > n - 2) continue;
    double num = 0.0, e0 = 0.0, e1 = 0.0;
    const int len = n - tau;
    for (int i = 0; i < len; ++i) {
      num += x[i] * x[i + tau];
      e0 += x[i] * x[i];
      e1 += x[i + tau] * x[i + tau];
    }
    const double den = std::sqrt(e0 * e1);
    r[static_cast<std::size_t>(tau)] = den > 0.0 ? num / den : 0.0;
  }

  double best_score = -1e9;
  int best_tau = -1;
  for (int tau = lag_min; tau <= lag_max; ++tau) {
    const double here = r[static_cast<std::size_t>(tau)];
    const double left = tau - 1 >= 1 ? r[static_cast<std::size_t>(tau - 1)] : -1e9;
    const double right = tau + 1 <= n - 2 ? r[static_cast<std::size_t>(tau + 1)] : -1e9;
    if (here >= left && here > right) {
      const double score = here - kOctaveCost * std::log2(static_cast<double>(tau) / lag_min);
      if (score > best_score) {
        best_score = score;
        best_tau = tau;
      }
    }
  }
  if (best_tau < 0) return out;

  double lag = best_tau;
  double peak = r[static_cast<std::size_t>(best_tau)];
  if (best_tau - 1 >= 1 && best_tau + 1 <= n - 2) {
    const double rm = r[static_cast<std::size_t>(best_tau - 1)];
    const double r0 = peak;
    const double rp = r[static_cast<std::size_t>(best_tau + 1)];
    const double denom = rm - 2.0 * r0 + rp;
    if (std::abs(denom) > 1e-30) {
      double delta = 0.5 * (rm - rp) / denom;
      delta = std::clamp(delta, -0.5, 0.5);
      lag = best_tau + delta;
      peak = r0 - 0.25 * (rm - rp) * delta;
    }
  }
  out.lag = lag;
  out.r = std::min(peak, 1.0);
  out.found = true;
  return out;
}

}  // namespace

Frames preprocess(const Pcm& audio, const DspParams& params) {
  if (audio.samples.empty()) throw DataError("empty audio buffer");
  Pcm work = resample(audio, params.sample_rate);

  if (params.normalize) {
    double peak = 0.0;
    for (double v : work.samples) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
      for (double& v : work.samples) v /= peak;
    }
  }

  Frames f;
  f.sample_rate = params.sample_rate;
  f.length = static_cast<int>(std::llround(params.frame_length_s * params.sample_rate));
  f.hop = static_cast<int>(std::llround(params.frame_hop_s * params.sample_rate));
  if (f.length <= 0 || f.hop <= 0) throw ConfigError("frame length and hop must be positive");
  if (static_cast<int>(work.samples.size()) < f.length) {
    throw DataError("audio shorter than one analysis frame");
  }
  f.count = static_cast<int>((work.samples.size() - static_cast<std::size_t>(f.length)) /
                             static_cast<std::size_t>(f.hop)) + 1;
  f.signal = std::move(work.samples);
  f.window.resize(static_cast<std::size_t>(f.length));
  for (int i = 0; i < f.length; ++i) {
    f.window[static_cast<std::size_t>(i)] =
        0.54 - 0.46 * std::cos(2.0 * kPi * i / (f.length - 1));
  }
  return f;
}

PitchTrack pitch_track(const Frames& frames, const DspParams& params) {
  PitchTrack out;
  out.hop_s = frames.hop_s();
  out.f0.assign(static_cast<std::size_t>(frames.count), kMissing);
  out.voiced.assign(static_cast<std::size_t>(frames.count), 0);
  out.peak_r.assign(static_cast<std::size_t>(frames.count), 0.0);

  const int lag_min = static_cast<int>(std::ceil(params.sample_rate / params.pitch_max_hz));
  const int lag_max = static_cast<int>(std::floor(params.sample_rate / params.pitch_min_hz));

  std::vector<double> rms(static_cast<std::size_t>(frames.count));
  double rms_max = 0.0;
  for (int i = 0; i < frames.count; ++i) {
    rms[static_cast<std::size_t>(i)] = frame_rms(frames.frame(i), frames.length);
    rms_max = std::max(rms_max, rms[static_cast<std::size_t>(i)]);
  }

  for (int i = 0; i < frames.count; ++i) {
    if (rms_max <= 0.0 || rms[static_cast<std::size_t>(i)] < params.energy_gate * rms_max) {
      continue;
    }
    AcPeak peak = autocorr_peak(frames.frame(i), frames.length, lag_min, lag_max);
    if (!peak.found) continue;
    out.peak_r[static_cast<std::size_t>(i)] = peak.r;
    if (peak.r >= params.voicing_threshold) {
      out.voiced[static_cast<std::size_t>(i)] = 1;
      out.f0[static_cast<std::size_t>(i)] = params.sample_rate / peak.lag;
    }
  }
  return out;
}

PulseTrain glottal_pulses(const Frames& frames, const PitchTrack& pitch,
                          const DspParams& params) {
  PulseTrain out;
  const auto& x = frames.signal;
  const std::ptrdiff_t nsig = static_cast<std::ptrdiff_t>(x.size());

  // Peak |x| position in [lo, hi).
  auto peak_in = [&](std::ptrdiff_t lo, std::ptrdiff_t hi) -> std::ptrdiff_t {
    lo = std::max<std::ptrdiff_t>(lo, 0);
    hi = std::min(hi, nsig);
    if (lo >= hi) return -1;
    std::ptrdiff_t best = lo;
    for (std::ptrdiff_t i = lo + 1; i < hi; ++i) {
      if (std::abs(x[static_cast<std::size_t>(i)]) > std::abs(x[static_cast<std::size_t>(best)])) best = i;
    }
    return best;
  };

  int i = 0;
  while (i < frames.count) {
    if (!pitch.voiced[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    int run_end = i;
    while (run_end + 1 < frames.count && pitch.voiced[static_cast<std::size_t>(run_end + 1)]) ++run_end;

    const std::ptrdiff_t span_lo = static_cast<std::ptrdiff_t>(i) * frames.hop;
    const std::ptrdiff_t span_hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(run_end) * frames.hop + frames.length, nsig);

    // F0 at a sample position: the voiced frame of this run whose center is
    // nearest.
    auto f0_at = [&](std::ptrdiff_t pos) -> double {
      int fi = static_cast<int>((pos - frames.length / 2 + frames.hop / 2) / frames.hop);
      fi = std::clamp(fi, i, run_end);
      int best = -1;
      for (int d = 0; d <= run_end - i; ++d) {
        if (fi - d >= i && pitch.voiced[static_cast<std::size_t>(fi - d)]) { best = fi - d; break; }
        if (fi + d <= run_end && pitch.voiced[static_cast<std::size_t>(fi + d)]) { best = fi + d; break; }
      }
      return best >= 0 ? pitch.f0[static_cast<std::size_t>(best)] : kMissing;
    };

    double f0 = f0_at(span_lo);
    if (is_missing(f0)) { i = run_end + 1; continue; }
    double period = params.sample_rate / f0;

    std::ptrdiff_t cur = peak_in(span_lo, span_lo + static_cast<std::ptrdiff_t>(std::llround(period)));
    while (cur >= 0 && cur < span_hi) {
      if (std::abs(x[static_cast<std::size_t>(cur)]) > 0.0) {
        out.times.push_back(static_cast<double>(cur) / params.sample_rate);
        out.amplitudes.push_back(std::abs(x[static_cast<std::size_t>(cur)]));
      }
      f0 = f0_at(cur);
      if (is_missing(f0)) break;
      period = params.sample_rate / f0;
      const std::ptrdiff_t expected = cur + static_cast<std::ptrdiff_t>(std::llround(period));
      const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(std::llround(0.2 * period));
      if (expected - w >= span_hi) break;
      std::ptrdiff_t next = peak_in(expected - w, expected + w + 1);
      if (next < 0 || next <= cur) break;
      cur = next;
    }
    i = run_end + 1;
  }
  return out;
}

JitterFeatures jitter_features(const PulseTrain& pulses) {
  JitterFeatures out;
  const std::size_t n = pulses.times.size();
  if (n < 5) return out;  // insufficient voicing

  std::vector<double> T(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) T[i] = pulses.times[i + 1] - pulses.times[i];
  const std::size_t p = T.size();
  const double tbar = mean_of(T);
  if (tbar <= 0.0) return out;

  double acc = 0.0;
  for (std::size_t i = 1; i < p; ++i) acc += std::abs(T[i] - T[i - 1]);
  const double local_abs = acc / static_cast<double>(p - 1);
  out.local_abs = local_abs;
  out.local = local_abs / tbar;

  if (p >= 3) {
    acc = 0.0;
    for (std::size_t i = 1; i + 1 < p; ++i) {
      acc += std::abs(T[i] - (T[i - 1] + T[i] + T[i + 1]) / 3.0);
    }
    const double rap = acc / static_cast<double>(p - 2) / tbar;
    out.rap = rap;
    out.ddp = 3.0 * rap;
  }
  if (p >= 5) {
    acc = 0.0;
    for (std::size_t i = 2; i + 2 < p; ++i) {
      acc += std::abs(T[i] - (T[i - 2] + T[i - 1] + T[i] + T[i + 1] + T[i + 2]) / 5.0);
    }
    out.ppq5 = acc / static_cast<double>(p - 4) / tbar;
  }
  return out;
}

ShimmerFeatures shimmer_features(const PulseTrain& pulses) {
  ShimmerFeatures out;
  const auto& A = pulses.amplitudes;
  const std::size_t n = A.size();
  if (n < 2) return out;
  const double abar = mean_of(A);
  if (abar <= 0.0) return out;

  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) acc += std::abs(A[i] - A[i - 1]);
  out.local = acc / static_cast<double>(n - 1) / abar;

  // apqN: deviation of each amplitude from the mean of the N-point window
  // centred on it.
  auto apq = [&](std::size_t w) -> std::optional<double> {
    if (n < w) return std::nullopt;
    const std::size_t half = w / 2;
    double s = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = half; i + half < n; ++i) {
      double wm = 0.0;
      for (std::size_t j = i - half; j <= i + half; ++j) wm += A[j];
      wm /= static_cast<double>(w);
      s += std::abs(A[i] - wm);
      ++cnt;
    }
    return s / static_cast<double>(cnt) / abar;
  };

  out.apq3 = apq(3);
  out.apq5 = apq(5);
  out.apq11 = apq(11);
  if (out.apq3) out.dda = 3.0 * *out.apq3;
  return out;
}

double frame_hnr_db(double r) {
  r = std::clamp(r, 1e-6, 1.0 - 1e-6);
  return 10.0 * std::log10(r / (1.0 - r));
}

std::optional<double> hnr_db(const PitchTrack& pitch) {
  double s = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < pitch.voiced.size(); ++i) {
    if (pitch.voiced[i]) {
      s += frame_hnr_db(pitch.peak_r[i]);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return s / n;
}

namespace {

// Levinson-Durbin on autocorrelation r[0..p]; returns the polynomial
// A(z) = 1 + a1 z^-1 + ... + ap z^-p as [1, a1..ap], or empty if the
// recursion is not positive definite.
std::vector<double> lpc_from_autocorr(const std::vector<double>& r, int p) {
  if (r[0] <= 0.0) return {};
  std::vector<double> a(static_cast<std::size_t>(p) + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  for (int i = 1; i <= p; ++i) {
    double acc = r[static_cast<std::size_t>(i)];
    for (int j = 1; j < i; ++j) acc += a[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(i - j)];
    const double k = -acc / err;
    std::vector<double> na = a;
    for (int j = 1; j < i; ++j) {
      na[static_cast<std::size_t>(j)] = a[static_cast<std::size_t>(j)] + k * a[static_cast<std::size_t>(i - j)];
    }
    na[static_cast<std::size_t>(i)] = k;
    a = std::move(na);
    err *= (1.0 - k * k);
    if (err <= 0.0) return {};
  }
  return a;
}

// Durand-Kerner simultaneous root iteration for a monic real polynomial
// given as [1, c1..cp]. Deterministic start, fixed iteration budget.
std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs) {
  const int deg = static_cast<int>(coeffs.size()) - 1;
  std::vector<std::complex<double>> z(static_cast<std::size_t>(deg));
  const std::complex<double> seed(0.4, 0.9);
  std::complex<double> w(1.0, 0.0);
  for (int k = 0; k < deg; ++k) {
    w *= seed;
    z[static_cast<std::size_t>(k)] = w;
  }
  auto eval = [&](std::complex<double> v) {
    std::complex<double> acc(coeffs[0], 0.0);
    for (std::size_t i = 1; i < coeffs.size(); ++i) acc = acc * v + coeffs[i];
    return acc;
  };
  for (int it = 0; it < 300; ++it) {
    double worst = 0.0;
    for (int k = 0; k < deg; ++k) {
      std::complex<double> num = eval(z[static_cast<std::size_t>(k)]);
      std::complex<double> den(1.0, 0.0);
      for (int j = 0; j < deg; ++j) {
        if (j != k) den *= z[static_cast<std::size_t>(k)] - z[static_cast<std::size_t>(j)];
      }
      if (std::abs(den) < 1e-300) continue;
      const std::complex<double> step = num / den;
      z[static_cast<std::size_t>(k)] -= step;
      worst = std::max(worst, std::abs(step));
    }
    if (worst < 1e-12) break;
  }
  return z;
}

}  // namespace

FormantTrack formant_track(const Frames& frames, const PitchTrack& pitch,
                           const DspParams& params) {
  FormantTrack out;
  out.freq.assign(static_cast<std::size_t>(frames.count), {0, 0, 0, 0});
  out.bw.assign(static_cast<std::size_t>(frames.count), {0, 0, 0, 0});
  out.count.assign(static_cast<std::size_t>(frames.count), 0);

  const int p = params.lpc_order;
  std::vector<double> buf(static_cast<std::size_t>(frames.length));

  for (int fi = 0; fi < frames.count; ++fi) {
    if (!pitch.voiced[static_cast<std::size_t>(fi)]) continue;
    const double* frame = frames.frame(fi);
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(fi) * frames.hop;

    for (int i = 0; i < frames.length; ++i) {
      const double prev = (start + i > 0) ? frames.signal[static_cast<std::size_t>(start + i - 1)] : 0.0;
      buf[static_cast<std::size_t>(i)] =
          (frame[i] - params.preemphasis * prev) * frames.window[static_cast<std::size_t>(i)];
    }

    std::vector<double> r(static_cast<std::size_t>(p) + 1, 0.0);
    for (int lag = 0; lag <= p; ++lag) {
      double s = 0.0;
      for (int i = lag; i < frames.length; ++i) {
        s += buf[static_cast<std::size_t>(i)] * buf[static_cast<std::size_t>(i - lag)];
      }
      r[static_cast<std::size_t>(lag)] = s;
    }

    std::vector<double> a = lpc_from_autocorr(r, p);
    if (a.empty()) continue;  // unstable frame

    auto roots = poly_roots(a);
    std::vector<std::pair<double, double>> cand;  // (freq, bw)
    for (const auto& z : roots) {
      if (z.imag() <= 0.0) continue;
      const double mag = std::abs(z);
      if (mag <= 0.0 || mag >= 1.0) continue;
      const double f = std::atan2(z.imag(), z.real()) * params.sample_rate / (2.0 * kPi);
      const double bw = -(params.sample_rate / kPi) * std::log(mag);
      if (f > params.formant_min_hz && f < params.formant_max_hz && bw > 0.0 &&
          bw < params.formant_max_bw_hz) {
        cand.push_back({f, bw});
      }
    }
    std::sort(cand.begin(), cand.end());
    const int k = std::min<int>(4, static_cast<int>(cand.size()));
    for (int j = 0; j < k; ++j) {
      out.freq[static_cast<std::size_t>(fi)][static_cast<std::size_t>(j)] = cand[static_cast<std::size_t>(j)].first;
      out.bw[static_cast<std::size_t>(fi)][static_cast<std::size_t>(j)] = cand[static_cast<std::size_t>(j)].second;
    }
    out.count[static_cast<std::size_t>(fi)] = k;
  }
  return out;
}

namespace {

// Traunmueller Bark scale.
double hz_to_bark(double f) { return 26.81 * f / (1960.0 + f) - 0.53; }

// Triangular filterbank weights on an arbitrary warping of the frequency
// axis. `warp` maps Hz to the perceptual scale; `nbands` triangles span
// [warp(0), warp(fmax)] with 50% overlap.
std::vector<std::vector<double>> triangle_bank(std::size_t nfft, double fs, double fmax,
                                               int nbands, double (*warp)(double)) {
  const std::size_t nbins = nfft / 2 + 1;
  const double lo = warp(0.0);
  const double hi = warp(fmax);
  std::vector<double> edges(static_cast<std::size_t>(nbands) + 2);
  for (int i = 0; i < nbands + 2; ++i) {
    edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (nbands + 1);
  }
  std::vector<std::vector<double>> bank(static_cast<std::size_t>(nbands),
                                        std::vector<double>(nbins, 0.0));
  for (std::size_t k = 0; k < nbins; ++k) {
    const double z = warp(static_cast<double>(k) * fs / static_cast<double>(nfft));
    for (int m = 0; m < nbands; ++m) {
      const double l = edges[static_cast<std::size_t>(m)];
      const double c = edges[static_cast<std::size_t>(m) + 1];
      const double r = edges[static_cast<std::size_t>(m) + 2];
      double w = 0.0;
      if (z > l && z < r) w = z <= c ? (z - l) / (c - l) : (r - z) / (r - c);
      bank[static_cast<std::size_t>(m)][k] = w;
    }
  }
  return bank;
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }

std::vector<double> windowed_magnitude(const Frames& frames, int fi, std::size_t nfft,
                                       std::vector<double>& scratch) {
  const double* frame = frames.frame(fi);
  scratch.resize(static_cast<std::size_t>(frames.length));
  for (int i = 0; i < frames.length; ++i) {
    scratch[static_cast<std::size_t>(i)] = frame[i] * frames.window[static_cast<std::size_t>(i)];
  }
  return magnitude_spectrum(scratch.data(), scratch.size(), nfft);
}

}  // namespace

std::vector<double> loudness_contour(const Frames& frames, const DspParams& params) {
  const auto bank = triangle_bank(params.nfft, params.sample_rate, 8000.0, 26, hz_to_bark);
  std::vector<double> out(static_cast<std::size_t>(frames.count), 0.0);
  std::vector<double> scratch;
  for (int fi = 0; fi < frames.count; ++fi) {
    auto mag = windowed_magnitude(frames, fi, params.nfft, scratch);
    double loud = 0.0;
    for (const auto& band : bank) {
      double e = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) e += band[k] * mag[k] * mag[k];
      loud += std::pow(e, 0.33);
    }
    out[static_cast<std::size_t>(fi)] = loud;
  }
  return out;
}

namespace {

double band_energy(const std::vector<double>& mag, double fs, std::size_t nfft, double lo,
                   double hi) {
  double e = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(nfft);
    if (f >= lo && f < hi) e += mag[k] * mag[k];
  }
  return e;
}

double band_peak(const std::vector<double>& mag, double fs, std::size_t nfft, double lo,
                 double hi) {
  double m = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(nfft);
    if (f >= lo && f < hi) m = std::max(m, mag[k]);
  }
  return m;
}

double spectrum_slope(const std::vector<double>& mag, double fs, std::size_t nfft, double lo,
                      double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(nfft);
    if (f < lo || f > hi) continue;
    const double y = 20.0 * std::log10(std::max(mag[k], 1e-12));
    sx += f;
    sy += y;
    sxx += f * f;
    sxy += f * y;
    ++n;
  }
  if (n < 2) return kMissing;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return kMissing;
  return (n * sxy - sx * sy) / denom;
}

// Strongest magnitude within +-f0/4 of a target frequency.
double harmonic_amplitude(const std::vector<double>& mag, double fs, std::size_t nfft,
                          double target, double f0) {
  return band_peak(mag, fs, nfft, target - 0.25 * f0, target + 0.25 * f0);
}

double db(double a) { return 20.0 * std::log10(std::max(a, 1e-12)); }

}  // namespace

SpectralSeries spectral_descriptors(const Frames& frames, const PitchTrack& pitch,
                                    const FormantTrack& formants, const DspParams& params) {
  SpectralSeries out;
  const std::size_t n = static_cast<std::size_t>(frames.count);
  out.flux.assign(n, kMissing);
  out.alpha_ratio.assign(n, kMissing);
  out.hammarberg.assign(n, kMissing);
  out.slope_0_500.assign(n, kMissing);
  out.slope_500_1500.assign(n, kMissing);
  out.h1_h2.assign(n, kMissing);
  out.h1_a3.assign(n, kMissing);
  for (auto& c : out.mfcc) c.assign(n, kMissing);

  const auto mel_bank = triangle_bank(params.nfft, params.sample_rate, 8000.0, 26, hz_to_mel);
  const double fs = params.sample_rate;
  const std::size_t nfft = params.nfft;

  std::vector<double> scratch;
  std::vector<double> prev_mag;
  for (int fi = 0; fi < frames.count; ++fi) {
    const std::size_t f = static_cast<std::size_t>(fi);
    auto mag = windowed_magnitude(frames, fi, nfft, scratch);

    // Spectral flux against the previous frame.
    if (fi == 0) {
      out.flux[f] = 0.0;
    } else {
      double num = 0.0, e0 = 0.0, e1 = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) {
        const double d = mag[k] - prev_mag[k];
        num += d * d;
        e0 += mag[k] * mag[k];
        e1 += prev_mag[k] * prev_mag[k];
      }
      const double den = std::sqrt(e0 * e1);
      if (den > 0.0) {
        out.flux[f] = num / den;
      } else if (num == 0.0) {
        out.flux[f] = 0.0;
      }
    }

    const double e_low = band_energy(mag, fs, nfft, 50.0, 1000.0);
    const double e_high = band_energy(mag, fs, nfft, 1000.0, 5000.0);
    if (e_low > 0.0 && e_high > 0.0) out.alpha_ratio[f] = 10.0 * std::log10(e_high / e_low);

    const double p_low = band_peak(mag, fs, nfft, 0.0, 2000.0);
    const double p_high = band_peak(mag, fs, nfft, 2000.0, 5000.0);
    if (p_low > 0.0 && p_high > 0.0) out.hammarberg[f] = 10.0 * std::log10(p_low / p_high);

    out.slope_0_500[f] = spectrum_slope(mag, fs, nfft, 0.0, 500.0);
    out.slope_500_1500[f] = spectrum_slope(mag, fs, nfft, 500.0, 1500.0);

    // Mel cepstra 1..4.
    double loge[26];
    for (int m = 0; m < 26; ++m) {
      double e = 0.0;
      const auto& band = mel_bank[static_cast<std::size_t>(m)];
      for (std::size_t k = 0; k < mag.size(); ++k) e += band[k] * mag[k] * mag[k];
      loge[m] = std::log(std::max(e, 1e-30));
    }
    for (int j = 1; j <= 4; ++j) {
      double c = 0.0;
      for (int m = 0; m < 26; ++m) c += loge[m] * std::cos(kPi * j * (m + 0.5) / 26.0);
      out.mfcc[static_cast<std::size_t>(j - 1)][f] = c * std::sqrt(2.0 / 26.0);
    }

    if (pitch.voiced[f]) {
      const double f0 = pitch.f0[f];
      const double a1 = harmonic_amplitude(mag, fs, nfft, f0, f0);
      const double a2 = harmonic_amplitude(mag, fs, nfft, 2.0 * f0, f0);
      if (a1 > 0.0 && a2 > 0.0) out.h1_h2[f] = db(a1) - db(a2);

      if (formants.count[f] >= 3) {
        const double f3 = formants.freq[f][2];
        const double b3 = formants.bw[f][2];
        double a3 = 0.0;
        for (int h = 1; h * f0 <= fs / 2.0; ++h) {
          const double fh = h * f0;
          if (std::abs(fh - f3) <= b3) {
            a3 = std::max(a3, harmonic_amplitude(mag, fs, nfft, fh, f0));
          }
        }
        if (a1 > 0.0 && a3 > 0.0) out.h1_a3[f] = db(a1) - db(a3);
      }
    }
    prev_mag = std::move(mag);
  }
  return out;
}

VoicingStats voicing_structure(const PitchTrack& pitch, const std::vector<double>& loudness,
                               double duration_s) {
  VoicingStats out;
  const std::size_t n = pitch.voiced.size();
  std::vector<double> voiced_runs, unvoiced_runs;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && pitch.voiced[j] == pitch.voiced[i]) ++j;
    const double len = static_cast<double>(j - i) * pitch.hop_s;
    (pitch.voiced[i] ? voiced_runs : unvoiced_runs).push_back(len);
    i = j;
  }
  if (!unvoiced_runs.empty()) out.uvl_mean = mean_of(unvoiced_runs);
  if (!voiced_runs.empty()) out.vl_mean = mean_of(voiced_runs);
  if (duration_s > 0.0) {
    out.voiced_segments_per_sec = static_cast<double>(voiced_runs.size()) / duration_s;
  }

  if (loudness.size() >= 3 && duration_s > 0.0) {
    const double p95 = quantile(loudness, 0.95);
    const double gate = 0.8 * p95;
    int peaks = 0;
    for (std::size_t k = 1; k + 1 < loudness.size(); ++k) {
      if (loudness[k] > loudness[k - 1] && loudness[k] > loudness[k + 1] && loudness[k] > gate) {
        ++peaks;
      }
    }
    out.loudness_peak_rate = peaks / duration_s;
  }
  return out;
}

SegmentDescriptors analyze_segment(const Pcm& audio, const DspParams& params) {
  SegmentDescriptors d;
  Frames frames = preprocess(audio, params);
  d.duration_s = frames.duration_s();
  d.pitch = pitch_track(frames, params);
  d.pulses = glottal_pulses(frames, d.pitch, params);
  d.jitter = jitter_features(d.pulses);
  d.shimmer = shimmer_features(d.pulses);
  d.hnr = hnr_db(d.pitch);
  d.formants = formant_track(frames, d.pitch, params);
  d.loudness = loudness_contour(frames, params);
  d.spectral = spectral_descriptors(frames, d.pitch, d.formants, params);
  d.voicing = voicing_structure(d.pitch, d.loudness, d.duration_s);
  return d;
}

}  // namespace kidvox
