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

#include "kidvox/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "kidvox/errors.hpp"
#include "kidvox/stats_util.hpp"

namespace kidvox {

std::string to_string(FeatureSet s) {
  switch (s) {
    case FeatureSet::AF: return "af";
    case FeatureSet::EG: return "eg";
    default: return "eg_vtl";
  }
}

FeatureSet parse_feature_set(const std::string& s) {
  if (s == "af") return FeatureSet::AF;
  if (s == "eg") return FeatureSet::EG;
  if (s == "eg_vtl") return FeatureSet::EG_VTL;
  throw ConfigError("unknown feature set '" + s + "' (expected af, eg or eg_vtl)");
}

namespace {

const char* kInventory[] = {
    "F0_mean",           "F0_std",           "F0_p20",           "F0_p50",
    "F0_p80",            "jitter_local",     "jitter_local_abs", "jitter_rap",
    "jitter_ppq5",       "jitter_ddp",       "shimmer_local",    "shimmer_apq3",
    "shimmer_apq5",      "shimmer_apq11",    "shimmer_dda",      "HNR",
    "F1_mean",           "F2_mean",          "F3_mean",          "F4_mean",
    "F1_std",            "F2_std",           "F3_std",           "F1_bw_mean",
    "F2_bw_mean",        "F3_bw_mean",       "F1_bw_std",        "F2_bw_std",
    "F3_bw_std",         "fdisp",            "avgF",             "mff",
    "fitch_vtl",         "delta_f",          "pF",               "loudness_mean",
    "loudness_std",      "loudness_p20",     "loudness_p50",     "loudness_p80",
    "loudness_peak_rate","sflux_mean",       "sflux_std",        "sflux_V",
    "sflux_UV",          "alpha_ratio_mean", "alpha_ratio_std",  "alpha_ratio_V",
    "alpha_ratio_UV",    "hammarberg_mean",  "hammarberg_std",   "hammarberg_V",
    "hammarberg_UV",     "slope0_500_mean",  "slope0_500_std",   "slope0_500_V",
    "slope0_500_UV",     "slope500_1500_mean","slope500_1500_std","H1_H2_mean",
    "H1_H2_std",         "H1_A3_mean",       "H1_A3_std",        "mfcc1_mean",
    "mfcc1_std",         "mfcc2_mean",       "mfcc2_std",        "mfcc3_mean",
    "mfcc3_std",         "mfcc4_mean",       "mfcc4_std",        "mfcc1_V",
    "mfcc2_V",           "mfcc3_V",          "mfcc4_V",          "UVL_mean",
    "VL_mean",           "voiced_segs_per_sec",
};

const char* kAfOnly[] = {
    "F0_mean",    "F0_std",        "jitter_local", "jitter_local_abs", "jitter_rap",
    "jitter_ppq5","jitter_ddp",    "shimmer_local","shimmer_apq3",     "shimmer_apq5",
    "shimmer_apq11","shimmer_dda", "HNR",          "F1_mean",          "F2_mean",
    "F3_mean",    "F4_mean",       "fdisp",        "avgF",             "mff",
    "fitch_vtl",  "delta_f",       "pF",
};

const char* kVtl[] = {"fdisp", "avgF", "mff", "fitch_vtl", "delta_f", "pF"};

std::vector<std::string> in_canonical_order(const std::set<std::string>& wanted) {
  std::vector<std::string> out;
  for (const char* name : kInventory) {
    if (wanted.count(name)) out.push_back(name);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& canonical_inventory() {
  static const std::vector<std::string> inv(std::begin(kInventory), std::end(kInventory));
  return inv;
}

const std::vector<std::string>& inventory_for(FeatureSet set) {
  static const std::vector<std::string> af =
      in_canonical_order({std::begin(kAfOnly), std::end(kAfOnly)});
  static const std::vector<std::string> eg = [] {
    std::set<std::string> not_eg(std::begin(kAfOnly), std::end(kAfOnly));
    // The functional set shares these with the 23-feature set.
    for (const char* keep : {"F0_mean", "F0_std", "jitter_local", "shimmer_local", "HNR",
                             "F1_mean", "F2_mean", "F3_mean"}) {
      not_eg.erase(keep);
    }
    std::set<std::string> wanted;
    for (const char* name : kInventory) {
      if (!not_eg.count(name)) wanted.insert(name);
    }
    return in_canonical_order(wanted);
  }();
  static const std::vector<std::string> eg_vtl = [] {
    std::set<std::string> wanted(eg.begin(), eg.end());
    for (const char* name : kVtl) wanted.insert(name);
    return in_canonical_order(wanted);
  }();
  switch (set) {
    case FeatureSet::AF: return af;
    case FeatureSet::EG: return eg;
    default: return eg_vtl;
  }
}

VtlFeatures vtl_vector(const double f[4], const FormantPopulationStats& pop) {
  for (int i = 0; i < 4; ++i) {
    if (!(f[i] > 0.0) || (i > 0 && !(f[i] > f[i - 1]))) {
      throw DataError("invalid formant ordering");
    }
  }
  VtlFeatures v;
  v.fdisp = (f[3] - f[0]) / 3.0;
  v.avgF = (f[0] + f[1] + f[2] + f[3]) / 4.0;
  v.mff = std::pow(f[0] * f[1] * f[2] * f[3], 0.25);
  v.fitch_vtl = 35000.0 / (2.0 * v.fdisp);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double m = (2.0 * (i + 1) - 1.0) / 2.0;  // 0.5, 1.5, 2.5, 3.5
    num += f[i] * m;
    den += m * m;
  }
  v.delta_f = num / den;
  if (pop.valid) {
    double z = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (pop.std[i] <= 0.0) throw DataError("zero formant variance in reference population");
      z += (f[i] - pop.mean[i]) / pop.std[i];
    }
    v.pF = z / 4.0;
  }
  return v;
}

namespace {

// Contour aggregation with NaN-skipping; selector limits frames (all,
// voiced-only, unvoiced-only).
enum class Select { all, voiced, unvoiced };

std::vector<double> collect(const std::vector<double>& contour,
                            const std::vector<std::uint8_t>& voiced, Select sel) {
  std::vector<double> out;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    if (is_missing(contour[i])) continue;
    if (sel == Select::voiced && !voiced[i]) continue;
    if (sel == Select::unvoiced && voiced[i]) continue;
    out.push_back(contour[i]);
  }
  return out;
}

void set_mean_std(FeatureVector& fv, const std::string& base, const std::vector<double>& v) {
  if (v.empty()) return;
  fv.set(base + "_mean", mean_of(v));
  if (v.size() >= 2) fv.set(base + "_std", stddev_pop(v));
}

void set_percentiles(FeatureVector& fv, const std::string& base, std::vector<double> v) {
  if (v.empty()) return;
  std::sort(v.begin(), v.end());
  fv.set(base + "_p20", quantile_sorted(v, 0.20));
  fv.set(base + "_p50", quantile_sorted(v, 0.50));
  fv.set(base + "_p80", quantile_sorted(v, 0.80));
}

// Per-frame formant frequency / bandwidth contours (NaN where absent).
std::vector<double> formant_contour(const FormantTrack& t, int which, bool bandwidth) {
  std::vector<double> out(t.count.size(), kMissing);
  for (std::size_t i = 0; i < t.count.size(); ++i) {
    if (t.count[i] > which) {
      out[i] = bandwidth ? t.bw[i][static_cast<std::size_t>(which)]
                         : t.freq[i][static_cast<std::size_t>(which)];
    }
  }
  return out;
}

std::optional<std::array<double, 4>> mean_formants(const SegmentDescriptors& d) {
  std::array<double, 4> m{};
  for (int j = 0; j < 4; ++j) {
    auto v = collect(formant_contour(d.formants, j, false), d.pitch.voiced, Select::voiced);
    if (v.empty()) return std::nullopt;
    m[static_cast<std::size_t>(j)] = mean_of(v);
  }
  if (!(m[0] > 0 && m[0] < m[1] && m[1] < m[2] && m[2] < m[3])) return std::nullopt;
  return m;
}

void set_vtl(FeatureVector& fv, const SegmentDescriptors& d) {
  auto m = mean_formants(d);
  if (!m) return;
  VtlFeatures v = vtl_vector(m->data(), FormantPopulationStats{});
  fv.set("fdisp", v.fdisp);
  fv.set("avgF", v.avgF);
  fv.set("mff", v.mff);
  fv.set("fitch_vtl", v.fitch_vtl);
  fv.set("delta_f", v.delta_f);
  // pF needs cohort statistics; filled by fill_pf.
}

}  // namespace

FeatureVector af_vector(const SegmentDescriptors& d) {
  FeatureVector fv;
  auto f0 = collect(d.pitch.f0, d.pitch.voiced, Select::voiced);
  if (!f0.empty()) {
    fv.set("F0_mean", mean_of(f0));
    if (f0.size() >= 2) fv.set("F0_std", stddev_pop(f0));
  }
  fv.set_optional("jitter_local", d.jitter.local);
  fv.set_optional("jitter_local_abs", d.jitter.local_abs);
  fv.set_optional("jitter_rap", d.jitter.rap);
  fv.set_optional("jitter_ppq5", d.jitter.ppq5);
  fv.set_optional("jitter_ddp", d.jitter.ddp);
  fv.set_optional("shimmer_local", d.shimmer.local);
  fv.set_optional("shimmer_apq3", d.shimmer.apq3);
  fv.set_optional("shimmer_apq5", d.shimmer.apq5);
  fv.set_optional("shimmer_apq11", d.shimmer.apq11);
  fv.set_optional("shimmer_dda", d.shimmer.dda);
  fv.set_optional("HNR", d.hnr);
  static const char* kF[] = {"F1_mean", "F2_mean", "F3_mean", "F4_mean"};
  for (int j = 0; j < 4; ++j) {
    auto v = collect(formant_contour(d.formants, j, false), d.pitch.voiced, Select::voiced);
    if (!v.empty()) fv.set(kF[j], mean_of(v));
  }
  set_vtl(fv, d);
  return fv;
}

FeatureVector functional_vector(const SegmentDescriptors& d) {
  FeatureVector fv;
  const auto& voiced = d.pitch.voiced;

  auto f0 = collect(d.pitch.f0, voiced, Select::voiced);
  if (!f0.empty()) {
    fv.set("F0_mean", mean_of(f0));
    if (f0.size() >= 2) fv.set("F0_std", stddev_pop(f0));
    set_percentiles(fv, "F0", f0);
  }

  auto loud = collect(d.loudness, voiced, Select::all);
  set_mean_std(fv, "loudness", loud);
  set_percentiles(fv, "loudness", loud);
  fv.set("loudness_peak_rate", d.voicing.loudness_peak_rate);

  struct ContourSpec {
    const char* base;
    const std::vector<double>* contour;
    bool vuv;  // emit voiced/unvoiced variants
  };
  const ContourSpec contours[] = {
      {"sflux", &d.spectral.flux, true},
      {"alpha_ratio", &d.spectral.alpha_ratio, true},
      {"hammarberg", &d.spectral.hammarberg, true},
      {"slope0_500", &d.spectral.slope_0_500, true},
      {"slope500_1500", &d.spectral.slope_500_1500, false},
      {"H1_H2", &d.spectral.h1_h2, false},
      {"H1_A3", &d.spectral.h1_a3, false},
  };
  for (const auto& c : contours) {
    set_mean_std(fv, c.base, collect(*c.contour, voiced, Select::all));
    if (c.vuv) {
      auto v = collect(*c.contour, voiced, Select::voiced);
      auto u = collect(*c.contour, voiced, Select::unvoiced);
      if (!v.empty()) fv.set(std::string(c.base) + "_V", mean_of(v));
      if (!u.empty()) fv.set(std::string(c.base) + "_UV", mean_of(u));
    }
  }

  for (int j = 0; j < 4; ++j) {
    const std::string base = "mfcc" + std::to_string(j + 1);
    set_mean_std(fv, base, collect(d.spectral.mfcc[static_cast<std::size_t>(j)], voiced, Select::all));
    auto v = collect(d.spectral.mfcc[static_cast<std::size_t>(j)], voiced, Select::voiced);
    if (!v.empty()) fv.set(base + "_V", mean_of(v));
  }

  static const char* kF[] = {"F1", "F2", "F3"};
  for (int j = 0; j < 3; ++j) {
    set_mean_std(fv, kF[j], collect(formant_contour(d.formants, j, false), voiced, Select::voiced));
    set_mean_std(fv, std::string(kF[j]) + "_bw",
                 collect(formant_contour(d.formants, j, true), voiced, Select::voiced));
  }

  fv.set_optional("jitter_local", d.jitter.local);
  fv.set_optional("shimmer_local", d.shimmer.local);
  fv.set_optional("HNR", d.hnr);
  fv.set("UVL_mean", d.voicing.uvl_mean);
  fv.set("VL_mean", d.voicing.vl_mean);
  fv.set("voiced_segs_per_sec", d.voicing.voiced_segments_per_sec);
  return fv;
}

FeatureVector extract_segment_features(const Pcm& audio, const DspParams& params) {
  SegmentDescriptors d = analyze_segment(audio, params);
  FeatureVector fv = functional_vector(d);
  FeatureVector af = af_vector(d);
  for (std::size_t i = 0; i < af.names().size(); ++i) {
    fv.set(af.names()[i], af.values()[i]);
  }
  return fv;
}

void fill_pf(std::vector<Sample>& samples) {
  static const char* kF[] = {"F1_mean", "F2_mean", "F3_mean", "F4_mean"};
  std::map<int, std::vector<std::size_t>> cohorts;
  for (std::size_t i = 0; i < samples.size(); ++i) cohorts[samples[i].age].push_back(i);

  for (auto& [age, idx] : cohorts) {
    std::vector<std::size_t> usable;
    for (std::size_t i : idx) {
      const auto& s = samples[i];
      if (!s.features) continue;
      bool ok = true;
      for (const char* name : kF) ok = ok && s.features->has(name);
      if (ok) usable.push_back(i);
    }
    if (usable.size() < 2) continue;

    FormantPopulationStats pop;
    pop.valid = true;
    bool degenerate = false;
    for (int j = 0; j < 4; ++j) {
      std::vector<double> v;
      v.reserve(usable.size());
      for (std::size_t i : usable) v.push_back(*samples[i].features->get(kF[j]));
      pop.mean[j] = mean_of(v);
      pop.std[j] = std::sqrt(variance_samp(v));
      if (pop.std[j] <= 0.0) degenerate = true;
    }
    if (degenerate) continue;  // pF stays missing for this cohort

    for (std::size_t i : usable) {
      double z = 0.0;
      for (int j = 0; j < 4; ++j) {
        z += (*samples[i].features->get(kF[j]) - pop.mean[j]) / pop.std[j];
      }
      samples[i].features->set("pF", z / 4.0);
    }
  }
}

namespace {

FeatureMatrix assemble(const std::vector<Sample>& samples,
                       const std::vector<std::string>& names, std::size_t* dropped,
                       bool enforce_min_class) {
  FeatureMatrix m;
  m.feature_names = names;
  std::size_t skipped = 0;
  for (const auto& s : samples) {
    if (!s.features) {
      ++skipped;
      continue;
    }
    std::vector<double> row;
    row.reserve(names.size());
    bool complete = true;
    for (const auto& name : names) {
      auto v = s.features->get(name);
      if (!v) {
        complete = false;
        break;
      }
      row.push_back(*v);
    }
    if (!complete) {
      ++skipped;
      continue;
    }
    SampleMeta meta;
    meta.subject_id = s.subject_id;
    meta.age = s.age;
    meta.sex = s.sex;
    meta.speech_type = s.speech_type;
    meta.segment_index = s.segment_index;
    m.meta.push_back(std::move(meta));
    m.data.insert(m.data.end(), row.begin(), row.end());
  }
  if (dropped) *dropped = skipped;
  if (enforce_min_class) {
    std::size_t nf = 0, nm = 0;
    for (const auto& meta : m.meta) (meta.sex == Sex::F ? nf : nm)++;
    if (nf < 10 || nm < 10) {
      throw DataError("insufficient data: " + std::to_string(nf) + " F rows and " +
                      std::to_string(nm) + " M rows after dropping incomplete samples");
    }
  }
  return m;
}

}  // namespace

FeatureMatrix assemble_matrix(const std::vector<Sample>& samples, FeatureSet set,
                              std::size_t* dropped) {
  return assemble(samples, inventory_for(set), dropped, true);
}

FeatureMatrix assemble_matrix_lenient(const std::vector<Sample>& samples, FeatureSet set,
                                      std::size_t* dropped) {
  return assemble(samples, inventory_for(set), dropped, false);
}

FeatureMatrix assemble_named(const std::vector<Sample>& samples,
                             const std::vector<std::string>& names, std::size_t* dropped) {
  return assemble(samples, names, dropped, false);
}

FeatureMatrix take_rows(const FeatureMatrix& x, const std::vector<std::size_t>& rows) {
  FeatureMatrix out;
  out.feature_names = x.feature_names;
  out.meta.reserve(rows.size());
  out.data.reserve(rows.size() * x.cols());
  for (std::size_t r : rows) {
    out.meta.push_back(x.meta[r]);
    out.data.insert(out.data.end(), x.row(r), x.row(r) + x.cols());
  }
  return out;
}

}  // namespace kidvox
