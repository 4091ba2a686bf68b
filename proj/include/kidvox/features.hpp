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

#ifndef KIDVOX_FEATURES_HPP_
#define KIDVOX_FEATURES_HPP_

#include <optional>
#include <string>
#include <vector>

#include "kidvox/corpus.hpp"
#include "kidvox/dsp.hpp"
#include "kidvox/feature_vector.hpp"

namespace kidvox {

enum class FeatureSet { AF, EG, EG_VTL };

std::string to_string(FeatureSet s);
FeatureSet parse_feature_set(const std::string& s);

// The canonical feature inventory: every name this library can emit, in
// the fixed order used by CSV columns and features.inventory.
const std::vector<std::string>& canonical_inventory();

// The names belonging to one feature set, in canonical order.
const std::vector<std::string>& inventory_for(FeatureSet set);

struct VtlFeatures {
  double fdisp = 0.0;      // (F4 - F1) / 3
  double avgF = 0.0;       // arithmetic mean of F1..F4
  double mff = 0.0;        // geometric mean of F1..F4
  double fitch_vtl = 0.0;  // c / (2 * fdisp), c = 35000 cm/s, in cm
  double delta_f = 0.0;    // regression-through-origin formant spacing
  std::optional<double> pF;  // mean per-formant z-score vs the cohort
};

struct FormantPopulationStats {
  // Cohort mean and standard deviation of mean F1..F4.
  double mean[4] = {0, 0, 0, 0};
  double std[4] = {0, 0, 0, 0};
  bool valid = false;
};

// Vocal-tract length estimators from mean formant frequencies. Requires
// 0 < F1 < F2 < F3 < F4; pF needs population stats with nonzero stds.
VtlFeatures vtl_vector(const double f[4], const FormantPopulationStats& pop);

// Identity of one matrix row.
struct SampleMeta {
  std::string subject_id;
  int age = 0;
  Sex sex = Sex::F;
  SpeechType speech_type = SpeechType::scripted;
  int segment_index = 0;
  bool synthetic = false;  // set by oversampling
};

// Dense rectangular feature matrix, row major.
struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::vector<SampleMeta> meta;
  std::vector<double> data;  // meta.size() x feature_names.size()

  std::size_t rows() const { return meta.size(); }
  std::size_t cols() const { return feature_names.size(); }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  const double* row(std::size_t r) const { return data.data() + r * cols(); }
};

// The 23-entry set: F0 mean/std, jitter and shimmer families, HNR,
// F1..F4 means, VTL estimators (without pF, which needs the cohort pass).
FeatureVector af_vector(const SegmentDescriptors& d);

// The eGeMAPS-style functional set: contour means/stds, F0 and loudness
// percentiles, voiced/unvoiced variants, temporal structure.
FeatureVector functional_vector(const SegmentDescriptors& d);

// Union of af_vector and functional_vector for one segment; pF left
// missing (filled by the cohort pass in the extraction pipeline).
FeatureVector extract_segment_features(const Pcm& audio, const DspParams& params);

// Fills pF for every sample that has all four formant means, using the
// age-year cohort statistics of the given sample list.
void fill_pf(std::vector<Sample>& samples);

// Rectangular matrix over the given set's inventory; rows missing any of
// the set's features are dropped (count reported via dropped). Raises
// DataError when fewer than 10 rows per class survive.
FeatureMatrix assemble_matrix(const std::vector<Sample>& samples, FeatureSet set,
                              std::size_t* dropped = nullptr);

// Same, but tolerates small classes (used by utility commands and tests).
FeatureMatrix assemble_matrix_lenient(const std::vector<Sample>& samples, FeatureSet set,
                                      std::size_t* dropped = nullptr);

// Matrix over an explicit column list (lenient), for consumers that carry
// their own inventory, like a saved model.
FeatureMatrix assemble_named(const std::vector<Sample>& samples,
                             const std::vector<std::string>& names,
                             std::size_t* dropped = nullptr);

// Row subset in the given order; shares feature_names.
FeatureMatrix take_rows(const FeatureMatrix& x, const std::vector<std::size_t>& rows);

}  // namespace kidvox

#endif  // KIDVOX_FEATURES_HPP_
