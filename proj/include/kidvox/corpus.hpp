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

#ifndef KIDVOX_CORPUS_HPP_
#define KIDVOX_CORPUS_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kidvox/audio.hpp"
#include "kidvox/feature_vector.hpp"

namespace kidvox {

enum class Sex { F, M };                       // canonical order: F first
enum class SpeechType { scripted, spontaneous };
enum class Quality { good, questionable, bad, na };

std::string to_string(Sex s);
std::string to_string(SpeechType t);
std::string to_string(Quality q);
Sex parse_sex(const std::string& s);
SpeechType parse_speech_type(const std::string& s);
Quality parse_quality(const std::string& s);

struct ManifestEntry {
  std::string subject_id;
  int age = 0;  // whole years, 5..15
  Sex sex = Sex::F;
  SpeechType speech_type = SpeechType::scripted;
  Quality quality = Quality::na;
  std::string audio_path;
};

// One utterance or 5-second slice of one. Carries either audio or a
// precomputed FeatureVector; downstream stages only need the vector.
struct Sample {
  std::string subject_id;
  int age = 0;
  Sex sex = Sex::F;
  SpeechType speech_type = SpeechType::scripted;
  int segment_index = 0;
  std::optional<Pcm> audio;
  std::optional<FeatureVector> features;
};

struct AgeGroup {
  std::string label;
  std::vector<int> ages;  // sorted, each in [5, 15]
};

enum class Grouping { per_year, per_band };

// Reads the manifest CSV (header: subject_id,age,sex,speech_type,quality,
// audio_path). Order preserved; malformed rows raise DataError with the
// line number; age must be in [5, 15].
std::vector<ManifestEntry> load_manifest(const std::string& path);

// Keeps rows rated good. Spontaneous rows carry no rating (quality `na`)
// and always pass.
std::vector<ManifestEntry> filter_quality(const std::vector<ManifestEntry>& entries);

// Consecutive non-overlapping windows from time 0. The trailing remainder
// is kept as a shorter final segment iff it is at least window/2 long.
std::vector<Pcm> segment_pcm(const Pcm& audio, double window_s);

// segment_pcm plus sample identity; segment_index counts from 0.
std::vector<Sample> segment_recording(const ManifestEntry& entry, const Pcm& audio,
                                      double window_s = 5.0);

// Age-year groups, or the three bands 5-8 / 9-12 / 13-15. Only non-empty
// groups appear; every sample lands in exactly one group. Returned in
// ascending age order as indices into `samples`.
std::vector<std::pair<AgeGroup, std::vector<std::size_t>>> group_samples(
    const std::vector<Sample>& samples, Grouping mode);

// Feature CSV: header subject_id,age,sex,speech_type,segment_index followed
// by feature names; missing features are empty cells.
void write_feature_csv(const std::string& path, const std::vector<Sample>& samples,
                       const std::vector<std::string>& feature_names);
std::vector<Sample> load_feature_csv(const std::string& path);

}  // namespace kidvox

#endif  // KIDVOX_CORPUS_HPP_
