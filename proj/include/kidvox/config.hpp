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

#ifndef KIDVOX_CONFIG_HPP_
#define KIDVOX_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kidvox/corpus.hpp"
#include "kidvox/dsp.hpp"
#include "kidvox/features.hpp"
#include "kidvox/model.hpp"

namespace kidvox {

// Which speech material an experiment cell uses.
enum class SpeechFilter { scripted, spontaneous, both };

std::string to_string(SpeechFilter f);
SpeechFilter parse_speech_filter(const std::string& s);
bool speech_matches(SpeechFilter f, SpeechType t);

// Everything a run needs, resolved from defaults, the config file, and
// command-line overrides (in that order; later wins). All randomness
// derives from `seed`; nothing reads the clock.
struct RunConfig {
  std::string manifest;
  std::string features_csv;
  std::string output_dir = "out";
  std::string model_path;    // evaluate/importance input
  std::string factors_path;  // evaluate input (optional)

  std::vector<FeatureSet> feature_sets = {FeatureSet::EG_VTL};
  Grouping grouping = Grouping::per_year;
  std::vector<SpeechFilter> speech_types = {SpeechFilter::both};
  std::vector<bool> clustering = {false, true};  // false = raw, true = factors
  double cutoff = 0.75;

  bool smote = true;
  int smote_k = 5;

  std::vector<int> grid_n_trees = {100, 300};
  std::vector<int> grid_k = {0, -1};  // sqrt, all
  std::vector<int> grid_min_split = {2, 10};
  int grid_max_depth = -1;

  int folds = 5;
  int repeats = 5;
  std::uint64_t seed = 1;
  int jobs = 0;  // 0 = runtime default
  bool strict = false;

  double segment_window_s = 5.0;
  std::vector<int> stats_ages;  // empty = all present
  DspParams dsp;

  // Cartesian product in documented order: n_trees outermost, then
  // candidate count, then min_samples_split. Earliest entry wins ties.
  std::vector<ErfParams> make_grid() const;
};

// Flat `key = value` file; '#' lines are comments. Unknown keys are
// configuration errors.
RunConfig load_config(const std::string& path);

// Applies one key=value pair (the --set flag and the config file share
// this path).
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// Range and consistency checks; called after all overrides.
void validate_config(const RunConfig& cfg);

// The resolved configuration as ordered key/value pairs (report echo).
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

}  // namespace kidvox

#endif  // KIDVOX_CONFIG_HPP_
