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

#ifndef KIDVOX_RUNNER_HPP_
#define KIDVOX_RUNNER_HPP_

#include <string>
#include <vector>

#include "kidvox/clustering.hpp"
#include "kidvox/config.hpp"
#include "kidvox/corpus.hpp"
#include "kidvox/eval.hpp"
#include "kidvox/model.hpp"

namespace kidvox {

struct ExtractOutcome {
  std::vector<Sample> samples;
  std::vector<std::string> log;  // one line per manifest row, plus skips
};

// Quality filter, WAV decode, segmentation, per-segment analysis (in
// parallel, canonical order), the cohort pass, and the extraction log.
// Unreadable audio skips the row unless cfg.strict is set.
ExtractOutcome extract_corpus(const std::vector<ManifestEntry>& entries, const RunConfig& cfg);

struct ImportanceRow {
  std::string factor;
  std::vector<std::string> members;
  double weight = 0.0;
};

// One (group, feature set, speech type, raw-or-factors) experiment.
struct CellScore {
  std::string group;
  FeatureSet set = FeatureSet::AF;
  SpeechFilter speech = SpeechFilter::both;
  bool clustered = false;

  bool insufficient = false;
  std::string note;  // reason when insufficient

  // Subject-level scores from the outer cross-validation.
  double f1_girls = 0.0, f1_boys = 0.0, mean_f1 = 0.0;
  int vote_ties = 0;
  std::vector<SubjectResult> subjects;

  // Full-data refit: reported importance and serialized artifacts.
  ErfParams chosen;
  int n_factors = 0;  // clustered cells only
  FactorSet factors;  // clustered cells only
  Forest forest;
  std::vector<ImportanceRow> importance_rows;  // weight descending
};

struct ExperimentReport {
  std::vector<CellScore> cells;  // canonical order: group, set, speech, raw/factors
  std::vector<StatsRow> stats;
};

// Every requested cell: assemble the group matrix, optionally fit factors
// on the training portion, tune by inner cross-validation, score held-out
// subjects via the outer subject-grouped folds, then refit on the whole
// cell for the reported importance. Cells below 10 subjects per class are
// marked insufficient and skipped; the run continues.
ExperimentReport run_experiment(const std::vector<Sample>& samples, const RunConfig& cfg);

// scores.csv, importance.csv, stats.csv, report.json, and the per-cell
// factor/forest JSON artifacts, all under cfg.output_dir. Files are
// written to temporary names and renamed into place.
void write_experiment_outputs(const ExperimentReport& report, const RunConfig& cfg);

// Fixed-width scores table for the terminal.
std::string scores_table(const ExperimentReport& report);

// stats.csv content (header age,feature,t,p,d,band; NA for undefined).
std::string stats_csv(const std::vector<StatsRow>& rows);

// Atomic text-file write (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace kidvox

#endif  // KIDVOX_RUNNER_HPP_
