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

#ifndef KIDVOX_EVAL_HPP_
#define KIDVOX_EVAL_HPP_

#include <optional>
#include <string>
#include <vector>

#include "kidvox/corpus.hpp"
#include "kidvox/model.hpp"

namespace kidvox {

struct F1Result {
  // Undefined when the class occurs in neither truth nor prediction;
  // undefined classes are excluded from both means.
  std::optional<double> f1_f, f1_m;
  double mean_f1 = 0.0;      // unweighted mean over defined classes
  double weighted_f1 = 0.0;  // true-support-weighted mean
};

// Per-class precision/recall F1. A class with no true positives but some
// false positives or negatives scores 0.
F1Result f1_per_class(const std::vector<Sex>& y_true, const std::vector<Sex>& y_pred);

struct SamplePrediction {
  std::string subject_id;
  Sex truth = Sex::F;
  Prediction pred;
};

struct SubjectResult {
  std::string subject_id;
  Sex truth = Sex::F;
  Sex label = Sex::F;
  bool tie_flagged = false;  // exact tie resolved to F by canonical order
};

// Majority vote over each subject's sample predictions. Vote ties fall
// back to the higher mean vote fraction, then to F (flagged). Subjects
// are returned in first-appearance order.
std::vector<SubjectResult> subject_vote(const std::vector<SamplePrediction>& samples);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-tailed
};

// Unequal-variance t test of a (girls) against b (boys); positive t means
// the first sample's mean is larger.
WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

// Continued-fraction regularized incomplete beta I_x(a, b).
double reg_incomplete_beta(double a, double b, double x);

// Two-tailed p of a t statistic: I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_tailed_p(double t, double df);

struct CohensD {
  double d = 0.0;
  std::string band;  // small, small-medium, medium-large, large
};

CohensD cohens_d(const std::vector<double>& a, const std::vector<double>& b);
std::string effect_band(double d);

struct StatsRow {
  int age = 0;
  std::string feature;
  bool defined = false;  // false rows print NA in every statistic column
  double t = 0.0, p = 1.0, d = 0.0;
  std::string band;
};

// Per (age year, feature): girls-vs-boys Welch t, p, Cohen's d, and the
// effect band, over per-sample feature values. Ages with fewer than two
// usable values per sex (or no variance at all) yield NA rows. An empty
// `ages` selects every age present, ascending; an explicit list keeps its
// order and skips ages with no samples.
std::vector<StatsRow> stats_by_age(const std::vector<Sample>& samples,
                                   const std::vector<int>& ages,
                                   const std::vector<std::string>& features);

}  // namespace kidvox

#endif  // KIDVOX_EVAL_HPP_
