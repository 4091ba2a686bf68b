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

#ifndef KIDVOX_MODEL_HPP_
#define KIDVOX_MODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "kidvox/features.hpp"

namespace kidvox {

struct ErfParams {
  int n_trees = 100;
  // Candidate features drawn per node; 0 means floor(sqrt(n_features)),
  // -1 means all features.
  int k_candidates = 0;
  int min_samples_split = 2;
  int max_depth = -1;  // -1 = unlimited
  std::uint64_t seed = 0;

  bool operator==(const ErfParams&) const = default;
};

std::string k_candidates_to_string(int k);
int parse_k_candidates(const std::string& s);

// One unpruned decision tree as parallel flat arrays. feature[i] < 0 marks
// a leaf. Class counts are kept at every node so impurity decreases can be
// recomputed from the serialized form alone.
struct Tree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<std::int64_t> count_f;
  std::vector<std::int64_t> count_m;

  std::size_t size() const { return feature.size(); }
};

struct Forest {
  ErfParams params;
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;
};

struct Prediction {
  Sex label = Sex::F;
  double vote_f = 0.0;  // fraction of trees voting F
  double vote_m = 0.0;
};

// Fits n_trees fully grown trees, each on the whole training set. Node
// splits draw k candidate features without replacement and one uniform
// threshold strictly inside each candidate's (min, max); the split with
// the largest Gini decrease wins, earlier draw on ties. A node becomes a
// leaf when pure, smaller than min_samples_split, at max_depth, or when
// no drawn candidate varies. Per-tree seeds derive from params.seed, so
// the result does not depend on scheduling.
Forest train_erf(const FeatureMatrix& x, const ErfParams& params);

namespace serial {
Forest train_erf(const FeatureMatrix& x, const ErfParams& params);
}

// Majority vote across trees; each tree votes its leaf's majority class.
// All ties resolve to F (the lower canonical class index).
Prediction predict(const Forest& f, const double* row);
std::vector<Prediction> predict_batch(const Forest& f, const FeatureMatrix& x);

// Mean decrease in impurity: per tree the n_node/n_root-weighted Gini
// decreases are summed per feature, averaged across trees, and normalized
// to sum 1. Features never split on get weight 0.
std::vector<double> importance(const Forest& f);

struct GridResult {
  ErfParams best;
  std::size_t best_index = 0;
  // Mean weighted F1 over folds x repeats, per grid entry. Only filled
  // when cross-validation actually ran (a singleton grid skips it).
  std::vector<double> mean_scores;
  bool evaluated = false;
};

// Exhaustive search over the grid under repeated stratified cross-
// validation with subject-grouped folds. Oversampling (if smote_k > 0) is
// applied to training folds only. Ties go to the earliest grid entry.
GridResult grid_search(const FeatureMatrix& x, const std::vector<ErfParams>& grid,
                       int folds, int repeats, std::uint64_t seed, int smote_k);

// Subject-grouped stratified fold ids (one per row), dealing shuffled
// subjects round-robin within each class. Raises DataError when a class
// has fewer subjects than folds.
std::vector<int> grouped_folds(const FeatureMatrix& x, int folds, std::uint64_t seed);

std::string forest_to_json(const Forest& f);
Forest forest_from_json(const std::string& text);

}  // namespace kidvox

#endif  // KIDVOX_MODEL_HPP_
