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

#ifndef KIDVOX_CLUSTERING_HPP_
#define KIDVOX_CLUSTERING_HPP_

#include <string>
#include <vector>

#include "kidvox/features.hpp"

namespace kidvox {

// One cluster of correlated features, represented on the fitting data by
// the first principal component of its z-scored members.
struct Factor {
  std::vector<std::string> members;  // canonical order
  std::vector<double> means;         // fitting-data member means
  std::vector<double> stds;          // fitting-data member stds
  std::vector<double> loadings;      // unit norm; singletons use {1}
  std::string sign_anchor;           // first member; scores correlate >= 0 with it

  bool singleton() const { return members.size() == 1; }
};

struct FactorSet {
  double cutoff = 0.75;
  std::vector<std::string> feature_names;  // inventory the fit saw
  std::vector<Factor> factors;
};

// Stable display name: the member itself for singletons, otherwise
// "cluster_" + the anchor feature.
std::string factor_name(const Factor& f);

// Pearson correlation of every column pair; m x m row-major, unit
// diagonal. Columns must be non-constant.
std::vector<double> correlation_matrix(const FeatureMatrix& x);

namespace serial {
std::vector<double> correlation_matrix(const FeatureMatrix& x);
}

// Largest absolute off-diagonal entry of a square matrix.
double max_abs_offdiag(const std::vector<double>& m, std::size_t n);

// Agglomerative merging of the most-correlated object pair until all
// pairwise |r| fall to the cutoff or below. Merged objects are replaced by
// the first principal component of the z-scored union of their ORIGINAL
// member features. Constant columns are set aside first (reported via
// `dropped_constant`) as Pearson r is undefined for them.
FactorSet cluster_features(const FeatureMatrix& x, double cutoff = 0.75,
                           std::vector<std::string>* dropped_constant = nullptr);

// Projects rows onto the factors, z-scoring members with the fitting
// data's statistics. Missing member features raise DataError naming them.
FeatureMatrix transform(const FeatureMatrix& x, const FactorSet& fs);

// JSON round trip; saving then loading reproduces bit-identical factors.
std::string factor_set_to_json(const FactorSet& fs);
FactorSet factor_set_from_json(const std::string& text);
void save_factor_set(const std::string& path, const FactorSet& fs);
FactorSet load_factor_set(const std::string& path);

}  // namespace kidvox

#endif  // KIDVOX_CLUSTERING_HPP_
