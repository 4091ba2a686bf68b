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

#include "kidvox/balance.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kidvox/errors.hpp"
#include "kidvox/rng.hpp"

namespace kidvox {
namespace {

double sq_dist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Indices of the k nearest rows to `self` among `candidates`, excluding
// `self` itself. Ties break on the smaller row index so the result does
// not depend on sort internals.
std::vector<std::size_t> k_nearest(const FeatureMatrix& x, std::size_t self,
                                   const std::vector<std::size_t>& candidates, int k) {
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(candidates.size());
  for (std::size_t j : candidates) {
    if (j == self) continue;
    order.emplace_back(sq_dist(x.row(self), x.row(j), x.cols()), j);
  }
  std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                    order.end());
  std::vector<std::size_t> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(order[i].second);
  return out;
}

}  // namespace

FeatureMatrix borderline_smote(const FeatureMatrix& x, int k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("smote k must be >= 1");
  std::vector<std::size_t> fem, mal;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    (x.meta[r].sex == Sex::F ? fem : mal).push_back(r);
  }
  if (fem.size() == mal.size()) return x;

  const std::vector<std::size_t>& minority = fem.size() < mal.size() ? fem : mal;
  const Sex minority_sex = fem.size() < mal.size() ? Sex::F : Sex::M;
  std::size_t need = (fem.size() < mal.size() ? mal.size() : fem.size()) - minority.size();

  if (minority.size() < static_cast<std::size_t>(k) + 1) {
    throw DataError("insufficient minority samples for oversampling: have " +
                    std::to_string(minority.size()) + ", need at least " +
                    std::to_string(k + 1));
  }

  std::vector<std::size_t> all(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) all[r] = r;

  // A minority point is in danger when m' of its k nearest neighbors over
  // the whole data are majority, with k/2 <= m' < k. m' == k is noise.
  std::vector<std::size_t> danger;
  for (std::size_t p : minority) {
    std::vector<std::size_t> nn = k_nearest(x, p, all, k);
    int majority_count = 0;
    for (std::size_t j : nn) {
      if (x.meta[j].sex != minority_sex) ++majority_count;
    }
    if (2 * majority_count >= k && majority_count < k) danger.push_back(p);
  }
  const std::vector<std::size_t>& sources = danger.empty() ? minority : danger;

  // Each source's interpolation partners are its k nearest minority
  // neighbors, fixed up front so generation order is the only use of RNG.
  std::vector<std::vector<std::size_t>> partners(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    partners[i] = k_nearest(x, sources[i], minority, k);
  }

  FeatureMatrix out;
  out.feature_names = x.feature_names;
  out.meta = x.meta;
  out.data = x.data;
  out.meta.reserve(x.rows() + need);
  out.data.reserve((x.rows() + need) * x.cols());

  Rng rng(seed);
  for (std::size_t s = 0; s < need; ++s) {
    std::size_t i = s % sources.size();
    std::size_t p = sources[i];
    const std::vector<std::size_t>& nb = partners[i];
    std::size_t q = nb[rng.below(nb.size())];
    double u = rng.uniform01();
    SampleMeta meta = x.meta[p];
    meta.synthetic = true;
    out.meta.push_back(std::move(meta));
    for (std::size_t c = 0; c < x.cols(); ++c) {
      out.data.push_back(x.at(p, c) + u * (x.at(q, c) - x.at(p, c)));
    }
  }
  return out;
}

}  // namespace kidvox
