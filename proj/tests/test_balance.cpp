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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "kidvox/balance.hpp"
#include "kidvox/errors.hpp"
#include "kidvox/rng.hpp"

using namespace kidvox;

namespace {

FeatureMatrix matrix_2d(const std::vector<std::pair<double, double>>& pts,
                        const std::vector<Sex>& sexes) {
  FeatureMatrix x;
  x.feature_names = {"u", "v"};
  x.meta.resize(pts.size());
  x.data.resize(pts.size() * 2);
  int nf = 0, nm = 0;
  for (std::size_t r = 0; r < pts.size(); ++r) {
    x.meta[r].sex = sexes[r];
    x.meta[r].subject_id = (sexes[r] == Sex::F ? "F" + std::to_string(nf++)
                                               : "M" + std::to_string(nm++));
    x.meta[r].age = 5 + static_cast<int>(r % 11);
    x.meta[r].segment_index = static_cast<int>(r);
    x.at(r, 0) = pts[r].first;
    x.at(r, 1) = pts[r].second;
  }
  return x;
}

FeatureMatrix overlapping_classes(std::uint64_t seed, std::size_t n_major,
                                  std::size_t n_minor) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> pts;
  std::vector<Sex> sexes;
  for (std::size_t i = 0; i < n_major; ++i) {
    pts.emplace_back(rng.gaussian(), rng.gaussian());
    sexes.push_back(Sex::M);
  }
  for (std::size_t i = 0; i < n_minor; ++i) {
    pts.emplace_back(2.0 + rng.gaussian(), rng.gaussian());
    sexes.push_back(Sex::F);
  }
  return matrix_2d(pts, sexes);
}

// Independent re-derivation of the neighborhood rules.
namespace oracle {

double sq_dist(const FeatureMatrix& x, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double d = x.at(a, c) - x.at(b, c);
    s += d * d;
  }
  return s;
}

std::vector<std::size_t> knn(const FeatureMatrix& x, std::size_t self,
                             const std::vector<std::size_t>& candidates, int k) {
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t j : candidates) {
    if (j != self) order.emplace_back(sq_dist(x, self, j), j);
  }
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> out;
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  for (std::size_t i = 0; i < keep; ++i) out.push_back(order[i].second);
  return out;
}

struct Plan {
  Sex minority_sex = Sex::F;
  std::vector<std::size_t> minority;
  std::vector<std::size_t> sources;  // danger rows, or all minority as fallback
  std::size_t need = 0;
};

Plan plan_for(const FeatureMatrix& x, int k) {
  Plan plan;
  std::vector<std::size_t> fem, mal;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    (x.meta[r].sex == Sex::F ? fem : mal).push_back(r);
  }
  REQUIRE(fem.size() != mal.size());
  plan.minority = fem.size() < mal.size() ? fem : mal;
  plan.minority_sex = fem.size() < mal.size() ? Sex::F : Sex::M;
  plan.need = std::max(fem.size(), mal.size()) - plan.minority.size();

  std::vector<std::size_t> all(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) all[r] = r;
  for (std::size_t p : plan.minority) {
    int majority = 0;
    for (std::size_t j : knn(x, p, all, k)) {
      if (x.meta[j].sex != plan.minority_sex) ++majority;
    }
    if (2 * majority >= k && majority < k) plan.sources.push_back(p);
  }
  if (plan.sources.empty()) plan.sources = plan.minority;
  return plan;
}

double dist_to_segment(const FeatureMatrix& out, std::size_t z, const FeatureMatrix& x,
                       std::size_t a, std::size_t b) {
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double ab = x.at(b, c) - x.at(a, c);
    num += (out.at(z, c) - x.at(a, c)) * ab;
    den += ab * ab;
  }
  double t = den > 0.0 ? num / den : 0.0;
  t = std::min(1.0, std::max(0.0, t));
  double s = 0.0;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double w = x.at(a, c) + t * (x.at(b, c) - x.at(a, c)) - out.at(z, c);
    s += w * w;
  }
  return std::sqrt(s);
}

}  // namespace oracle

// Full contract check for one run: counts, verbatim originals, synthetic
// identity via the round-robin source schedule, and segment geometry.
void check_smote_contract(const FeatureMatrix& x, int k, std::uint64_t seed) {
  const FeatureMatrix out = borderline_smote(x, k, seed);
  const oracle::Plan plan = oracle::plan_for(x, k);

  REQUIRE(out.rows() == x.rows() + plan.need);
  CHECK(out.feature_names == x.feature_names);

  std::size_t nf = 0, nm = 0;
  for (const auto& meta : out.meta) (meta.sex == Sex::F ? nf : nm)++;
  CHECK(nf == nm);

  // Originals first, bit for bit, never marked synthetic.
  CHECK(std::equal(x.data.begin(), x.data.end(), out.data.begin()));
  for (std::size_t r = 0; r < x.rows(); ++r) {
    CHECK(out.meta[r].subject_id == x.meta[r].subject_id);
    CHECK(out.meta[r].sex == x.meta[r].sex);
    CHECK(out.meta[r].age == x.meta[r].age);
    CHECK(out.meta[r].segment_index == x.meta[r].segment_index);
    CHECK(!out.meta[r].synthetic);
  }

  for (std::size_t s = 0; s < plan.need; ++s) {
    const std::size_t z = x.rows() + s;
    const std::size_t p = plan.sources[s % plan.sources.size()];
    CHECK(out.meta[z].synthetic);
    CHECK(out.meta[z].sex == plan.minority_sex);
    // Synthetic rows carry the identity of their round-robin source.
    CHECK(out.meta[z].subject_id == x.meta[p].subject_id);
    CHECK(out.meta[z].age == x.meta[p].age);

    // The row lies on a segment from the source to one of its k nearest
    // minority neighbors.
    double best = 1e300;
    for (std::size_t q : oracle::knn(x, p, plan.minority, k)) {
      best = std::min(best, oracle::dist_to_segment(out, z, x, p, q));
    }
    CHECK(best <= 1e-9);
  }
}

}  // namespace

TEST_CASE("balanced input is returned unchanged") {
  const FeatureMatrix x = [&] {
    Rng rng(3);
    std::vector<std::pair<double, double>> pts;
    std::vector<Sex> sexes;
    for (int i = 0; i < 20; ++i) {
      pts.emplace_back(rng.gaussian(), rng.gaussian());
      sexes.push_back(i < 10 ? Sex::F : Sex::M);
    }
    return matrix_2d(pts, sexes);
  }();
  const FeatureMatrix out = borderline_smote(x, 5, 42);
  CHECK(out.rows() == x.rows());
  CHECK(out.data == x.data);
  for (const auto& meta : out.meta) CHECK(!meta.synthetic);
}

TEST_CASE("oversampling balances classes and preserves originals verbatim") {
  const FeatureMatrix x = overlapping_classes(17, 40, 15);
  check_smote_contract(x, 5, 2024);

  const FeatureMatrix out = borderline_smote(x, 5, 2024);
  CHECK(out.rows() == 80);
  std::size_t synth = 0;
  for (const auto& meta : out.meta) synth += meta.synthetic ? 1 : 0;
  CHECK(synth == 25);
}

TEST_CASE("synthetic rows satisfy the segment geometry across seeds") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CAPTURE(seed);
    const FeatureMatrix x = overlapping_classes(500 + seed, 30, 12);
    check_smote_contract(x, 5, 9000 + seed);
  }
}

TEST_CASE("oversampling is deterministic in the seed") {
  const FeatureMatrix x = overlapping_classes(8, 25, 10);
  const FeatureMatrix a = borderline_smote(x, 5, 1);
  const FeatureMatrix b = borderline_smote(x, 5, 1);
  const FeatureMatrix c = borderline_smote(x, 5, 2);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
  CHECK(a.rows() == c.rows());
}

TEST_CASE("the danger rule spares interior clusters and skips noise points") {
  // One dimension, integer coordinates so every distance is exact.
  // Minority: 0, 1, 2 (a far cluster), 100 (engulfed by majority = noise),
  // 97 (boundary = danger). Majority: 3, 4, 98, 99, 101, 102, 200, 201.
  std::vector<std::pair<double, double>> pts;
  std::vector<Sex> sexes;
  for (double v : {0.0, 1.0, 2.0, 100.0, 97.0}) {
    pts.emplace_back(v, 0.0);
    sexes.push_back(Sex::F);
  }
  for (double v : {3.0, 4.0, 98.0, 99.0, 101.0, 102.0, 200.0, 201.0}) {
    pts.emplace_back(v, 0.0);
    sexes.push_back(Sex::M);
  }
  const FeatureMatrix x = matrix_2d(pts, sexes);

  const oracle::Plan plan = oracle::plan_for(x, 3);
  REQUIRE(plan.sources.size() == 1);
  CHECK(plan.sources[0] == 4);  // the row holding value 97

  // need = 8 - 5 = 3 synthetic rows, all sourced from the danger point.
  const FeatureMatrix out = borderline_smote(x, 3, 77);
  REQUIRE(out.rows() == 16);
  for (std::size_t z = 13; z < 16; ++z) {
    CHECK(out.meta[z].subject_id == x.meta[4].subject_id);
    CHECK(out.meta[z].synthetic);
  }
  check_smote_contract(x, 3, 77);
}

TEST_CASE("an empty danger set falls back to the whole minority class") {
  // As above but without the boundary point: the far cluster is safe and
  // the engulfed point is noise, so nothing is in danger.
  std::vector<std::pair<double, double>> pts;
  std::vector<Sex> sexes;
  for (double v : {0.0, 1.0, 2.0, 100.0}) {
    pts.emplace_back(v, 0.0);
    sexes.push_back(Sex::F);
  }
  for (double v : {3.0, 4.0, 98.0, 99.0, 101.0, 102.0, 200.0, 201.0}) {
    pts.emplace_back(v, 0.0);
    sexes.push_back(Sex::M);
  }
  const FeatureMatrix x = matrix_2d(pts, sexes);

  const oracle::Plan plan = oracle::plan_for(x, 3);
  CHECK(plan.sources == plan.minority);

  // Four synthetics, round-robin across all four minority rows in order.
  const FeatureMatrix out = borderline_smote(x, 3, 5);
  REQUIRE(out.rows() == 16);
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(out.meta[12 + s].subject_id == x.meta[s].subject_id);
  }
  check_smote_contract(x, 3, 5);
}

TEST_CASE("oversampling validates its inputs") {
  const FeatureMatrix x = overlapping_classes(1, 10, 3);
  CHECK_THROWS_AS(borderline_smote(x, 0, 1), ConfigError);
  CHECK_THROWS_AS(borderline_smote(x, -2, 1), ConfigError);
  CHECK_THROWS_WITH_AS(borderline_smote(x, 3, 1),
                       doctest::Contains("insufficient minority samples"), DataError);
  CHECK_THROWS_WITH_AS(borderline_smote(x, 3, 1), doctest::Contains("need at least 4"),
                       DataError);
  // k + 1 minority rows is exactly enough.
  const FeatureMatrix ok = overlapping_classes(2, 10, 4);
  CHECK_NOTHROW(borderline_smote(ok, 3, 1));
}
