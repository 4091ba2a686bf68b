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
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "kidvox/clustering.hpp"
#include "kidvox/errors.hpp"
#include "kidvox/rng.hpp"
#include "test_util.hpp"

using namespace kidvox;
namespace tu = kidvox::testutil;

namespace {

FeatureMatrix matrix_from_cols(const std::vector<std::vector<double>>& cols,
                               std::vector<std::string> names) {
  FeatureMatrix x;
  x.feature_names = std::move(names);
  const std::size_t n = cols.front().size();
  x.meta.resize(n);
  for (std::size_t r = 0; r < n; ++r) x.meta[r].subject_id = "s" + std::to_string(r);
  x.data.assign(n * cols.size(), 0.0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t r = 0; r < n; ++r) x.at(r, c) = cols[c][r];
  }
  return x;
}

std::vector<double> column_of(const FeatureMatrix& x, std::size_t c) {
  std::vector<double> v(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) v[r] = x.at(r, c);
  return v;
}

std::size_t column_index(const FeatureMatrix& x, const std::string& name) {
  auto it = std::find(x.feature_names.begin(), x.feature_names.end(), name);
  REQUIRE(it != x.feature_names.end());
  return static_cast<std::size_t>(it - x.feature_names.begin());
}

// Random matrix with planted correlated blocks: the first six columns load
// on three shared latent variables with mixing strong enough to straddle
// the merge cutoff, the last four are independent noise. Columns carry
// random offsets and scales so z-scoring is actually exercised.
FeatureMatrix planted_matrix(std::uint64_t seed, std::size_t n = 200, std::size_t m = 10) {
  Rng rng(seed);
  std::array<std::vector<double>, 3> latent;
  for (auto& l : latent) {
    l.resize(n);
    for (double& v : l) v = rng.gaussian();
  }
  std::vector<std::vector<double>> cols(m, std::vector<double>(n));
  std::vector<std::string> names(m);
  for (std::size_t c = 0; c < m; ++c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "c%02zu", c);
    names[c] = buf;
    const double mu = -5.0 + 10.0 * rng.uniform01();
    const double scale = 0.5 + 4.0 * rng.uniform01();
    if (c < 6) {
      const double a = 0.80 + 0.17 * rng.uniform01();
      const double b = std::sqrt(1.0 - a * a);
      const auto& l = latent[c % 3];
      for (std::size_t r = 0; r < n; ++r) {
        cols[c][r] = (a * l[r] + b * rng.gaussian()) * scale + mu;
      }
    } else {
      for (std::size_t r = 0; r < n; ++r) cols[c][r] = rng.gaussian() * scale + mu;
    }
  }
  return matrix_from_cols(cols, names);
}

// Independent re-implementation of the agglomerative merge contract, used
// as a brute-force oracle. The dominant eigenvector comes from multi-start
// power iteration rather than the library's rotation method.
namespace oracle {

double vmean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_pop(const std::vector<double>& v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = vmean(a);
  const double mb = vmean(b);
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    num += da * db;
    va += da * da;
    vb += db * db;
  }
  const double den = std::sqrt(va * vb);
  return den > 0.0 ? num / den : 0.0;
}

std::vector<double> pc1(const std::vector<double>& a, std::size_t m, Rng& rng) {
  if (m == 1) return {1.0};
  auto mat_vec = [&](const std::vector<double>& x) {
    std::vector<double> y(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) y[i] += a[i * m + j] * x[j];
    }
    return y;
  };
  auto norm2 = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  };
  std::vector<std::vector<double>> starts;
  starts.emplace_back(m, 1.0);
  {
    std::vector<double> e(m, 0.0);
    e[0] = 1.0;
    starts.push_back(std::move(e));
  }
  {
    std::vector<double> r(m);
    for (double& v : r) v = rng.gaussian();
    starts.push_back(std::move(r));
  }
  std::vector<double> best;
  double best_lambda = -1e300;
  for (auto x : starts) {
    const double nx = norm2(x);
    if (!(nx > 0.0)) continue;
    for (double& v : x) v /= nx;
    bool dead = false;
    for (int it = 0; it < 500 && !dead; ++it) {
      const auto y = mat_vec(x);
      const double ny = norm2(y);
      if (ny < 1e-250) {
        dead = true;
      } else {
        for (std::size_t k = 0; k < m; ++k) x[k] = y[k] / ny;
      }
    }
    if (dead) continue;
    const auto ax = mat_vec(x);
    double lambda = 0.0;
    for (std::size_t k = 0; k < m; ++k) lambda += x[k] * ax[k];
    if (lambda > best_lambda) {
      best_lambda = lambda;
      best = x;
    }
  }
  REQUIRE(!best.empty());
  return best;
}

struct Obj {
  std::vector<std::size_t> members;  // ascending surviving-column indices
  std::vector<double> loadings;
  std::vector<double> scores;
};

struct Result {
  std::vector<std::string> names;
  std::vector<std::string> dropped;
  std::vector<std::vector<double>> col;
  std::vector<double> mean, sd;
  std::vector<Obj> factors;
};

Obj make_obj(const Result& fit, std::vector<std::size_t> members,
             const std::vector<double>& corr, std::size_t m_total, Rng& rng) {
  Obj o;
  o.members = std::move(members);
  const std::size_t k = o.members.size();
  std::vector<double> sub(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      sub[i * k + j] = corr[o.members[i] * m_total + o.members[j]];
    }
  }
  o.loadings = pc1(sub, k, rng);
  const std::size_t n = fit.col.front().size();
  o.scores.assign(n, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t c = o.members[i];
    const double w = o.loadings[i];
    for (std::size_t r = 0; r < n; ++r) {
      o.scores[r] += w * (fit.col[c][r] - fit.mean[c]) / fit.sd[c];
    }
  }
  if (pearson(o.scores, fit.col[o.members[0]]) < 0.0) {
    for (double& w : o.loadings) w = -w;
    for (double& s : o.scores) s = -s;
  }
  return o;
}

Result cluster(const FeatureMatrix& x, double cutoff, std::uint64_t pc_seed) {
  Rng rng(pc_seed);
  Result fit;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    std::vector<double> col = column_of(x, c);
    const double m = vmean(col);
    const double s = sd_pop(col, m);
    if (s <= 0.0) {
      fit.dropped.push_back(x.feature_names[c]);
      continue;
    }
    fit.col.push_back(std::move(col));
    fit.mean.push_back(m);
    fit.sd.push_back(s);
    fit.names.push_back(x.feature_names[c]);
  }
  const std::size_t m = fit.col.size();
  REQUIRE(m > 0);

  std::vector<double> corr(m * m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double r = pearson(fit.col[i], fit.col[j]);
      corr[i * m + j] = r;
      corr[j * m + i] = r;
    }
  }

  std::vector<Obj> pool;
  pool.reserve(m);
  for (std::size_t c = 0; c < m; ++c) pool.push_back(make_obj(fit, {c}, corr, m, rng));

  std::vector<std::vector<double>> pr(m, std::vector<double>(m, 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double r = pearson(pool[i].scores, pool[j].scores);
      pr[i][j] = r;
      pr[j][i] = r;
    }
  }

  while (pool.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        if (std::abs(pr[i][j]) > best) {
          best = std::abs(pr[i][j]);
          bi = i;
          bj = j;
        }
      }
    }
    if (best <= cutoff) break;

    std::vector<std::size_t> merged = pool[bi].members;
    merged.insert(merged.end(), pool[bj].members.begin(), pool[bj].members.end());
    std::sort(merged.begin(), merged.end());
    pool[bi] = make_obj(fit, std::move(merged), corr, m, rng);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(bj));
    pr.erase(pr.begin() + static_cast<std::ptrdiff_t>(bj));
    for (auto& row : pr) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (j == bi) continue;
      const double r = pearson(pool[bi].scores, pool[j].scores);
      pr[bi][j] = r;
      pr[j][bi] = r;
    }
  }

  std::sort(pool.begin(), pool.end(),
            [](const Obj& a, const Obj& b) { return a.members[0] < b.members[0]; });
  fit.factors = std::move(pool);
  return fit;
}

}  // namespace oracle

// Fits both implementations and requires identical partitions, matching
// loadings/statistics/scores, and the exit condition on the fitted scores.
void check_against_oracle(const FeatureMatrix& x, double cutoff, std::uint64_t seed) {
  std::vector<std::string> dropped;
  const FactorSet fs = cluster_features(x, cutoff, &dropped);
  const oracle::Result o = oracle::cluster(x, cutoff, seed);

  CHECK(dropped == o.dropped);
  CHECK(fs.cutoff == cutoff);
  CHECK(fs.feature_names == o.names);
  REQUIRE(fs.factors.size() == o.factors.size());

  const FeatureMatrix t = transform(x, fs);
  REQUIRE(t.cols() == fs.factors.size());
  REQUIRE(t.rows() == x.rows());

  for (std::size_t fi = 0; fi < fs.factors.size(); ++fi) {
    const Factor& f = fs.factors[fi];
    const oracle::Obj& g = o.factors[fi];
    REQUIRE(f.members.size() == g.members.size());
    for (std::size_t i = 0; i < f.members.size(); ++i) {
      CHECK(f.members[i] == o.names[g.members[i]]);
    }
    CHECK(f.sign_anchor == f.members[0]);

    if (f.singleton()) {
      CHECK(f.means[0] == 0.0);
      CHECK(f.stds[0] == 1.0);
      CHECK(f.loadings[0] == 1.0);
      // Identity projection: the raw column passes through bit for bit.
      const std::size_t c = column_index(x, f.members[0]);
      for (std::size_t r = 0; r < x.rows(); ++r) CHECK(t.at(r, fi) == x.at(r, c));
    } else {
      for (std::size_t i = 0; i < f.members.size(); ++i) {
        CHECK(std::abs(f.loadings[i] - g.loadings[i]) <= 1e-9);
        CHECK(std::abs(f.means[i] - o.mean[g.members[i]]) <= 1e-9);
        CHECK(std::abs(f.stds[i] - o.sd[g.members[i]]) <= 1e-9);
      }
      for (std::size_t r = 0; r < x.rows(); ++r) {
        CHECK(std::abs(t.at(r, fi) - g.scores[r]) <= 1e-9);
      }
    }
  }

  // Exit condition: no factor score pair on the fitting data stays above
  // the cutoff (tiny slack for recomputation rounding).
  for (std::size_t i = 0; i < t.cols(); ++i) {
    for (std::size_t j = i + 1; j < t.cols(); ++j) {
      const double r = oracle::pearson(column_of(t, i), column_of(t, j));
      CHECK(std::abs(r) <= cutoff + 1e-9);
    }
  }
}

}  // namespace

TEST_CASE("correlation_matrix matches hand values") {
  const FeatureMatrix x = matrix_from_cols(
      {{1, 2, 3, 4}, {2, 4, 6, 8}, {4, 3, 2, 1}, {1, -1, 1, -1}},
      {"a", "b", "c", "d"});
  const std::vector<double> r = correlation_matrix(x);
  REQUIRE(r.size() == 16);
  for (std::size_t i = 0; i < 4; ++i) CHECK(r[i * 4 + i] == 1.0);
  CHECK(r[0 * 4 + 1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r[0 * 4 + 2] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r[1 * 4 + 2] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r[0 * 4 + 3] == doctest::Approx(-0.4472135954999579).epsilon(1e-12));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) CHECK(r[i * 4 + j] == r[j * 4 + i]);
  }

  CHECK(max_abs_offdiag(r, 4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_abs_offdiag({1.0, 0.25, 0.25, 1.0}, 2) == 0.25);

  // Single-row matrices cannot be correlated.
  FeatureMatrix one = matrix_from_cols({{1}, {2}}, {"a", "b"});
  CHECK_THROWS_AS(correlation_matrix(one), DataError);
}

TEST_CASE("cluster_features validates inputs") {
  const FeatureMatrix x = planted_matrix(7, 20, 4);
  CHECK_THROWS_AS(cluster_features(x, 0.0), ConfigError);
  CHECK_THROWS_AS(cluster_features(x, 1.0), ConfigError);
  CHECK_THROWS_AS(cluster_features(x, -0.5), ConfigError);

  FeatureMatrix one = matrix_from_cols({{1}, {2}}, {"a", "b"});
  CHECK_THROWS_WITH_AS(cluster_features(one, 0.75),
                       doctest::Contains("at least 2 rows"), DataError);

  const FeatureMatrix constant =
      matrix_from_cols({{3, 3, 3}, {7, 7, 7}}, {"a", "b"});
  CHECK_THROWS_WITH_AS(cluster_features(constant, 0.75),
                       doctest::Contains("all columns constant"), DataError);
}

TEST_CASE("independent columns stay singletons and transform is the identity") {
  const std::size_t n = 10000;
  Rng rng(99);
  std::vector<std::vector<double>> cols(6, std::vector<double>(n));
  for (auto& col : cols) {
    const double mu = -3.0 + 6.0 * rng.uniform01();
    const double scale = 0.5 + 2.0 * rng.uniform01();
    for (double& v : col) v = rng.gaussian() * scale + mu;
  }
  const FeatureMatrix x =
      matrix_from_cols(cols, {"u0", "u1", "u2", "u3", "u4", "u5"});

  const FactorSet fs = cluster_features(x, 0.75);
  REQUIRE(fs.factors.size() == 6);
  for (const auto& f : fs.factors) CHECK(f.singleton());

  // Factors are ordered by column, so the projection is the identity.
  const FeatureMatrix t = transform(x, fs);
  CHECK(t.feature_names == x.feature_names);
  CHECK(t.data == x.data);
  CHECK(t.meta.size() == x.meta.size());
  CHECK(t.meta[0].subject_id == x.meta[0].subject_id);

  // At this sample size, spurious correlations stay tiny.
  const std::vector<double> r = correlation_matrix(x);
  CHECK(max_abs_offdiag(r, 6) < 0.05);
}

TEST_CASE("duplicated columns merge with symmetric loadings") {
  Rng rng(1234);
  const std::size_t n = 300;
  std::vector<double> a(n);
  for (double& v : a) v = rng.gaussian() * 2.0 + 1.0;
  std::vector<double> noise(n);
  for (double& v : noise) v = rng.gaussian();

  const FeatureMatrix x = matrix_from_cols({a, a, noise}, {"a", "a_copy", "z"});
  const FactorSet fs = cluster_features(x, 0.75);
  REQUIRE(fs.factors.size() == 2);
  REQUIRE(fs.factors[0].members == std::vector<std::string>{"a", "a_copy"});
  CHECK(fs.factors[1].members == std::vector<std::string>{"z"});
  CHECK(factor_name(fs.factors[0]) == "cluster_a");
  CHECK(factor_name(fs.factors[1]) == "z");

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(fs.factors[0].loadings[0] - inv_sqrt2) <= 1e-9);
  CHECK(std::abs(fs.factors[0].loadings[1] - inv_sqrt2) <= 1e-9);

  // Scores are sqrt(2) times the z-scored source column.
  const FeatureMatrix t = transform(x, fs);
  CHECK(t.feature_names[0] == "cluster_a");
  const double mu = oracle::vmean(a);
  const double sd = oracle::sd_pop(a, mu);
  for (std::size_t r = 0; r < n; ++r) {
    const double want = std::sqrt(2.0) * (a[r] - mu) / sd;
    CHECK(std::abs(t.at(r, 0) - want) <= 1e-9);
  }

  check_against_oracle(x, 0.75, 555);
}

TEST_CASE("negated columns merge with opposite loadings anchored to the first member") {
  Rng rng(4321);
  const std::size_t n = 250;
  std::vector<double> a(n), neg(n), noise(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.gaussian() * 1.5 - 2.0;
    neg[i] = -a[i];
    noise[i] = rng.gaussian();
  }
  const FeatureMatrix x = matrix_from_cols({a, neg, noise}, {"a", "neg_a", "z"});
  const FactorSet fs = cluster_features(x, 0.75);
  REQUIRE(fs.factors.size() == 2);
  REQUIRE(fs.factors[0].members == std::vector<std::string>{"a", "neg_a"});
  CHECK(fs.factors[0].sign_anchor == "a");

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(fs.factors[0].loadings[0] - inv_sqrt2) <= 1e-9);
  CHECK(std::abs(fs.factors[0].loadings[1] + inv_sqrt2) <= 1e-9);

  // The factor tracks the anchor positively.
  const FeatureMatrix t = transform(x, fs);
  CHECK(oracle::pearson(column_of(t, 0), a) == doctest::Approx(1.0).epsilon(1e-9));

  check_against_oracle(x, 0.75, 777);

  // Four bitwise-identical columns collapse into one factor of equal
  // weights scoring 2x the z-scored source.
  const FeatureMatrix quad = matrix_from_cols({a, a, a, a}, {"p", "q", "r", "s"});
  const FactorSet qfs = cluster_features(quad, 0.75);
  REQUIRE(qfs.factors.size() == 1);
  CHECK(qfs.factors[0].members == std::vector<std::string>{"p", "q", "r", "s"});
  for (double w : qfs.factors[0].loadings) CHECK(std::abs(w - 0.5) <= 1e-9);
  const FeatureMatrix qt = transform(quad, qfs);
  const double mu = oracle::vmean(a);
  const double sd = oracle::sd_pop(a, mu);
  for (std::size_t r = 0; r < n; ++r) {
    CHECK(std::abs(qt.at(r, 0) - 2.0 * (a[r] - mu) / sd) <= 1e-9);
  }
  check_against_oracle(quad, 0.75, 888);
}

TEST_CASE("merge loop matches a brute-force oracle on planted-block matrices") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    const FeatureMatrix x = planted_matrix(1000 + seed);
    check_against_oracle(x, 0.75, 31000 + seed);
  }
  // A couple of runs at a different cutoff exercise the threshold handling.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CAPTURE(seed);
    const FeatureMatrix x = planted_matrix(2000 + seed);
    check_against_oracle(x, 0.6, 32000 + seed);
  }
}

TEST_CASE("constant columns are set aside before clustering") {
  Rng rng(5);
  const std::size_t n = 100;
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.gaussian();
    b[i] = rng.gaussian();
  }
  const FeatureMatrix x = matrix_from_cols(
      {a, std::vector<double>(n, 42.0), b, std::vector<double>(n, -1.0)},
      {"a", "const1", "b", "const2"});

  std::vector<std::string> dropped;
  const FactorSet fs = cluster_features(x, 0.75, &dropped);
  CHECK(dropped == std::vector<std::string>{"const1", "const2"});
  CHECK(fs.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(fs.factors.size() == 2);

  // The projection ignores the constant columns entirely.
  const FeatureMatrix t = transform(x, fs);
  CHECK(t.feature_names == std::vector<std::string>{"a", "b"});
  for (std::size_t r = 0; r < n; ++r) {
    CHECK(t.at(r, 0) == a[r]);
    CHECK(t.at(r, 1) == b[r]);
  }
}

TEST_CASE("factor sets serialize deterministically and round trip byte for byte") {
  const FeatureMatrix x = planted_matrix(77);
  const FactorSet fs = cluster_features(x, 0.75);
  const FactorSet fs2 = cluster_features(x, 0.75);

  const std::string j1 = factor_set_to_json(fs);
  CHECK(j1 == factor_set_to_json(fs2));
  CHECK(j1.back() == '\n');

  const FactorSet loaded = factor_set_from_json(j1);
  CHECK(factor_set_to_json(loaded) == j1);
  CHECK(loaded.cutoff == fs.cutoff);
  REQUIRE(loaded.factors.size() == fs.factors.size());

  // Reloaded parameters reproduce the projection exactly.
  const FeatureMatrix t1 = transform(x, fs);
  const FeatureMatrix t2 = transform(x, loaded);
  CHECK(t1.data == t2.data);
  CHECK(t1.feature_names == t2.feature_names);

  tu::TempDir dir;
  const std::string path = (dir.path() / "factors.json").string();
  save_factor_set(path, fs);
  const FactorSet from_file = load_factor_set(path);
  CHECK(factor_set_to_json(from_file) == j1);

  CHECK_THROWS_AS(load_factor_set((dir.path() / "absent.json").string()), DataError);
  CHECK_THROWS_WITH_AS(factor_set_from_json("{"), doctest::Contains("bad factor set JSON"),
                       DataError);
  CHECK_THROWS_AS(factor_set_from_json("[]"), DataError);
  CHECK_THROWS_AS(factor_set_from_json("{\"cutoff\": 0.75}"), DataError);
  CHECK_THROWS_WITH_AS(
      factor_set_from_json("{\"cutoff\":0.75,\"factors\":[{\"members\":[\"a\",\"b\"],"
                           "\"means\":[0.0],\"stds\":[1.0,1.0],\"loadings\":[0.7,0.7],"
                           "\"sign_anchor\":\"a\"}]}"),
      doctest::Contains("inconsistent lengths"), DataError);
}

TEST_CASE("transform requires every member column") {
  const FeatureMatrix x = planted_matrix(11, 120, 6);
  const FactorSet fs = cluster_features(x, 0.75);

  FeatureMatrix renamed = x;
  renamed.feature_names[0] = "other";
  CHECK_THROWS_WITH_AS(transform(renamed, fs),
                       doctest::Contains("missing factor member feature"), DataError);

  // Extra columns are fine; members are looked up by name.
  FeatureMatrix extended = x;
  extended.feature_names.push_back("extra");
  FeatureMatrix wide;
  wide.feature_names = extended.feature_names;
  wide.meta = x.meta;
  wide.data.assign(x.rows() * wide.feature_names.size(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) wide.at(r, c) = x.at(r, c);
    wide.at(r, x.cols()) = 123.0;
  }
  const FeatureMatrix t_ref = transform(x, fs);
  const FeatureMatrix t_wide = transform(wide, fs);
  CHECK(t_wide.data == t_ref.data);
}
