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

#include "kidvox/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "kidvox/errors.hpp"
#include "kidvox/stats_util.hpp"

namespace kidvox {

std::string factor_name(const Factor& f) {
  return f.singleton() ? f.members[0] : "cluster_" + f.members[0];
}

namespace detail {

// Pearson r between two equally sized columns given their means.
inline double pearson(const double* a, const double* b, std::size_t n, double ma, double mb) {
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    num += da * db;
    va += da * da;
    vb += db * db;
  }
  const double den = std::sqrt(va * vb);
  return den > 0.0 ? num / den : 0.0;
}

std::vector<double> correlation_impl(const FeatureMatrix& x, bool parallel) {
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  if (n < 2) throw DataError("correlation needs at least 2 rows");

  // Column-major copy; the row-major layout is cache-hostile per column.
  std::vector<double> col(m * n);
  std::vector<double> mean(m);
  for (std::size_t c = 0; c < m; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = x.at(r, c);
      col[c * n + r] = v;
      s += v;
    }
    mean[c] = s / static_cast<double>(n);
  }

  std::vector<double> out(m * m, 1.0);
  const std::ptrdiff_t mm = static_cast<std::ptrdiff_t>(m);
  // Each (i, j) cell is written by exactly one task; the result does not
  // depend on scheduling.
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < mm; ++i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    for (std::size_t j = ui + 1; j < m; ++j) {
      const double r = pearson(&col[ui * n], &col[j * n], n, mean[ui], mean[j]);
      out[ui * m + j] = r;
      out[j * m + ui] = r;
    }
  }
  return out;
}

}  // namespace detail

std::vector<double> correlation_matrix(const FeatureMatrix& x) {
  return detail::correlation_impl(x, true);
}

namespace serial {
std::vector<double> correlation_matrix(const FeatureMatrix& x) {
  return detail::correlation_impl(x, false);
}
}  // namespace serial

double max_abs_offdiag(const std::vector<double>& m, std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      best = std::max(best, std::abs(m[i * n + j]));
    }
  }
  return best;
}

namespace {

// Dominant eigenvector of a symmetric matrix by cyclic Jacobi rotation.
// Deterministic sweep order; returns the column of the accumulated
// rotation matrix belonging to the largest eigenvalue.
std::vector<double> principal_eigenvector(std::vector<double> a, std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  if (n == 1) return {1.0};

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-30) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (a[i * n + i] > a[best * n + best]) best = i;
  }
  std::vector<double> out(n);
  double norm = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = v[k * n + best];
    norm += out[k] * out[k];
  }
  norm = std::sqrt(norm);
  for (double& x : out) x /= norm;
  return out;
}

struct FitColumns {
  // Original columns with fitting statistics, kept for PCA merges.
  std::size_t n = 0;
  std::vector<std::vector<double>> col;
  std::vector<double> mean, sd;
  std::vector<std::string> name;
};

// An object in the merge pool: the member set (original column indices,
// ascending) plus its current score column.
struct PoolObject {
  std::vector<std::size_t> members;
  std::vector<double> scores;
  std::vector<double> loadings;  // over members, unit norm
};

double pearson_cols(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  return detail::pearson(a.data(), b.data(), n, ma, mb);
}

// PCA score column for a member set: z-score each original member column,
// project on the dominant eigenvector of the members' correlation matrix,
// orient so the scores correlate non-negatively with the anchor (first)
// member.
PoolObject make_object(const FitColumns& fit, std::vector<std::size_t> members,
                       const std::vector<double>& full_corr, std::size_t total_cols) {
  PoolObject obj;
  obj.members = std::move(members);
  const std::size_t m = obj.members.size();

  std::vector<double> sub(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      sub[i * m + j] = full_corr[obj.members[i] * total_cols + obj.members[j]];
    }
  }
  obj.loadings = principal_eigenvector(std::move(sub), m);

  obj.scores.assign(fit.n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t c = obj.members[i];
    const double w = obj.loadings[i];
    for (std::size_t r = 0; r < fit.n; ++r) {
      obj.scores[r] += w * (fit.col[c][r] - fit.mean[c]) / fit.sd[c];
    }
  }

  const double anchor_r = pearson_cols(obj.scores, fit.col[obj.members[0]]);
  if (anchor_r < 0.0) {
    for (double& w : obj.loadings) w = -w;
    for (double& s : obj.scores) s = -s;
  }
  return obj;
}

}  // namespace

FactorSet cluster_features(const FeatureMatrix& x, double cutoff,
                           std::vector<std::string>* dropped_constant) {
  if (x.rows() < 2) throw DataError("clustering needs at least 2 rows");
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw ConfigError("clustering cutoff must be in (0,1)");

  // Split off constant columns; Pearson r is undefined for them.
  FitColumns fit;
  fit.n = x.rows();
  std::vector<std::string> constants;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    std::vector<double> col(fit.n);
    for (std::size_t r = 0; r < fit.n; ++r) col[r] = x.at(r, c);
    const double m = mean_of(col);
    const double sd = stddev_pop(col);
    if (sd <= 0.0) {
      constants.push_back(x.feature_names[c]);
      continue;
    }
    fit.col.push_back(std::move(col));
    fit.mean.push_back(m);
    fit.sd.push_back(sd);
    fit.name.push_back(x.feature_names[c]);
  }
  if (dropped_constant) *dropped_constant = constants;
  const std::size_t m = fit.col.size();
  if (m == 0) throw DataError("all columns constant, nothing to cluster");

  // Correlations between original columns never change; merged-object PCA
  // only ever needs submatrices of this.
  std::vector<double> corr(m * m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double r = detail::pearson(fit.col[i].data(), fit.col[j].data(), fit.n,
                                       fit.mean[i], fit.mean[j]);
      corr[i * m + j] = r;
      corr[j * m + i] = r;
    }
  }

  std::vector<PoolObject> pool;
  pool.reserve(m);
  for (std::size_t c = 0; c < m; ++c) pool.push_back(make_object(fit, {c}, corr, m));

  // Pairwise correlations between pool objects, kept in step with merges.
  std::vector<std::vector<double>> pr(pool.size(), std::vector<double>(pool.size(), 1.0));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      const double r = pearson_cols(pool[i].scores, pool[j].scores);
      pr[i][j] = r;
      pr[j][i] = r;
    }
  }

  while (pool.size() > 1) {
    // Most correlated pair; ties go to the lexicographically smallest
    // (i, j), which the strict > comparison yields for free.
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
    pool[bi] = make_object(fit, std::move(merged), corr, m);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(bj));
    pr.erase(pr.begin() + static_cast<std::ptrdiff_t>(bj));
    for (auto& row : pr) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (j == bi) continue;
      const double r = pearson_cols(pool[bi].scores, pool[j].scores);
      pr[bi][j] = r;
      pr[j][bi] = r;
    }
  }

  FactorSet fs;
  fs.cutoff = cutoff;
  fs.feature_names.assign(fit.name.begin(), fit.name.end());

  // Canonical factor order: by smallest member column index.
  std::sort(pool.begin(), pool.end(),
            [](const PoolObject& a, const PoolObject& b) { return a.members[0] < b.members[0]; });
  for (const auto& obj : pool) {
    Factor f;
    for (std::size_t i = 0; i < obj.members.size(); ++i) {
      const std::size_t c = obj.members[i];
      f.members.push_back(fit.name[c]);
      f.means.push_back(fit.mean[c]);
      f.stds.push_back(fit.sd[c]);
      f.loadings.push_back(obj.loadings[i]);
    }
    if (f.members.size() == 1) {
      // Identity projection: the raw feature passes through.
      f.means[0] = 0.0;
      f.stds[0] = 1.0;
      f.loadings[0] = 1.0;
    }
    f.sign_anchor = f.members[0];
    fs.factors.push_back(std::move(f));
  }
  return fs;
}

FeatureMatrix transform(const FeatureMatrix& x, const FactorSet& fs) {
  FeatureMatrix out;
  out.meta = x.meta;
  std::vector<std::vector<std::size_t>> member_cols(fs.factors.size());
  for (std::size_t fi = 0; fi < fs.factors.size(); ++fi) {
    const Factor& f = fs.factors[fi];
    out.feature_names.push_back(factor_name(f));
    for (const auto& name : f.members) {
      auto it = std::find(x.feature_names.begin(), x.feature_names.end(), name);
      if (it == x.feature_names.end()) {
        throw DataError("matrix is missing factor member feature " + name);
      }
      member_cols[fi].push_back(static_cast<std::size_t>(it - x.feature_names.begin()));
    }
  }
  out.data.assign(x.rows() * fs.factors.size(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t fi = 0; fi < fs.factors.size(); ++fi) {
      const Factor& f = fs.factors[fi];
      double s = 0.0;
      for (std::size_t i = 0; i < f.members.size(); ++i) {
        s += f.loadings[i] * (x.at(r, member_cols[fi][i]) - f.means[i]) / f.stds[i];
      }
      out.at(r, fi) = s;
    }
  }
  return out;
}

std::string factor_set_to_json(const FactorSet& fs) {
  nlohmann::ordered_json j;
  j["cutoff"] = fs.cutoff;
  j["factors"] = nlohmann::ordered_json::array();
  for (const auto& f : fs.factors) {
    nlohmann::ordered_json jf;
    jf["members"] = f.members;
    jf["means"] = f.means;
    jf["stds"] = f.stds;
    jf["loadings"] = f.loadings;
    jf["sign_anchor"] = f.sign_anchor;
    j["factors"].push_back(std::move(jf));
  }
  return j.dump(2) + "\n";
}

FactorSet factor_set_from_json(const std::string& text) {
  FactorSet fs;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    fs.cutoff = j.at("cutoff").get<double>();
    for (const auto& jf : j.at("factors")) {
      Factor f;
      f.members = jf.at("members").get<std::vector<std::string>>();
      f.means = jf.at("means").get<std::vector<double>>();
      f.stds = jf.at("stds").get<std::vector<double>>();
      f.loadings = jf.at("loadings").get<std::vector<double>>();
      f.sign_anchor = jf.at("sign_anchor").get<std::string>();
      if (f.members.empty() || f.members.size() != f.means.size() ||
          f.members.size() != f.stds.size() || f.members.size() != f.loadings.size()) {
        throw DataError("factor arrays have inconsistent lengths");
      }
      fs.feature_names.insert(fs.feature_names.end(), f.members.begin(), f.members.end());
      fs.factors.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad factor set JSON: ") + e.what());
  }
  return fs;
}

void save_factor_set(const std::string& path, const FactorSet& fs) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f << factor_set_to_json(fs);
  if (!f) throw DataError("short write to " + path);
}

FactorSet load_factor_set(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return factor_set_from_json(text);
}

}  // namespace kidvox
