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

#include "kidvox/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kidvox/errors.hpp"
#include "kidvox/stats_util.hpp"

namespace kidvox {
namespace {

std::optional<double> class_f1(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  if (tp + fp + fn == 0) return std::nullopt;
  if (tp == 0) return 0.0;
  double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

// Continued fraction for the incomplete beta, evaluated by the modified
// Lentz method.
double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double eps = 1e-15;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

F1Result f1_per_class(const std::vector<Sex>& y_true, const std::vector<Sex>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DataError("label sequences differ in length: " + std::to_string(y_true.size()) +
                    " vs " + std::to_string(y_pred.size()));
  }
  if (y_true.empty()) throw DataError("empty label sequences");

  std::int64_t tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0}, support[2] = {0, 0};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    int t = y_true[i] == Sex::F ? 0 : 1;
    int p = y_pred[i] == Sex::F ? 0 : 1;
    ++support[t];
    if (t == p) {
      ++tp[t];
    } else {
      ++fn[t];
      ++fp[p];
    }
  }

  F1Result r;
  r.f1_f = class_f1(tp[0], fp[0], fn[0]);
  r.f1_m = class_f1(tp[1], fp[1], fn[1]);
  double sum = 0.0, wsum = 0.0;
  int defined = 0;
  double n = static_cast<double>(y_true.size());
  if (r.f1_f) {
    sum += *r.f1_f;
    wsum += (support[0] / n) * *r.f1_f;
    ++defined;
  }
  if (r.f1_m) {
    sum += *r.f1_m;
    wsum += (support[1] / n) * *r.f1_m;
    ++defined;
  }
  r.mean_f1 = sum / defined;
  r.weighted_f1 = wsum;
  return r;
}

std::vector<SubjectResult> subject_vote(const std::vector<SamplePrediction>& samples) {
  std::vector<std::string> order;
  struct Acc {
    Sex truth = Sex::F;
    int votes_f = 0, votes_m = 0;
    double sum_vf = 0.0, sum_vm = 0.0;
    int n = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& s : samples) {
    auto it = acc.find(s.subject_id);
    if (it == acc.end()) {
      order.push_back(s.subject_id);
      it = acc.emplace(s.subject_id, Acc{}).first;
      it->second.truth = s.truth;
    }
    Acc& a = it->second;
    (s.pred.label == Sex::F ? a.votes_f : a.votes_m)++;
    a.sum_vf += s.pred.vote_f;
    a.sum_vm += s.pred.vote_m;
    a.n++;
  }

  std::vector<SubjectResult> out;
  out.reserve(order.size());
  for (const std::string& id : order) {
    const Acc& a = acc[id];
    SubjectResult r;
    r.subject_id = id;
    r.truth = a.truth;
    if (a.votes_f != a.votes_m) {
      r.label = a.votes_f > a.votes_m ? Sex::F : Sex::M;
    } else if (a.sum_vf != a.sum_vm) {
      r.label = a.sum_vf > a.sum_vm ? Sex::F : Sex::M;
    } else {
      r.label = Sex::F;
      r.tie_flagged = true;
    }
    out.push_back(std::move(r));
  }
  return out;
}

double reg_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * betacf(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
  return reg_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DataError("t test needs at least 2 values per sample, got " +
                    std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double va = variance_samp(a), vb = variance_samp(b);
  double sa = va / na, sb = vb / nb;
  double se2 = sa + sb;
  if (se2 <= 0.0) throw DataError("zero variance in both samples");
  WelchResult r;
  r.t = (mean_of(a) - mean_of(b)) / std::sqrt(se2);
  r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = student_t_two_tailed_p(r.t, r.df);
  return r;
}

std::string effect_band(double d) {
  double a = std::fabs(d);
  if (a < 0.2) return "small";
  if (a < 0.5) return "small-medium";
  if (a < 0.8) return "medium-large";
  return "large";
}

CohensD cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DataError("effect size needs at least 2 values per sample, got " +
                    std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double pooled = ((na - 1.0) * variance_samp(a) + (nb - 1.0) * variance_samp(b)) /
                  (na + nb - 2.0);
  if (pooled <= 0.0) throw DataError("zero pooled variance");
  CohensD r;
  r.d = (mean_of(a) - mean_of(b)) / std::sqrt(pooled);
  r.band = effect_band(r.d);
  return r;
}

std::vector<StatsRow> stats_by_age(const std::vector<Sample>& samples,
                                   const std::vector<int>& ages,
                                   const std::vector<std::string>& features) {
  std::set<int> present;
  for (const auto& s : samples) present.insert(s.age);
  // An explicit list selects; ages with no samples produce no rows.
  std::vector<int> selected;
  if (ages.empty()) {
    selected.assign(present.begin(), present.end());
  } else {
    for (int a : ages) {
      if (present.count(a)) selected.push_back(a);
    }
  }

  std::vector<StatsRow> rows;
  for (int age : selected) {
    for (const std::string& feature : features) {
      std::vector<double> girls, boys;
      for (const auto& s : samples) {
        if (s.age != age || !s.features) continue;
        auto v = s.features->get(feature);
        if (!v) continue;
        (s.sex == Sex::F ? girls : boys).push_back(*v);
      }
      StatsRow row;
      row.age = age;
      row.feature = feature;
      if (girls.size() >= 2 && boys.size() >= 2) {
        try {
          WelchResult w = welch_t(girls, boys);
          CohensD cd = cohens_d(girls, boys);
          row.defined = true;
          row.t = w.t;
          row.p = w.p;
          row.d = cd.d;
          row.band = cd.band;
        } catch (const DataError&) {
          row.defined = false;  // degenerate variance stays NA
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace kidvox
