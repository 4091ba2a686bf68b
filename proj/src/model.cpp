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

#include "kidvox/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kidvox/balance.hpp"
#include "kidvox/csv.hpp"
#include "kidvox/errors.hpp"
#include "kidvox/eval.hpp"
#include "kidvox/rng.hpp"

namespace kidvox {
namespace {

double gini(std::int64_t nf, std::int64_t nm) {
  double n = static_cast<double>(nf + nm);
  if (n <= 0.0) return 0.0;
  double pf = nf / n, pm = nm / n;
  return 1.0 - pf * pf - pm * pm;
}

int resolve_k(int k_candidates, std::size_t n_features) {
  int f = static_cast<int>(n_features);
  if (k_candidates < 0) return f;
  if (k_candidates == 0) {
    int k = static_cast<int>(std::floor(std::sqrt(static_cast<double>(f))));
    return std::max(1, k);
  }
  return std::min(k_candidates, f);
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const ErfParams& params, int k, std::uint64_t seed)
      : x_(x), params_(params), k_(k), rng_(seed) {}

  Tree take() && { return std::move(tree_); }

  // Returns the new node's index. `rows` is consumed.
  int build(std::vector<std::size_t>& rows, int depth) {
    std::int64_t nf = 0, nm = 0;
    for (std::size_t r : rows) (x_.meta[r].sex == Sex::F ? nf : nm)++;
    int node = alloc(nf, nm);

    bool pure = nf == 0 || nm == 0;
    bool too_small = rows.size() < static_cast<std::size_t>(params_.min_samples_split);
    bool at_depth = params_.max_depth >= 0 && depth >= params_.max_depth;
    if (pure || too_small || at_depth) return node;

    int best_feature = -1;
    double best_threshold = 0.0, best_decrease = 0.0;
    bool have_best = false;
    double g_parent = gini(nf, nm);
    double n = static_cast<double>(rows.size());

    // Candidate features drawn without replacement; one uniform threshold
    // per non-constant candidate. Draw order fixes ties, so neither row
    // order nor scheduling can change the tree.
    std::vector<int> pool(x_.cols());
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k_; ++i) {
      std::size_t j = i + rng_.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      int c = pool[i];

      double lo = x_.at(rows[0], c), hi = lo;
      for (std::size_t r : rows) {
        double v = x_.at(r, c);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hi > lo)) continue;
      double thr = lo + rng_.uniform01() * (hi - lo);
      if (!(thr > lo && thr < hi)) continue;

      std::int64_t lf = 0, lm = 0;
      for (std::size_t r : rows) {
        if (x_.at(r, c) <= thr) (x_.meta[r].sex == Sex::F ? lf : lm)++;
      }
      std::int64_t nl = lf + lm, nr = static_cast<std::int64_t>(rows.size()) - nl;
      double decrease =
          g_parent - (nl / n) * gini(lf, lm) - (nr / n) * gini(nf - lf, nm - lm);
      if (!have_best || decrease > best_decrease) {
        have_best = true;
        best_feature = c;
        best_threshold = thr;
        best_decrease = decrease;
      }
    }
    if (!have_best) return node;

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    for (std::size_t r : rows) {
      (x_.at(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree_.feature[node] = best_feature;
    tree_.threshold[node] = best_threshold;
    tree_.left[node] = build(left_rows, depth + 1);
    tree_.right[node] = build(right_rows, depth + 1);
    return node;
  }

 private:
  int alloc(std::int64_t nf, std::int64_t nm) {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.count_f.push_back(nf);
    tree_.count_m.push_back(nm);
    return static_cast<int>(tree_.size()) - 1;
  }

  const FeatureMatrix& x_;
  const ErfParams& params_;
  int k_;
  Rng rng_;
  Tree tree_;
};

Forest train_impl(const FeatureMatrix& x, const ErfParams& params, bool parallel) {
  if (params.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (params.min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
  if (x.rows() == 0) throw DataError("empty training matrix");
  std::int64_t nf = 0, nm = 0;
  for (const auto& m : x.meta) (m.sex == Sex::F ? nf : nm)++;
  if (nf == 0 || nm == 0) throw DataError("training data contains a single class");

  Forest forest;
  forest.params = params;
  forest.feature_names = x.feature_names;
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));
  int k = resolve_k(params.k_candidates, x.cols());

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int t = 0; t < params.n_trees; ++t) {
    TreeBuilder builder(x, params, k, derive_seed(params.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    builder.build(rows, 0);
    forest.trees[static_cast<std::size_t>(t)] = std::move(builder).take();
  }
  return forest;
}

Sex tree_vote(const Tree& t, const double* row) {
  int v = 0;
  while (t.feature[v] >= 0) {
    v = row[t.feature[v]] <= t.threshold[v] ? t.left[v] : t.right[v];
  }
  return t.count_f[v] >= t.count_m[v] ? Sex::F : Sex::M;
}

nlohmann::ordered_json params_to_json(const ErfParams& p) {
  nlohmann::ordered_json j;
  j["n_trees"] = p.n_trees;
  j["k_candidates"] = k_candidates_to_string(p.k_candidates);
  j["min_samples_split"] = p.min_samples_split;
  j["max_depth"] = p.max_depth;
  j["seed"] = p.seed;
  return j;
}

ErfParams params_from_json(const nlohmann::json& j) {
  ErfParams p;
  p.n_trees = j.at("n_trees").get<int>();
  p.k_candidates = parse_k_candidates(j.at("k_candidates").get<std::string>());
  p.min_samples_split = j.at("min_samples_split").get<int>();
  p.max_depth = j.at("max_depth").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

}  // namespace

std::string k_candidates_to_string(int k) {
  if (k == 0) return "sqrt";
  if (k < 0) return "all";
  return std::to_string(k);
}

int parse_k_candidates(const std::string& s) {
  if (s == "sqrt") return 0;
  if (s == "all") return -1;
  long v;
  try {
    v = csv::parse_long(s, "k_candidates");
  } catch (const DataError&) {
    throw ConfigError("k_candidates must be 'sqrt', 'all', or a positive integer");
  }
  if (v < 1) throw ConfigError("k_candidates must be 'sqrt', 'all', or a positive integer");
  return static_cast<int>(v);
}

Forest train_erf(const FeatureMatrix& x, const ErfParams& params) {
  return train_impl(x, params, true);
}

namespace serial {
Forest train_erf(const FeatureMatrix& x, const ErfParams& params) {
  return train_impl(x, params, false);
}
}  // namespace serial

Prediction predict(const Forest& f, const double* row) {
  int votes_f = 0;
  for (const Tree& t : f.trees) {
    if (tree_vote(t, row) == Sex::F) ++votes_f;
  }
  int n = static_cast<int>(f.trees.size());
  Prediction p;
  p.vote_f = static_cast<double>(votes_f) / n;
  p.vote_m = static_cast<double>(n - votes_f) / n;
  p.label = 2 * votes_f >= n ? Sex::F : Sex::M;
  return p;
}

std::vector<Prediction> predict_batch(const Forest& f, const FeatureMatrix& x) {
  if (x.cols() != f.feature_names.size()) {
    throw DataError("prediction input has " + std::to_string(x.cols()) +
                    " columns, forest expects " + std::to_string(f.feature_names.size()));
  }
  std::vector<Prediction> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(f, x.row(r));
  return out;
}

std::vector<double> importance(const Forest& f) {
  std::size_t nfeat = f.feature_names.size();
  std::vector<double> total(nfeat, 0.0);
  for (const Tree& t : f.trees) {
    if (t.size() == 0) continue;
    double n_root = static_cast<double>(t.count_f[0] + t.count_m[0]);
    for (std::size_t v = 0; v < t.size(); ++v) {
      if (t.feature[v] < 0) continue;
      int l = t.left[v], r = t.right[v];
      double nv = static_cast<double>(t.count_f[v] + t.count_m[v]);
      double nl = static_cast<double>(t.count_f[l] + t.count_m[l]);
      double nr = static_cast<double>(t.count_f[r] + t.count_m[r]);
      double decrease = gini(t.count_f[v], t.count_m[v]) -
                        (nl / nv) * gini(t.count_f[l], t.count_m[l]) -
                        (nr / nv) * gini(t.count_f[r], t.count_m[r]);
      total[static_cast<std::size_t>(t.feature[v])] += (nv / n_root) * decrease;
    }
  }
  double sum = 0.0;
  for (double& w : total) {
    w /= static_cast<double>(f.trees.size());
    sum += w;
  }
  if (sum > 0.0) {
    for (double& w : total) w /= sum;
  }
  return total;
}

std::vector<int> grouped_folds(const FeatureMatrix& x, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("folds must be >= 2");
  // Subjects in first-appearance order, each with a consistent class.
  std::vector<std::string> subjects;
  std::map<std::string, std::pair<Sex, std::size_t>> info;  // sex, subject index
  for (const auto& m : x.meta) {
    auto it = info.find(m.subject_id);
    if (it == info.end()) {
      info.emplace(m.subject_id, std::make_pair(m.sex, subjects.size()));
      subjects.push_back(m.subject_id);
    } else if (it->second.first != m.sex) {
      throw DataError("subject " + m.subject_id + " appears with both sex labels");
    }
  }

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    by_class[info[subjects[i]].first == Sex::F ? 0 : 1].push_back(i);
  }
  if (by_class[0].size() < static_cast<std::size_t>(folds) ||
      by_class[1].size() < static_cast<std::size_t>(folds)) {
    throw DataError("cannot stratify " + std::to_string(folds) + " folds: class F has " +
                    std::to_string(by_class[0].size()) + " subjects, class M has " +
                    std::to_string(by_class[1].size()));
  }

  // Shuffle each class, then deal subjects round-robin across folds.
  std::vector<int> subject_fold(subjects.size(), 0);
  Rng rng(seed);
  for (auto& cls : by_class) {
    rng.shuffle(cls);
    for (std::size_t i = 0; i < cls.size(); ++i) {
      subject_fold[cls[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
  }

  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    out[r] = subject_fold[info[x.meta[r].subject_id].second];
  }
  return out;
}

GridResult grid_search(const FeatureMatrix& x, const std::vector<ErfParams>& grid,
                       int folds, int repeats, std::uint64_t seed, int smote_k) {
  if (grid.empty()) throw ConfigError("empty parameter grid");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");

  GridResult result;
  if (grid.size() == 1) {
    // Singleton argmax; cross-validation would not change the answer.
    result.best = grid[0];
    result.best_index = 0;
    return result;
  }

  std::vector<double> score(grid.size(), 0.0);
  for (int r = 0; r < repeats; ++r) {
    std::uint64_t repeat_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    std::vector<int> fold_of = grouped_folds(x, folds, derive_seed(repeat_seed, 0));
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> train_rows, val_rows;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        (fold_of[i] == f ? val_rows : train_rows).push_back(i);
      }
      std::uint64_t fold_seed = derive_seed(repeat_seed, 1 + static_cast<std::uint64_t>(f));
      FeatureMatrix train = take_rows(x, train_rows);
      if (smote_k > 0) train = borderline_smote(train, smote_k, derive_seed(fold_seed, 0));

      std::vector<Sex> truth;
      truth.reserve(val_rows.size());
      for (std::size_t i : val_rows) truth.push_back(x.meta[i].sex);
      FeatureMatrix val = take_rows(x, val_rows);

      for (std::size_t c = 0; c < grid.size(); ++c) {
        ErfParams p = grid[c];
        p.seed = derive_seed(fold_seed, 1 + c);
        Forest forest = train_erf(train, p);
        std::vector<Prediction> preds = predict_batch(forest, val);
        std::vector<Sex> labels;
        labels.reserve(preds.size());
        for (const auto& pr : preds) labels.push_back(pr.label);
        score[c] += f1_per_class(truth, labels).weighted_f1;
      }
    }
  }

  result.evaluated = true;
  result.mean_scores.resize(grid.size());
  double cells = static_cast<double>(folds) * repeats;
  for (std::size_t c = 0; c < grid.size(); ++c) result.mean_scores[c] = score[c] / cells;
  result.best_index = 0;
  for (std::size_t c = 1; c < grid.size(); ++c) {
    if (result.mean_scores[c] > result.mean_scores[result.best_index]) result.best_index = c;
  }
  result.best = grid[result.best_index];
  return result;
}

std::string forest_to_json(const Forest& f) {
  nlohmann::ordered_json j;
  j["format"] = "kidvox-forest-1";
  j["params"] = params_to_json(f.params);
  j["feature_names"] = f.feature_names;
  j["class_labels"] = {"F", "M"};
  nlohmann::ordered_json trees = nlohmann::ordered_json::array();
  for (const Tree& t : f.trees) {
    nlohmann::ordered_json jt;
    jt["feature"] = t.feature;
    jt["threshold"] = t.threshold;
    jt["left"] = t.left;
    jt["right"] = t.right;
    jt["count_f"] = t.count_f;
    jt["count_m"] = t.count_m;
    trees.push_back(std::move(jt));
  }
  j["trees"] = std::move(trees);
  return j.dump(2) + "\n";
}

Forest forest_from_json(const std::string& text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "kidvox-forest-1") {
      throw DataError("unsupported forest format: " + j.at("format").get<std::string>());
    }
    Forest f;
    f.params = params_from_json(j.at("params"));
    f.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& jt : j.at("trees")) {
      Tree t;
      t.feature = jt.at("feature").get<std::vector<int>>();
      t.threshold = jt.at("threshold").get<std::vector<double>>();
      t.left = jt.at("left").get<std::vector<int>>();
      t.right = jt.at("right").get<std::vector<int>>();
      t.count_f = jt.at("count_f").get<std::vector<std::int64_t>>();
      t.count_m = jt.at("count_m").get<std::vector<std::int64_t>>();
      std::size_t n = t.feature.size();
      if (t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
          t.count_f.size() != n || t.count_m.size() != n) {
        throw DataError("forest JSON has ragged node arrays");
      }
      f.trees.push_back(std::move(t));
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid forest JSON: ") + e.what());
  }
}

}  // namespace kidvox
