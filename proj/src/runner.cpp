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

#include "kidvox/runner.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kidvox/balance.hpp"
#include "kidvox/csv.hpp"
#include "kidvox/errors.hpp"
#include "kidvox/rng.hpp"

namespace kidvox {
namespace {

namespace fs = std::filesystem;

std::string describe(const ManifestEntry& e) {
  return e.subject_id + " age " + std::to_string(e.age) + " " + to_string(e.sex) + " " +
         to_string(e.speech_type) + " " + e.audio_path;
}

// Per-class subject counts, first-appearance order not needed here.
void subject_counts(const FeatureMatrix& x, std::size_t* nf, std::size_t* nm) {
  std::set<std::string> f, m;
  for (const auto& meta : x.meta) (meta.sex == Sex::F ? f : m).insert(meta.subject_id);
  *nf = f.size();
  *nm = m.size();
}

std::string cell_tag(const CellScore& c) {
  return c.group + "_" + to_string(c.set) + "_" + to_string(c.speech) + "_" +
         (c.clustered ? "ac" : "bc");
}

// The refit uses the hyperparameters most outer folds chose; earlier grid
// entries win ties.
std::size_t majority_choice(const std::vector<std::size_t>& counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

nlohmann::ordered_json params_json(const ErfParams& p) {
  nlohmann::ordered_json j;
  j["n_trees"] = p.n_trees;
  j["k_candidates"] = k_candidates_to_string(p.k_candidates);
  j["min_samples_split"] = p.min_samples_split;
  j["max_depth"] = p.max_depth;
  j["seed"] = p.seed;
  return j;
}

void evaluate_cell(const FeatureMatrix& full, const RunConfig& cfg, CellScore* cell) {
  std::size_t nf = 0, nm = 0;
  subject_counts(full, &nf, &nm);
  std::size_t need = std::max<std::size_t>(10, static_cast<std::size_t>(cfg.folds));
  if (nf < need || nm < need) {
    cell->insufficient = true;
    cell->note = "class F has " + std::to_string(nf) + " subjects, class M has " +
                 std::to_string(nm) + ", need " + std::to_string(need);
    return;
  }

  // Seeds exclude the raw/factors flag so both variants of a cell see the
  // same folds and the same tree randomness.
  std::uint64_t cell_seed = derive_seed(
      cfg.seed, hash64(cell->group + "|" + to_string(cell->set) + "|" + to_string(cell->speech)));
  std::vector<int> fold_of = grouped_folds(full, cfg.folds, derive_seed(cell_seed, 100));
  std::vector<ErfParams> grid = cfg.make_grid();
  int smote_k = cfg.smote ? cfg.smote_k : 0;

  std::vector<SamplePrediction> predictions;
  std::vector<std::size_t> chosen_count(grid.size(), 0);
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<std::size_t> train_rows, val_rows;
    for (std::size_t i = 0; i < full.rows(); ++i) {
      (fold_of[i] == f ? val_rows : train_rows).push_back(i);
    }
    FeatureMatrix train = take_rows(full, train_rows);
    FeatureMatrix val = take_rows(full, val_rows);
    if (cell->clustered) {
      FactorSet fold_factors = cluster_features(train, cfg.cutoff);
      train = transform(train, fold_factors);
      val = transform(val, fold_factors);
    }

    GridResult search = grid_search(train, grid, cfg.folds, cfg.repeats,
                                    derive_seed(cell_seed, 200 + static_cast<std::uint64_t>(f)),
                                    smote_k);
    chosen_count[search.best_index]++;

    FeatureMatrix fit = train;
    if (smote_k > 0) {
      fit = borderline_smote(train, smote_k,
                             derive_seed(cell_seed, 300 + static_cast<std::uint64_t>(f)));
    }
    ErfParams params = search.best;
    params.seed = derive_seed(cell_seed, 400 + static_cast<std::uint64_t>(f));
    Forest forest = train_erf(fit, params);

    std::vector<Prediction> batch = predict_batch(forest, val);
    for (std::size_t i = 0; i < val.rows(); ++i) {
      predictions.push_back({val.meta[i].subject_id, val.meta[i].sex, batch[i]});
    }
  }

  cell->subjects = subject_vote(predictions);
  std::vector<Sex> truth, voted;
  for (const auto& s : cell->subjects) {
    truth.push_back(s.truth);
    voted.push_back(s.label);
    if (s.tie_flagged) cell->vote_ties++;
  }
  F1Result f1 = f1_per_class(truth, voted);
  cell->f1_girls = f1.f1_f.value_or(0.0);
  cell->f1_boys = f1.f1_m.value_or(0.0);
  cell->mean_f1 = f1.mean_f1;

  // Full-data refit supplies the reported factors, forest, and weights.
  FeatureMatrix all_rows = full;
  if (cell->clustered) {
    cell->factors = cluster_features(full, cfg.cutoff);
    cell->n_factors = static_cast<int>(cell->factors.factors.size());
    all_rows = transform(full, cell->factors);
  }
  FeatureMatrix fit = all_rows;
  if (smote_k > 0) fit = borderline_smote(all_rows, smote_k, derive_seed(cell_seed, 500));
  cell->chosen = grid[majority_choice(chosen_count)];
  cell->chosen.seed = derive_seed(cell_seed, 501);
  cell->forest = train_erf(fit, cell->chosen);

  std::vector<double> weights = importance(cell->forest);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    ImportanceRow row;
    if (cell->clustered) {
      row.factor = factor_name(cell->factors.factors[i]);
      row.members = cell->factors.factors[i].members;
    } else {
      row.factor = all_rows.feature_names[i];
      row.members = {all_rows.feature_names[i]};
    }
    row.weight = weights[i];
    cell->importance_rows.push_back(std::move(row));
  }
  std::stable_sort(cell->importance_rows.begin(), cell->importance_rows.end(),
                   [](const ImportanceRow& a, const ImportanceRow& b) {
                     return a.weight > b.weight;
                   });
}

std::string na_or(const StatsRow& row, double StatsRow::* field) {
  return row.defined ? csv::format_double(row.*field) : "NA";
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw DataError("failed writing " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

ExtractOutcome extract_corpus(const std::vector<ManifestEntry>& entries, const RunConfig& cfg) {
  ExtractOutcome outcome;
  std::vector<ManifestEntry> kept = filter_quality(entries);
  if (kept.size() < entries.size()) {
    outcome.log.push_back(std::to_string(entries.size() - kept.size()) +
                          " rows removed by the quality filter");
  }

  std::vector<Sample> pending;
  std::vector<std::size_t> entry_of;  // pending index -> kept entry index
  std::vector<std::string> entry_note(kept.size());
  for (std::size_t e = 0; e < kept.size(); ++e) {
    Pcm audio;
    try {
      audio = read_wav(kept[e].audio_path);
    } catch (const DataError& err) {
      if (cfg.strict) {
        throw DataError(describe(kept[e]) + ": " + err.what());
      }
      entry_note[e] = std::string("skipped (") + err.what() + ")";
      continue;
    }
    std::vector<Sample> segments = segment_recording(kept[e], audio, cfg.segment_window_s);
    for (auto& s : segments) {
      pending.push_back(std::move(s));
      entry_of.push_back(e);
    }
  }

  // Per-segment analysis is pure; parallel order cannot change results
  // because every slot is written exactly once.
  std::vector<std::optional<FeatureVector>> extracted(pending.size());
  std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pending.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      extracted[i] = extract_segment_features(*pending[i].audio, cfg.dsp);
    } catch (const DataError&) {
      extracted[i] = std::nullopt;
    }
  }

  std::vector<std::size_t> seg_count(kept.size(), 0), drop_count(kept.size(), 0);
  for (std::size_t i = 0; i < pending.size(); ++i) {
    seg_count[entry_of[i]]++;
    // A segment with no voiced content has no F0 mean and is dropped.
    if (extracted[i] && extracted[i]->get("F0_mean")) {
      Sample s = std::move(pending[i]);
      s.audio.reset();
      s.features = std::move(extracted[i]);
      outcome.samples.push_back(std::move(s));
    } else {
      drop_count[entry_of[i]]++;
    }
  }

  fill_pf(outcome.samples);

  for (std::size_t e = 0; e < kept.size(); ++e) {
    std::string line = describe(kept[e]) + ": ";
    if (!entry_note[e].empty()) {
      line += entry_note[e];
    } else {
      line += std::to_string(seg_count[e]) + " segments";
      if (drop_count[e] > 0) {
        line += ", " + std::to_string(drop_count[e]) + " dropped (no voiced content)";
      }
    }
    outcome.log.push_back(std::move(line));
  }
  return outcome;
}

ExperimentReport run_experiment(const std::vector<Sample>& samples, const RunConfig& cfg) {
  ExperimentReport report;
  auto groups = group_samples(samples, cfg.grouping);

  for (const auto& [group, indices] : groups) {
    for (FeatureSet set : cfg.feature_sets) {
      for (SpeechFilter speech : cfg.speech_types) {
        std::vector<Sample> cell_samples;
        for (std::size_t i : indices) {
          if (speech_matches(speech, samples[i].speech_type)) {
            cell_samples.push_back(samples[i]);
          }
        }
        FeatureMatrix matrix;
        std::string assembly_error;
        if (cell_samples.empty()) {
          assembly_error = "no samples for this speech type";
        } else {
          matrix = assemble_matrix_lenient(cell_samples, set);
        }
        for (bool clustered : cfg.clustering) {
          CellScore cell;
          cell.group = group.label;
          cell.set = set;
          cell.speech = speech;
          cell.clustered = clustered;
          if (!assembly_error.empty()) {
            cell.insufficient = true;
            cell.note = assembly_error;
          } else {
            evaluate_cell(matrix, cfg, &cell);
          }
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }

  // Feature-level statistics run on everything loaded, per age year.
  std::vector<std::string> stats_features;
  for (const std::string& name : canonical_inventory()) {
    bool in_set = false;
    for (FeatureSet set : cfg.feature_sets) {
      const auto& inv = inventory_for(set);
      if (std::find(inv.begin(), inv.end(), name) != inv.end()) {
        in_set = true;
        break;
      }
    }
    if (!in_set) continue;
    bool present = false;
    for (const auto& s : samples) {
      if (s.features && s.features->get(name)) {
        present = true;
        break;
      }
    }
    if (present) stats_features.push_back(name);
  }
  report.stats = stats_by_age(samples, cfg.stats_ages, stats_features);
  return report;
}

std::string stats_csv(const std::vector<StatsRow>& rows) {
  std::string out = "age,feature,t,p,d,band\n";
  for (const auto& row : rows) {
    out += csv::join({std::to_string(row.age), row.feature, na_or(row, &StatsRow::t),
                      na_or(row, &StatsRow::p), na_or(row, &StatsRow::d),
                      row.defined ? row.band : "NA"});
    out += "\n";
  }
  return out;
}

std::string scores_table(const ExperimentReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"group", "features", "speech", "space", "F1_G", "F1_B", "mean_F1", "n"});
  for (const auto& c : report.cells) {
    char buf[32];
    std::vector<std::string> row{c.group, to_string(c.set), to_string(c.speech),
                                 c.clustered ? "ac" : "bc"};
    if (c.insufficient) {
      row.push_back("-");
      row.push_back("-");
      row.push_back("insufficient: " + c.note);
      row.push_back("-");
    } else {
      std::snprintf(buf, sizeof buf, "%.3f", c.f1_girls);
      row.push_back(buf);
      std::snprintf(buf, sizeof buf, "%.3f", c.f1_boys);
      row.push_back(buf);
      std::snprintf(buf, sizeof buf, "%.3f", c.mean_f1);
      row.push_back(buf);
      row.push_back(c.clustered ? std::to_string(c.n_factors) : "-");
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += row[i];
      if (i + 1 < row.size()) out.append(width[i] - row[i].size() + 2, ' ');
    }
    out += "\n";
  }
  return out;
}

void write_experiment_outputs(const ExperimentReport& report, const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  fs::create_directories(cfg.output_dir + "/forests");
  bool any_factors = false;
  for (const auto& c : report.cells) {
    if (c.clustered && !c.insufficient) any_factors = true;
  }
  if (any_factors) fs::create_directories(cfg.output_dir + "/factors");

  // scores.csv: sufficient cells only; insufficient ones live in the report.
  {
    std::string csv = "group,feature_set,speech_type,clustering,F1_G,F1_B,mean_F1,n_factors\n";
    for (const auto& c : report.cells) {
      if (c.insufficient) continue;
      csv += csv::join({c.group, to_string(c.set), to_string(c.speech),
                       c.clustered ? "ac" : "bc", csv::format_double(c.f1_girls),
                       csv::format_double(c.f1_boys), csv::format_double(c.mean_f1),
                       c.clustered ? std::to_string(c.n_factors) : ""});
      csv += "\n";
    }
    write_file_atomic(cfg.output_dir + "/scores.csv", csv);
  }

  {
    std::string csv = "group,factor,members,weight\n";
    for (const auto& c : report.cells) {
      if (c.insufficient) continue;
      for (const auto& row : c.importance_rows) {
        std::string members;
        for (std::size_t i = 0; i < row.members.size(); ++i) {
          if (i) members += "|";
          members += row.members[i];
        }
        csv += csv::join({c.group, row.factor, members, csv::format_double(row.weight)});
        csv += "\n";
      }
    }
    write_file_atomic(cfg.output_dir + "/importance.csv", csv);
  }

  write_file_atomic(cfg.output_dir + "/stats.csv", stats_csv(report.stats));

  {
    nlohmann::ordered_json j;
    j["format"] = "kidvox-report-1";
    j["seed"] = cfg.seed;
    nlohmann::ordered_json cfg_json;
    for (const auto& [key, value] : config_entries(cfg)) cfg_json[key] = value;
    j["config"] = std::move(cfg_json);

    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
      nlohmann::ordered_json jc;
      jc["group"] = c.group;
      jc["feature_set"] = to_string(c.set);
      jc["speech_type"] = to_string(c.speech);
      jc["clustering"] = c.clustered ? "ac" : "bc";
      jc["insufficient"] = c.insufficient;
      if (c.insufficient) {
        jc["note"] = c.note;
        cells.push_back(std::move(jc));
        continue;
      }
      jc["f1_girls"] = c.f1_girls;
      jc["f1_boys"] = c.f1_boys;
      jc["mean_f1"] = c.mean_f1;
      if (c.clustered) {
        jc["n_factors"] = c.n_factors;
      } else {
        jc["n_factors"] = nullptr;
      }
      jc["vote_ties"] = c.vote_ties;
      jc["chosen_params"] = params_json(c.chosen);
      nlohmann::ordered_json subjects = nlohmann::ordered_json::array();
      for (const auto& s : c.subjects) {
        nlohmann::ordered_json js;
        js["id"] = s.subject_id;
        js["truth"] = to_string(s.truth);
        js["predicted"] = to_string(s.label);
        js["tie"] = s.tie_flagged;
        subjects.push_back(std::move(js));
      }
      jc["subjects"] = std::move(subjects);
      nlohmann::ordered_json imp = nlohmann::ordered_json::array();
      for (const auto& row : c.importance_rows) {
        nlohmann::ordered_json ji;
        ji["factor"] = row.factor;
        ji["members"] = row.members;
        ji["weight"] = row.weight;
        imp.push_back(std::move(ji));
      }
      jc["importance"] = std::move(imp);
      cells.push_back(std::move(jc));
    }
    j["cells"] = std::move(cells);

    nlohmann::ordered_json stats = nlohmann::ordered_json::array();
    for (const auto& row : report.stats) {
      nlohmann::ordered_json js;
      js["age"] = row.age;
      js["feature"] = row.feature;
      if (row.defined) {
        js["t"] = row.t;
        js["p"] = row.p;
        js["d"] = row.d;
        js["band"] = row.band;
      } else {
        js["t"] = nullptr;
        js["p"] = nullptr;
        js["d"] = nullptr;
        js["band"] = nullptr;
      }
      stats.push_back(std::move(js));
    }
    j["stats"] = std::move(stats);
    write_file_atomic(cfg.output_dir + "/report.json", j.dump(2) + "\n");
  }

  for (const auto& c : report.cells) {
    if (c.insufficient) continue;
    std::string tag = cell_tag(c);
    write_file_atomic(cfg.output_dir + "/forests/" + tag + ".json", forest_to_json(c.forest));
    if (c.clustered) {
      write_file_atomic(cfg.output_dir + "/factors/" + tag + ".json",
                        factor_set_to_json(c.factors));
    }
  }
}

}  // namespace kidvox
