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
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "kidvox/balance.hpp"
#include "kidvox/clustering.hpp"
#include "kidvox/config.hpp"
#include "kidvox/corpus.hpp"
#include "kidvox/csv.hpp"
#include "kidvox/errors.hpp"
#include "kidvox/eval.hpp"
#include "kidvox/features.hpp"
#include "kidvox/model.hpp"
#include "kidvox/rng.hpp"
#include "kidvox/runner.hpp"

namespace {

using namespace kidvox;

namespace fs = std::filesystem;

struct CliArgs {
  std::string config;
  std::vector<std::string> overrides;  // KEY=VALUE
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool strict = false;
  std::string manifest, features, out, model, factors;
};

void add_common_options(CLI::App* sub, CliArgs* args) {
  sub->add_option("--config", args->config, "configuration file (flat key = value)");
  sub->add_option("--set", args->overrides, "override one config key, KEY=VALUE (repeatable)")
      ->type_name("KEY=VALUE");
  sub->add_option("--seed", args->seed, "master random seed");
  sub->add_option("--jobs", args->jobs, "worker thread count (0 = runtime default)");
  sub->add_flag("--strict", args->strict, "treat skippable input problems as fatal");
  sub->add_option("--out", args->out, "output directory");
}

RunConfig resolve_config(const CliArgs& args) {
  RunConfig cfg;
  if (!args.config.empty()) cfg = load_config(args.config);
  for (const std::string& kv : args.overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    }
    apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) cfg.seed = *args.seed;
  if (args.jobs) cfg.jobs = *args.jobs;
  if (args.strict) cfg.strict = true;
  if (!args.manifest.empty()) cfg.manifest = args.manifest;
  if (!args.features.empty()) cfg.features_csv = args.features;
  if (!args.out.empty()) cfg.output_dir = args.out;
  if (!args.model.empty()) cfg.model_path = args.model;
  if (!args.factors.empty()) cfg.factors_path = args.factors;
  validate_config(cfg);
#ifdef _OPENMP
  if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
#endif
  return cfg;
}

std::vector<Sample> load_samples(const RunConfig& cfg) {
  if (cfg.features_csv.empty()) {
    throw ConfigError("this command needs features_csv= (or --features)");
  }
  std::vector<Sample> samples = load_feature_csv(cfg.features_csv);
  if (samples.empty()) throw DataError(cfg.features_csv + " holds no samples");
  return samples;
}

std::vector<Sample> filter_speech(const std::vector<Sample>& samples, SpeechFilter f) {
  std::vector<Sample> out;
  for (const auto& s : samples) {
    if (speech_matches(f, s.speech_type)) out.push_back(s);
  }
  return out;
}

void write_features_atomic(const std::string& path, const std::vector<Sample>& samples) {
  std::string tmp = path + ".tmp";
  write_feature_csv(tmp, samples, canonical_inventory());
  fs::rename(tmp, path);
}

int cmd_extract(const RunConfig& cfg) {
  if (cfg.manifest.empty()) throw ConfigError("extract needs manifest= (or --manifest)");
  std::vector<ManifestEntry> entries = load_manifest(cfg.manifest);
  ExtractOutcome outcome = extract_corpus(entries, cfg);
  if (outcome.samples.empty()) {
    throw DataError("no usable samples extracted from " + cfg.manifest);
  }
  fs::create_directories(cfg.output_dir);
  write_features_atomic(cfg.output_dir + "/features.csv", outcome.samples);
  std::string log;
  for (const auto& line : outcome.log) log += line + "\n";
  write_file_atomic(cfg.output_dir + "/extract.log", log);
  std::cout << "extracted " << outcome.samples.size() << " samples from " << entries.size()
            << " manifest rows -> " << cfg.output_dir << "/features.csv\n";
  return 0;
}

int cmd_run(const RunConfig& cfg) {
  std::vector<Sample> samples;
  if (!cfg.features_csv.empty()) {
    samples = load_samples(cfg);
  } else if (!cfg.manifest.empty()) {
    std::vector<ManifestEntry> entries = load_manifest(cfg.manifest);
    ExtractOutcome outcome = extract_corpus(entries, cfg);
    samples = std::move(outcome.samples);
    if (samples.empty()) throw DataError("no usable samples extracted from " + cfg.manifest);
    fs::create_directories(cfg.output_dir);
    write_features_atomic(cfg.output_dir + "/features.csv", samples);
    std::string log;
    for (const auto& line : outcome.log) log += line + "\n";
    write_file_atomic(cfg.output_dir + "/extract.log", log);
  } else {
    throw ConfigError("run needs features_csv= or manifest=");
  }
  ExperimentReport report = run_experiment(samples, cfg);
  write_experiment_outputs(report, cfg);
  std::cout << scores_table(report);
  std::cout << "outputs written to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_cluster(const RunConfig& cfg) {
  std::vector<Sample> samples = load_samples(cfg);
  FeatureSet set = cfg.feature_sets.front();
  SpeechFilter speech = cfg.speech_types.front();
  fs::create_directories(cfg.output_dir);
  auto groups = group_samples(samples, cfg.grouping);
  for (const auto& [group, indices] : groups) {
    std::vector<Sample> cell;
    for (std::size_t i : indices) {
      if (speech_matches(speech, samples[i].speech_type)) cell.push_back(samples[i]);
    }
    try {
      FeatureMatrix x = assemble_matrix_lenient(cell, set);
      std::vector<std::string> dropped;
      FactorSet fs_fit = cluster_features(x, cfg.cutoff, &dropped);
      std::string path =
          cfg.output_dir + "/factors_" + group.label + "_" + to_string(set) + ".json";
      write_file_atomic(path, factor_set_to_json(fs_fit));
      std::cout << "group " << group.label << ": " << x.cols() << " features -> "
                << fs_fit.factors.size() << " factors";
      if (!dropped.empty()) std::cout << " (" << dropped.size() << " constant dropped)";
      std::cout << " -> " << path << "\n";
    } catch (const DataError& e) {
      std::cout << "group " << group.label << ": skipped (" << e.what() << ")\n";
    }
  }
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  std::vector<Sample> samples = load_samples(cfg);
  FeatureSet set = cfg.feature_sets.front();
  SpeechFilter speech = cfg.speech_types.front();
  std::vector<Sample> selected = filter_speech(samples, speech);
  FeatureMatrix x = assemble_matrix(selected, set);
  fs::create_directories(cfg.output_dir);

  bool clustered = std::find(cfg.clustering.begin(), cfg.clustering.end(), true) !=
                   cfg.clustering.end();
  if (clustered) {
    FactorSet factors = cluster_features(x, cfg.cutoff);
    write_file_atomic(cfg.output_dir + "/factors.json", factor_set_to_json(factors));
    x = transform(x, factors);
    std::cout << "fitted " << factors.factors.size() << " factors -> " << cfg.output_dir
              << "/factors.json\n";
  }

  std::vector<ErfParams> grid = cfg.make_grid();
  int smote_k = cfg.smote ? cfg.smote_k : 0;
  GridResult search =
      grid_search(x, grid, cfg.folds, cfg.repeats, derive_seed(cfg.seed, hash64("train")),
                  smote_k);
  FeatureMatrix fit = x;
  if (smote_k > 0) {
    fit = borderline_smote(x, cfg.smote_k, derive_seed(cfg.seed, hash64("train-smote")));
  }
  ErfParams params = search.best;
  params.seed = derive_seed(cfg.seed, hash64("train-final"));
  Forest forest = train_erf(fit, params);
  write_file_atomic(cfg.output_dir + "/forest.json", forest_to_json(forest));
  std::cout << "trained on " << fit.rows() << " rows x " << fit.cols()
            << (clustered ? " factors" : " features") << " (n_trees " << params.n_trees
            << ", k " << k_candidates_to_string(params.k_candidates) << ", min_split "
            << params.min_samples_split << ") -> " << cfg.output_dir << "/forest.json\n";
  if (search.evaluated) {
    std::cout << "grid mean weighted F1: best " << csv::format_double(
                     search.mean_scores[search.best_index])
              << " (entry " << search.best_index + 1 << " of " << grid.size() << ")\n";
  }
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("evaluate needs model_path= (or --model)");
  Forest forest = forest_from_json(read_text_file(cfg.model_path));
  std::vector<Sample> samples = load_samples(cfg);
  std::vector<Sample> selected = filter_speech(samples, cfg.speech_types.front());

  FeatureMatrix x;
  if (!cfg.factors_path.empty()) {
    FactorSet factors = load_factor_set(cfg.factors_path);
    x = transform(assemble_named(selected, factors.feature_names), factors);
  } else {
    x = assemble_named(selected, forest.feature_names);
  }
  if (x.feature_names != forest.feature_names) {
    throw DataError("input columns do not match the model's feature list");
  }
  if (x.rows() == 0) throw DataError("no complete samples to evaluate");

  std::vector<Prediction> preds = predict_batch(forest, x);
  std::vector<Sex> truth, labels;
  std::vector<SamplePrediction> by_subject;
  std::string pred_csv =
      "subject_id,age,sex,speech_type,segment_index,predicted,vote_f,vote_m\n";
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const SampleMeta& m = x.meta[i];
    truth.push_back(m.sex);
    labels.push_back(preds[i].label);
    by_subject.push_back({m.subject_id, m.sex, preds[i]});
    pred_csv += csv::join({m.subject_id, std::to_string(m.age), to_string(m.sex),
                           to_string(m.speech_type), std::to_string(m.segment_index),
                           to_string(preds[i].label), csv::format_double(preds[i].vote_f),
                           csv::format_double(preds[i].vote_m)});
    pred_csv += "\n";
  }
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir + "/predictions.csv", pred_csv);

  std::vector<SubjectResult> votes = subject_vote(by_subject);
  std::string subj_csv = "subject_id,truth,predicted,tie\n";
  std::vector<Sex> s_truth, s_pred;
  for (const auto& v : votes) {
    s_truth.push_back(v.truth);
    s_pred.push_back(v.label);
    subj_csv += csv::join({v.subject_id, to_string(v.truth), to_string(v.label),
                           v.tie_flagged ? "1" : "0"});
    subj_csv += "\n";
  }
  write_file_atomic(cfg.output_dir + "/subjects.csv", subj_csv);

  char buf[160];
  F1Result fs = f1_per_class(truth, labels);
  std::snprintf(buf, sizeof buf, "samples  n %zu  F1_G %.3f  F1_B %.3f  mean %.3f\n",
                truth.size(), fs.f1_f.value_or(0.0), fs.f1_m.value_or(0.0), fs.mean_f1);
  std::cout << buf;
  F1Result fj = f1_per_class(s_truth, s_pred);
  std::snprintf(buf, sizeof buf, "subjects n %zu  F1_G %.3f  F1_B %.3f  mean %.3f\n",
                s_truth.size(), fj.f1_f.value_or(0.0), fj.f1_m.value_or(0.0), fj.mean_f1);
  std::cout << buf;
  return 0;
}

int cmd_stats(const RunConfig& cfg) {
  std::vector<Sample> samples = load_samples(cfg);
  std::vector<std::string> features;
  for (const std::string& name : canonical_inventory()) {
    for (const auto& s : samples) {
      if (s.features && s.features->get(name)) {
        features.push_back(name);
        break;
      }
    }
  }
  std::vector<StatsRow> rows = stats_by_age(samples, cfg.stats_ages, features);
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir + "/stats.csv", stats_csv(rows));
  std::cout << rows.size() << " rows -> " << cfg.output_dir << "/stats.csv\n";
  return 0;
}

int cmd_importance(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("importance needs model_path= (or --model)");
  Forest forest = forest_from_json(read_text_file(cfg.model_path));
  std::vector<double> weights = importance(forest);

  std::vector<std::vector<std::string>> members(forest.feature_names.size());
  if (!cfg.factors_path.empty()) {
    FactorSet factors = load_factor_set(cfg.factors_path);
    if (factors.factors.size() != forest.feature_names.size()) {
      throw DataError("factor set size does not match the model's feature list");
    }
    for (std::size_t i = 0; i < factors.factors.size(); ++i) {
      members[i] = factors.factors[i].members;
    }
  }

  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  for (std::size_t i : order) {
    std::cout << forest.feature_names[i] << "," << csv::format_double(weights[i]);
    if (!members[i].empty()) {
      std::cout << ",";
      for (std::size_t j = 0; j < members[i].size(); ++j) {
        if (j) std::cout << "|";
        std::cout << members[i][j];
      }
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acoustic analysis of children's voices: feature extraction, factor "
               "clustering, forest training, and sex classification experiments"};
  app.require_subcommand(1);
  CliArgs args;

  CLI::App* exs = app.add_subcommand("extract", "decode audio and write the feature CSV");
  exs->add_option("--manifest", args.manifest, "recording manifest CSV");
  CLI::App* run = app.add_subcommand("run", "full experiment: scores, importance, stats");
  run->add_option("--manifest", args.manifest, "recording manifest CSV");
  run->add_option("--features", args.features, "precomputed feature CSV");
  CLI::App* clu = app.add_subcommand("cluster", "fit factor sets per age group");
  clu->add_option("--features", args.features, "precomputed feature CSV");
  CLI::App* trn = app.add_subcommand("train", "fit one forest on the whole input");
  trn->add_option("--features", args.features, "precomputed feature CSV");
  CLI::App* evl = app.add_subcommand("evaluate", "apply a saved model to a feature CSV");
  evl->add_option("--features", args.features, "precomputed feature CSV");
  evl->add_option("--model", args.model, "saved forest JSON");
  evl->add_option("--factors", args.factors, "saved factor set JSON");
  CLI::App* sts = app.add_subcommand("stats", "per-age girls-vs-boys feature statistics");
  sts->add_option("--features", args.features, "precomputed feature CSV");
  CLI::App* imp = app.add_subcommand("importance", "print a saved model's factor weights");
  imp->add_option("--model", args.model, "saved forest JSON");
  imp->add_option("--factors", args.factors, "saved factor set JSON (member names)");

  for (CLI::App* sub : {exs, run, clu, trn, evl, sts, imp}) add_common_options(sub, &args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = resolve_config(args);
    if (exs->parsed()) return cmd_extract(cfg);
    if (run->parsed()) return cmd_run(cfg);
    if (clu->parsed()) return cmd_cluster(cfg);
    if (trn->parsed()) return cmd_train(cfg);
    if (evl->parsed()) return cmd_evaluate(cfg);
    if (sts->parsed()) return cmd_stats(cfg);
    if (imp->parsed()) return cmd_importance(cfg);
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
