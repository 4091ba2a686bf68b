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

#include "kidvox/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kidvox/csv.hpp"
#include "kidvox/errors.hpp"

namespace kidvox {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_switch(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ConfigError(key + " expects on or off, got '" + value + "'");
}

int to_int(const std::string& key, const std::string& value) {
  try {
    return static_cast<int>(csv::parse_long(value, key));
  } catch (const DataError&) {
    throw ConfigError(key + " expects an integer, got '" + value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    return csv::parse_double(value, key);
  } catch (const DataError&) {
    throw ConfigError(key + " expects a number, got '" + value + "'");
  }
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const std::string& item : split_list(value)) out.push_back(to_int(key, item));
  return out;
}

}  // namespace

std::string to_string(SpeechFilter f) {
  switch (f) {
    case SpeechFilter::scripted: return "scripted";
    case SpeechFilter::spontaneous: return "spontaneous";
    case SpeechFilter::both: return "both";
  }
  return "both";
}

SpeechFilter parse_speech_filter(const std::string& s) {
  if (s == "scripted") return SpeechFilter::scripted;
  if (s == "spontaneous") return SpeechFilter::spontaneous;
  if (s == "both") return SpeechFilter::both;
  throw ConfigError("unknown speech type '" + s + "' (scripted, spontaneous, both)");
}

bool speech_matches(SpeechFilter f, SpeechType t) {
  switch (f) {
    case SpeechFilter::scripted: return t == SpeechType::scripted;
    case SpeechFilter::spontaneous: return t == SpeechType::spontaneous;
    case SpeechFilter::both: return true;
  }
  return true;
}

std::vector<ErfParams> RunConfig::make_grid() const {
  std::vector<ErfParams> grid;
  for (int trees : grid_n_trees) {
    for (int k : grid_k) {
      for (int split : grid_min_split) {
        ErfParams p;
        p.n_trees = trees;
        p.k_candidates = k;
        p.min_samples_split = split;
        p.max_depth = grid_max_depth;
        grid.push_back(p);
      }
    }
  }
  return grid;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "manifest") {
    cfg.manifest = value;
  } else if (key == "features_csv") {
    cfg.features_csv = value;
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "model_path") {
    cfg.model_path = value;
  } else if (key == "factors_path") {
    cfg.factors_path = value;
  } else if (key == "feature_set") {
    cfg.feature_sets.clear();
    for (const std::string& item : split_list(value)) {
      cfg.feature_sets.push_back(parse_feature_set(item));
    }
  } else if (key == "grouping") {
    if (value == "per_year") {
      cfg.grouping = Grouping::per_year;
    } else if (value == "per_band") {
      cfg.grouping = Grouping::per_band;
    } else {
      throw ConfigError("grouping expects per_year or per_band, got '" + value + "'");
    }
  } else if (key == "speech_type") {
    cfg.speech_types.clear();
    for (const std::string& item : split_list(value)) {
      cfg.speech_types.push_back(parse_speech_filter(item));
    }
  } else if (key == "clustering") {
    cfg.clustering.clear();
    for (const std::string& item : split_list(value)) {
      if (item == "bc") {
        cfg.clustering.push_back(false);
      } else if (item == "ac") {
        cfg.clustering.push_back(true);
      } else {
        throw ConfigError("clustering expects bc and/or ac, got '" + item + "'");
      }
    }
  } else if (key == "cutoff") {
    cfg.cutoff = to_double(key, value);
  } else if (key == "smote") {
    cfg.smote = parse_switch(key, value);
  } else if (key == "smote_k") {
    cfg.smote_k = to_int(key, value);
  } else if (key == "grid.n_trees") {
    cfg.grid_n_trees = to_int_list(key, value);
  } else if (key == "grid.k") {
    cfg.grid_k.clear();
    for (const std::string& item : split_list(value)) {
      try {
        cfg.grid_k.push_back(parse_k_candidates(item));
      } catch (const ConfigError&) {
        throw ConfigError("grid.k expects sqrt, all, or positive integers, got '" + item + "'");
      }
    }
  } else if (key == "grid.min_samples_split") {
    cfg.grid_min_split = to_int_list(key, value);
  } else if (key == "grid.max_depth") {
    cfg.grid_max_depth = value == "none" ? -1 : to_int(key, value);
  } else if (key == "folds") {
    cfg.folds = to_int(key, value);
  } else if (key == "repeats") {
    cfg.repeats = to_int(key, value);
  } else if (key == "seed") {
    try {
      cfg.seed = static_cast<std::uint64_t>(csv::parse_long(value, "seed"));
    } catch (const DataError&) {
      throw ConfigError("seed expects an integer, got '" + value + "'");
    }
  } else if (key == "jobs") {
    cfg.jobs = to_int(key, value);
  } else if (key == "strict") {
    cfg.strict = parse_switch(key, value);
  } else if (key == "segment_window_s") {
    cfg.segment_window_s = to_double(key, value);
  } else if (key == "stats_ages") {
    cfg.stats_ages = to_int_list(key, value);
  } else if (key == "dsp.sample_rate") {
    cfg.dsp.sample_rate = to_double(key, value);
  } else if (key == "dsp.frame_length_s") {
    cfg.dsp.frame_length_s = to_double(key, value);
  } else if (key == "dsp.frame_hop_s") {
    cfg.dsp.frame_hop_s = to_double(key, value);
  } else if (key == "dsp.normalize") {
    cfg.dsp.normalize = parse_switch(key, value);
  } else if (key == "dsp.pitch_min_hz") {
    cfg.dsp.pitch_min_hz = to_double(key, value);
  } else if (key == "dsp.pitch_max_hz") {
    cfg.dsp.pitch_max_hz = to_double(key, value);
  } else if (key == "dsp.voicing_threshold") {
    cfg.dsp.voicing_threshold = to_double(key, value);
  } else if (key == "dsp.energy_gate") {
    cfg.dsp.energy_gate = to_double(key, value);
  } else if (key == "dsp.lpc_order") {
    cfg.dsp.lpc_order = to_int(key, value);
  } else if (key == "dsp.preemphasis") {
    cfg.dsp.preemphasis = to_double(key, value);
  } else if (key == "dsp.formant_min_hz") {
    cfg.dsp.formant_min_hz = to_double(key, value);
  } else if (key == "dsp.formant_max_hz") {
    cfg.dsp.formant_max_hz = to_double(key, value);
  } else if (key == "dsp.formant_max_bw_hz") {
    cfg.dsp.formant_max_bw_hz = to_double(key, value);
  } else if (key == "dsp.nfft") {
    cfg.dsp.nfft = static_cast<std::size_t>(to_int(key, value));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + " line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    try {
      apply_config_entry(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  if (!(cfg.cutoff > 0.0 && cfg.cutoff < 1.0)) {
    throw ConfigError("cutoff must lie in (0, 1)");
  }
  if (cfg.folds < 2) throw ConfigError("folds must be >= 2");
  if (cfg.repeats < 1) throw ConfigError("repeats must be >= 1");
  if (cfg.smote_k < 1) throw ConfigError("smote_k must be >= 1");
  if (cfg.feature_sets.empty()) throw ConfigError("feature_set must name at least one set");
  if (cfg.speech_types.empty()) throw ConfigError("speech_type must name at least one type");
  if (cfg.clustering.empty()) throw ConfigError("clustering must name bc and/or ac");
  if (cfg.grid_n_trees.empty() || cfg.grid_k.empty() || cfg.grid_min_split.empty()) {
    throw ConfigError("every grid dimension needs at least one value");
  }
  for (int t : cfg.grid_n_trees) {
    if (t < 1) throw ConfigError("grid.n_trees entries must be >= 1");
  }
  for (int s : cfg.grid_min_split) {
    if (s < 2) throw ConfigError("grid.min_samples_split entries must be >= 2");
  }
  if (cfg.jobs < 0) throw ConfigError("jobs must be >= 0");
  if (cfg.segment_window_s <= 0.0) throw ConfigError("segment_window_s must be positive");
  if (cfg.dsp.sample_rate <= 0.0 || cfg.dsp.frame_length_s <= 0.0 ||
      cfg.dsp.frame_hop_s <= 0.0) {
    throw ConfigError("dsp sample rate, frame length, and hop must be positive");
  }
  if (cfg.dsp.pitch_min_hz <= 0.0 || cfg.dsp.pitch_max_hz <= cfg.dsp.pitch_min_hz) {
    throw ConfigError("pitch range must satisfy 0 < min < max");
  }
  if (cfg.dsp.lpc_order < 2) throw ConfigError("dsp.lpc_order must be >= 2");
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  auto join_ints = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(v[i]);
    }
    return s;
  };
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("manifest", cfg.manifest);
  out.emplace_back("features_csv", cfg.features_csv);
  out.emplace_back("output_dir", cfg.output_dir);
  {
    std::string s;
    for (std::size_t i = 0; i < cfg.feature_sets.size(); ++i) {
      if (i) s += ",";
      s += to_string(cfg.feature_sets[i]);
    }
    out.emplace_back("feature_set", s);
  }
  out.emplace_back("grouping", cfg.grouping == Grouping::per_year ? "per_year" : "per_band");
  {
    std::string s;
    for (std::size_t i = 0; i < cfg.speech_types.size(); ++i) {
      if (i) s += ",";
      s += to_string(cfg.speech_types[i]);
    }
    out.emplace_back("speech_type", s);
  }
  {
    std::string s;
    for (std::size_t i = 0; i < cfg.clustering.size(); ++i) {
      if (i) s += ",";
      s += cfg.clustering[i] ? "ac" : "bc";
    }
    out.emplace_back("clustering", s);
  }
  out.emplace_back("cutoff", csv::format_double(cfg.cutoff));
  out.emplace_back("smote", cfg.smote ? "on" : "off");
  out.emplace_back("smote_k", std::to_string(cfg.smote_k));
  out.emplace_back("grid.n_trees", join_ints(cfg.grid_n_trees));
  {
    std::string s;
    for (std::size_t i = 0; i < cfg.grid_k.size(); ++i) {
      if (i) s += ",";
      s += k_candidates_to_string(cfg.grid_k[i]);
    }
    out.emplace_back("grid.k", s);
  }
  out.emplace_back("grid.min_samples_split", join_ints(cfg.grid_min_split));
  out.emplace_back("grid.max_depth",
                   cfg.grid_max_depth < 0 ? "none" : std::to_string(cfg.grid_max_depth));
  out.emplace_back("folds", std::to_string(cfg.folds));
  out.emplace_back("repeats", std::to_string(cfg.repeats));
  out.emplace_back("seed", std::to_string(cfg.seed));
  out.emplace_back("jobs", std::to_string(cfg.jobs));
  out.emplace_back("strict", cfg.strict ? "on" : "off");
  out.emplace_back("segment_window_s", csv::format_double(cfg.segment_window_s));
  out.emplace_back("stats_ages", join_ints(cfg.stats_ages));
  out.emplace_back("dsp.sample_rate", csv::format_double(cfg.dsp.sample_rate));
  out.emplace_back("dsp.frame_length_s", csv::format_double(cfg.dsp.frame_length_s));
  out.emplace_back("dsp.frame_hop_s", csv::format_double(cfg.dsp.frame_hop_s));
  out.emplace_back("dsp.normalize", cfg.dsp.normalize ? "on" : "off");
  out.emplace_back("dsp.pitch_min_hz", csv::format_double(cfg.dsp.pitch_min_hz));
  out.emplace_back("dsp.pitch_max_hz", csv::format_double(cfg.dsp.pitch_max_hz));
  out.emplace_back("dsp.voicing_threshold", csv::format_double(cfg.dsp.voicing_threshold));
  out.emplace_back("dsp.energy_gate", csv::format_double(cfg.dsp.energy_gate));
  out.emplace_back("dsp.lpc_order", std::to_string(cfg.dsp.lpc_order));
  out.emplace_back("dsp.preemphasis", csv::format_double(cfg.dsp.preemphasis));
  out.emplace_back("dsp.formant_min_hz", csv::format_double(cfg.dsp.formant_min_hz));
  out.emplace_back("dsp.formant_max_hz", csv::format_double(cfg.dsp.formant_max_hz));
  out.emplace_back("dsp.formant_max_bw_hz", csv::format_double(cfg.dsp.formant_max_bw_hz));
  out.emplace_back("dsp.nfft", std::to_string(cfg.dsp.nfft));
  return out;
}

}  // namespace kidvox
