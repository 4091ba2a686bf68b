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

#include "kidvox/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "kidvox/csv.hpp"
#include "kidvox/errors.hpp"

namespace kidvox {

std::string to_string(Sex s) { return s == Sex::F ? "F" : "M"; }

std::string to_string(SpeechType t) {
  return t == SpeechType::scripted ? "scripted" : "spontaneous";
}

std::string to_string(Quality q) {
  switch (q) {
    case Quality::good: return "good";
    case Quality::questionable: return "questionable";
    case Quality::bad: return "bad";
    default: return "na";
  }
}

Sex parse_sex(const std::string& s) {
  if (s == "F") return Sex::F;
  if (s == "M") return Sex::M;
  throw DataError("unknown sex token '" + s + "' (expected F or M)");
}

SpeechType parse_speech_type(const std::string& s) {
  if (s == "scripted") return SpeechType::scripted;
  if (s == "spontaneous") return SpeechType::spontaneous;
  throw DataError("unknown speech_type token '" + s + "'");
}

Quality parse_quality(const std::string& s) {
  if (s == "good") return Quality::good;
  if (s == "questionable") return Quality::questionable;
  if (s == "bad") return Quality::bad;
  if (s == "na") return Quality::na;
  throw DataError("unknown quality token '" + s + "'");
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  static const std::vector<std::string> kHeader = {"subject_id", "age",     "sex",
                                                   "speech_type", "quality", "audio_path"};
  csv::Table t = csv::read_file(path);
  if (t.header != kHeader) {
    throw DataError(path + ": manifest header must be subject_id,age,sex,speech_type,quality,audio_path");
  }
  std::vector<ManifestEntry> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = path + " row " + std::to_string(i + 1);
    try {
      ManifestEntry e;
      e.subject_id = r[0];
      if (e.subject_id.empty()) throw DataError("empty subject_id");
      e.age = static_cast<int>(csv::parse_long(r[1], "age"));
      if (e.age < 5 || e.age > 15) throw DataError("age out of range [5,15]");
      e.sex = parse_sex(r[2]);
      e.speech_type = parse_speech_type(r[3]);
      e.quality = parse_quality(r[4]);
      e.audio_path = r[5];
      if (e.audio_path.empty()) throw DataError("empty audio_path");
      out.push_back(std::move(e));
    } catch (const DataError& err) {
      throw DataError(where + ": " + err.what());
    }
  }
  return out;
}

std::vector<ManifestEntry> filter_quality(const std::vector<ManifestEntry>& entries) {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.quality == Quality::good || e.speech_type == SpeechType::spontaneous) {
      out.push_back(e);
    }
  }
  return out;
}

std::vector<Pcm> segment_pcm(const Pcm& audio, double window_s) {
  if (audio.samples.empty()) throw DataError("cannot segment empty audio");
  if (audio.sample_rate <= 0) throw DataError("audio has no sample rate");
  if (window_s <= 0) throw DataError("segment window must be positive");

  const std::size_t win = static_cast<std::size_t>(std::llround(window_s * audio.sample_rate));
  std::vector<Pcm> out;
  std::size_t pos = 0;
  while (pos + win <= audio.samples.size()) {
    Pcm seg;
    seg.sample_rate = audio.sample_rate;
    seg.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(pos),
                       audio.samples.begin() + static_cast<std::ptrdiff_t>(pos + win));
    out.push_back(std::move(seg));
    pos += win;
  }
  const std::size_t rest = audio.samples.size() - pos;
  if (rest * 2 >= win) {  // remainder kept iff >= window/2
    Pcm seg;
    seg.sample_rate = audio.sample_rate;
    seg.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(pos), audio.samples.end());
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<Sample> segment_recording(const ManifestEntry& entry, const Pcm& audio,
                                      double window_s) {
  auto pieces = segment_pcm(audio, window_s);
  std::vector<Sample> out;
  out.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Sample s;
    s.subject_id = entry.subject_id;
    s.age = entry.age;
    s.sex = entry.sex;
    s.speech_type = entry.speech_type;
    s.segment_index = static_cast<int>(i);
    s.audio = std::move(pieces[i]);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

struct Band {
  const char* label;
  int lo, hi;
};
constexpr Band kBands[] = {{"5-8", 5, 8}, {"9-12", 9, 12}, {"13-15", 13, 15}};

}  // namespace

std::vector<std::pair<AgeGroup, std::vector<std::size_t>>> group_samples(
    const std::vector<Sample>& samples, Grouping mode) {
  std::vector<std::pair<AgeGroup, std::vector<std::size_t>>> out;
  if (mode == Grouping::per_year) {
    std::map<int, std::vector<std::size_t>> by_age;
    for (std::size_t i = 0; i < samples.size(); ++i) by_age[samples[i].age].push_back(i);
    for (auto& [age, idx] : by_age) {
      out.push_back({AgeGroup{std::to_string(age), {age}}, std::move(idx)});
    }
  } else {
    for (const auto& band : kBands) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].age >= band.lo && samples[i].age <= band.hi) idx.push_back(i);
      }
      if (idx.empty()) continue;
      AgeGroup g;
      g.label = band.label;
      for (int a = band.lo; a <= band.hi; ++a) g.ages.push_back(a);
      out.push_back({std::move(g), std::move(idx)});
    }
  }
  return out;
}

void write_feature_csv(const std::string& path, const std::vector<Sample>& samples,
                       const std::vector<std::string>& feature_names) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  std::vector<std::string> header = {"subject_id", "age", "sex", "speech_type", "segment_index"};
  header.insert(header.end(), feature_names.begin(), feature_names.end());
  f << csv::join(header) << "\n";
  for (const auto& s : samples) {
    std::vector<std::string> row = {s.subject_id, std::to_string(s.age), to_string(s.sex),
                                    to_string(s.speech_type), std::to_string(s.segment_index)};
    for (const auto& name : feature_names) {
      std::optional<double> v = s.features ? s.features->get(name) : std::nullopt;
      row.push_back(v ? csv::format_double(*v) : std::string());
    }
    f << csv::join(row) << "\n";
  }
  if (!f) throw DataError("short write to " + path);
}

std::vector<Sample> load_feature_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  static const char* kMeta[] = {"subject_id", "age", "sex", "speech_type", "segment_index"};
  if (t.header.size() < 6) throw DataError(path + ": feature CSV needs meta columns plus features");
  for (int i = 0; i < 5; ++i) {
    if (t.header[static_cast<std::size_t>(i)] != kMeta[i]) {
      throw DataError(path + ": feature CSV header must start with subject_id,age,sex,speech_type,segment_index");
    }
  }
  std::set<std::string> seen;
  for (std::size_t c = 5; c < t.header.size(); ++c) {
    if (!seen.insert(t.header[c]).second) {
      throw DataError(path + ": duplicate feature column " + t.header[c]);
    }
  }
  std::vector<Sample> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::string where = path + " row " + std::to_string(i + 1);
    try {
      Sample s;
      s.subject_id = r[0];
      s.age = static_cast<int>(csv::parse_long(r[1], "age"));
      s.sex = parse_sex(r[2]);
      s.speech_type = parse_speech_type(r[3]);
      s.segment_index = static_cast<int>(csv::parse_long(r[4], "segment_index"));
      FeatureVector fv;
      for (std::size_t c = 5; c < r.size(); ++c) {
        if (r[c].empty()) continue;  // missing feature
        fv.set(t.header[c], csv::parse_double(r[c], t.header[c]));
      }
      s.features = std::move(fv);
      out.push_back(std::move(s));
    } catch (const DataError& err) {
      throw DataError(where + ": " + err.what());
    }
  }
  return out;
}

}  // namespace kidvox
