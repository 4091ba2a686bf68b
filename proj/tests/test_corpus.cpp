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

#include <string>
#include <vector>

#include "doctest.h"
#include "kidvox/corpus.hpp"
#include "kidvox/errors.hpp"
#include "test_util.hpp"

using namespace kidvox;
namespace tu = kidvox::testutil;

TEST_CASE("enum tokens round-trip and reject junk") {
  CHECK(parse_sex("F") == Sex::F);
  CHECK(parse_sex("M") == Sex::M);
  CHECK(to_string(Sex::F) == "F");
  CHECK(parse_speech_type("scripted") == SpeechType::scripted);
  CHECK(parse_speech_type("spontaneous") == SpeechType::spontaneous);
  CHECK(parse_quality("good") == Quality::good);
  CHECK(parse_quality("na") == Quality::na);
  CHECK_THROWS_AS(parse_sex("girl"), DataError);
  CHECK_THROWS_AS(parse_speech_type("read"), DataError);
  CHECK_THROWS_AS(parse_quality("fine"), DataError);
}

TEST_CASE("load_manifest preserves order and fields") {
  tu::TempDir dir;
  const std::string path = dir.file("m.csv");
  tu::spit(path,
           "subject_id,age,sex,speech_type,quality,audio_path\n"
           "s1,7,F,scripted,good,a/1.wav\n"
           "s2,13,M,spontaneous,na,a/2.wav\n");
  const auto entries = load_manifest(path);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].subject_id == "s1");
  CHECK(entries[0].age == 7);
  CHECK(entries[0].sex == Sex::F);
  CHECK(entries[0].speech_type == SpeechType::scripted);
  CHECK(entries[0].quality == Quality::good);
  CHECK(entries[0].audio_path == "a/1.wav");
  CHECK(entries[1].subject_id == "s2");
  CHECK(entries[1].quality == Quality::na);
}

TEST_CASE("load_manifest accepts a header-only file") {
  tu::TempDir dir;
  tu::spit(dir.file("e.csv"), "subject_id,age,sex,speech_type,quality,audio_path\n");
  CHECK(load_manifest(dir.file("e.csv")).empty());
}

TEST_CASE("load_manifest rejects malformed rows with their line number") {
  tu::TempDir dir;
  const std::string header = "subject_id,age,sex,speech_type,quality,audio_path\n";

  tu::spit(dir.file("h.csv"), "id,age,sex,speech_type,quality,audio_path\ns1,7,F,scripted,good,x\n");
  CHECK_THROWS_AS(load_manifest(dir.file("h.csv")), DataError);

  tu::spit(dir.file("m1.csv"), header + "s1,7,F,scripted,good,x\ns2,16,M,scripted,good,y\n");
  try {
    load_manifest(dir.file("m1.csv"));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("age out of range") != std::string::npos);
    CHECK(msg.find("row 2") != std::string::npos);
  }

  tu::spit(dir.file("m2.csv"), header + "s1,seven,F,scripted,good,x\n");
  CHECK_THROWS_AS(load_manifest(dir.file("m2.csv")), DataError);

  tu::spit(dir.file("m3.csv"), header + "s1,7,girl,scripted,good,x\n");
  CHECK_THROWS_AS(load_manifest(dir.file("m3.csv")), DataError);

  tu::spit(dir.file("m4.csv"), header + ",7,F,scripted,good,x\n");
  CHECK_THROWS_AS(load_manifest(dir.file("m4.csv")), DataError);
}

TEST_CASE("filter_quality keeps good rows and unrated spontaneous rows") {
  ManifestEntry good, bad, questionable, spont;
  good.subject_id = "g";
  good.quality = Quality::good;
  bad.subject_id = "b";
  bad.quality = Quality::bad;
  questionable.subject_id = "q";
  questionable.quality = Quality::questionable;
  spont.subject_id = "s";
  spont.speech_type = SpeechType::spontaneous;
  spont.quality = Quality::na;

  const auto kept = filter_quality({good, bad, questionable, spont});
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].subject_id == "g");
  CHECK(kept[1].subject_id == "s");

  // Idempotence.
  const auto again = filter_quality(kept);
  CHECK(again.size() == kept.size());
}

TEST_CASE("segment_pcm keeps a remainder only when at least half a window") {
  const double rate = 16000.0;

  SUBCASE("12.0 s: two full windows, 2.0 s remainder dropped") {
    const auto segs = segment_pcm(tu::make_silence(12.0, rate), 5.0);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].samples.size() == 80000);
    CHECK(segs[1].samples.size() == 80000);
  }
  SUBCASE("9.9 s: 4.9 s remainder kept") {
    const auto segs = segment_pcm(tu::make_silence(9.9, rate), 5.0);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].samples.size() == 80000);
    CHECK(segs[1].duration_s() == doctest::Approx(4.9));
  }
  SUBCASE("4.0 s: a single short segment") {
    const auto segs = segment_pcm(tu::make_silence(4.0, rate), 5.0);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].duration_s() == doctest::Approx(4.0));
  }
  SUBCASE("1.0 s: below half a window, nothing kept") {
    CHECK(segment_pcm(tu::make_silence(1.0, rate), 5.0).empty());
  }
  SUBCASE("empty audio is an error") {
    Pcm empty;
    empty.sample_rate = rate;
    CHECK_THROWS_AS(segment_pcm(empty, 5.0), DataError);
  }
}

TEST_CASE("segmentation conserves duration up to the dropped remainder") {
  const double rate = 16000.0;
  for (double dur : {5.0, 7.49, 7.5, 12.3, 20.0}) {
    const Pcm audio = tu::make_silence(dur, rate);
    const auto segs = segment_pcm(audio, 5.0);
    double total = 0.0;
    for (const auto& s : segs) total += s.duration_s();
    const double dropped = audio.duration_s() - total;
    CHECK(dropped >= -1e-9);
    CHECK(dropped < 2.5);
  }
}

TEST_CASE("segment_recording copies identity and numbers segments") {
  ManifestEntry e;
  e.subject_id = "kid";
  e.age = 8;
  e.sex = Sex::M;
  e.speech_type = SpeechType::spontaneous;
  const auto samples = segment_recording(e, tu::make_silence(12.6, 16000.0), 5.0);
  REQUIRE(samples.size() == 3);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].subject_id == "kid");
    CHECK(samples[i].age == 8);
    CHECK(samples[i].sex == Sex::M);
    CHECK(samples[i].speech_type == SpeechType::spontaneous);
    CHECK(samples[i].segment_index == static_cast<int>(i));
    REQUIRE(samples[i].audio.has_value());
  }
  CHECK(samples[2].audio->duration_s() == doctest::Approx(2.6));
}

namespace {
Sample mk(const std::string& id, int age) {
  Sample s;
  s.subject_id = id;
  s.age = age;
  return s;
}
}  // namespace

TEST_CASE("group_samples partitions by year or band") {
  const std::vector<Sample> samples = {mk("a", 5), mk("b", 5), mk("c", 13)};

  const auto years = group_samples(samples, Grouping::per_year);
  REQUIRE(years.size() == 2);
  CHECK(years[0].first.label == "5");
  CHECK(years[0].second == std::vector<std::size_t>{0, 1});
  CHECK(years[1].first.label == "13");
  CHECK(years[1].second == std::vector<std::size_t>{2});

  const auto bands = group_samples(samples, Grouping::per_band);
  REQUIRE(bands.size() == 2);
  CHECK(bands[0].first.label == "5-8");
  CHECK(bands[0].second.size() == 2);
  CHECK(bands[1].first.label == "13-15");
  CHECK(bands[1].second.size() == 1);

  // Partition property over a denser sample list.
  std::vector<Sample> many;
  for (int age = 5; age <= 15; ++age) {
    for (int i = 0; i < age; ++i) many.push_back(mk("x", age));
  }
  for (auto mode : {Grouping::per_year, Grouping::per_band}) {
    const auto groups = group_samples(many, mode);
    std::vector<bool> seen(many.size(), false);
    for (const auto& [g, idx] : groups) {
      for (std::size_t i : idx) {
        CHECK(!seen[i]);
        seen[i] = true;
      }
    }
    for (bool b : seen) CHECK(b);
  }
  CHECK(group_samples({}, Grouping::per_year).empty());
}

TEST_CASE("feature CSV round trip is byte-stable") {
  tu::TempDir dir;
  std::vector<Sample> samples;
  Sample s1 = mk("s1", 6);
  s1.sex = Sex::F;
  FeatureVector v1;
  v1.set("alpha", 0.1);
  v1.set("beta", -3.25);
  s1.features = v1;
  Sample s2 = mk("s2", 6);
  s2.sex = Sex::M;
  s2.segment_index = 4;
  FeatureVector v2;
  v2.set("beta", 1e-7);  // alpha left missing
  s2.features = v2;
  samples = {s1, s2};

  const std::vector<std::string> names = {"alpha", "beta"};
  write_feature_csv(dir.file("f.csv"), samples, names);
  const auto loaded = load_feature_csv(dir.file("f.csv"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].subject_id == "s1");
  CHECK(loaded[0].features->get("alpha") == 0.1);
  CHECK(loaded[0].features->get("beta") == -3.25);
  CHECK(loaded[1].sex == Sex::M);
  CHECK(loaded[1].segment_index == 4);
  CHECK(!loaded[1].features->get("alpha").has_value());
  CHECK(loaded[1].features->get("beta") == 1e-7);

  write_feature_csv(dir.file("g.csv"), loaded, names);
  CHECK(tu::slurp(dir.file("f.csv")) == tu::slurp(dir.file("g.csv")));
}

TEST_CASE("load_feature_csv validates its header and cells") {
  tu::TempDir dir;
  tu::spit(dir.file("bad_head.csv"), "subject,age,sex,speech_type,segment_index,f\nx,7,F,scripted,0,1\n");
  CHECK_THROWS_AS(load_feature_csv(dir.file("bad_head.csv")), DataError);

  tu::spit(dir.file("dup.csv"),
           "subject_id,age,sex,speech_type,segment_index,f,f\nx,7,F,scripted,0,1,2\n");
  CHECK_THROWS_AS(load_feature_csv(dir.file("dup.csv")), DataError);

  tu::spit(dir.file("bad_cell.csv"),
           "subject_id,age,sex,speech_type,segment_index,f\nx,7,F,scripted,0,oops\n");
  try {
    load_feature_csv(dir.file("bad_cell.csv"));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}
