// tests/test_corpus.cpp

// Copyright 2026  The attrsv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "attrsv/corpus.hpp"

#include <doctest.h>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <filesystem>
#include <set>

#include "attrsv/rng.hpp"
#include "attrsv/serialize.hpp"
#include "test_util.hpp"

using namespace attrsv;
using attrsv::testing::TempDir;

namespace {

const char *kTinyManifest =
    R"({"attributes":[{"name":"gender","classes":["g0","g1"]},{"name":"nationality","classes":["n0","n1","n2"]},{"name":"age","classes":["a0","a1"]},{"name":"profession","classes":["p0","p1"]}]}
{"speaker_id":"s1","labels":{"gender":"g0","nationality":"n1","age":"a0","profession":"p1"},"clips":[{"id":"s1_a","path":"wav/s1_a.wav"},{"id":"s1_b","path":"wav/s1_b.wav"}]}
{"speaker_id":"s2","labels":{"gender":"g1","nationality":"n2","age":"a1","profession":"p0"},"clips":[{"id":"s2_a","path":"wav/s2_a.wav"},{"id":"s2_b","path":"wav/s2_b.wav"}]}
)";

double band_energy(const dsp::AudioClip &clip, double lo_hz, double hi_hz) {
  const int n = 4096;
  REQUIRE(clip.samples.size() >= static_cast<std::size_t>(n));
  std::vector<double> buf(clip.samples.begin(), clip.samples.begin() + n);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, buf);
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double hz = static_cast<double>(k) * clip.sample_rate / n;
    if (hz >= lo_hz && hz <= hi_hz) acc += std::norm(spec[k]);
  }
  return acc;
}

}  // namespace

TEST_CASE("schema validation and hashing") {
  auto schema = corpus::AttributeSchema::defaults();
  schema.validate();
  CHECK(schema.attributes.size() == 4);
  CHECK(schema.attributes[0].name == "gender");
  CHECK(schema.attributes[3].classes.size() == 10);
  CHECK(schema.hash().size() == 16);

  auto other = corpus::AttributeSchema::defaults(2, 8, 6, 9);
  CHECK(other.hash() != schema.hash());

  corpus::AttributeSchema dup = schema;
  dup.attributes[1].name = "gender";
  CHECK_THROWS_AS(dup.validate(), DataError);

  corpus::AttributeSchema single = schema;
  single.attributes[0].classes = {"only"};
  CHECK_THROWS_AS(single.validate(), DataError);
}

TEST_CASE("manifest: minimal two-speaker file loads") {
  TempDir dir("manifest");
  write_text_file(dir.file("m.jsonl"), kTinyManifest);
  const auto m = corpus::load_manifest(dir.file("m.jsonl"));
  CHECK(m.schema.attributes.size() == 4);
  CHECK(m.speakers.size() == 2);
  CHECK(m.speakers[0].labels == std::vector<int>{0, 1, 0, 1});
  CHECK(m.owner("s2_b").speaker_id == "s2");
  // paths resolve relative to the manifest
  CHECK(m.clip_paths.at("s1_a") == (dir.path / "wav/s1_a.wav").string());
}

TEST_CASE("manifest: validation failures name the offender") {
  TempDir dir("manifest");

  SUBCASE("missing label") {
    std::string text(kTinyManifest);
    const auto pos = text.find(R"("age":"a1",)");
    text.erase(pos, std::string(R"("age":"a1",)").size());
    write_text_file(dir.file("m.jsonl"), text);
    CHECK_THROWS_WITH_AS(corpus::load_manifest(dir.file("m.jsonl")),
                         doctest::Contains("'s2' lacks a 'age' label"), DataError);
  }
  SUBCASE("unknown class") {
    std::string text(kTinyManifest);
    const auto pos = text.find(R"("nationality":"n2")");
    text.replace(pos, std::string(R"("nationality":"n2")").size(), R"("nationality":"zz")");
    write_text_file(dir.file("m.jsonl"), text);
    CHECK_THROWS_WITH_AS(corpus::load_manifest(dir.file("m.jsonl")),
                         doctest::Contains("unknown nationality class 'zz'"), DataError);
  }
  SUBCASE("duplicate speaker") {
    std::string text(kTinyManifest);
    const auto pos = text.find("\"s2\"");
    text.replace(pos, 4, "\"s1\"");
    write_text_file(dir.file("m.jsonl"), text);
    CHECK_THROWS_WITH_AS(corpus::load_manifest(dir.file("m.jsonl")),
                         doctest::Contains("duplicate speaker id"), DataError);
  }
}

TEST_CASE("manifest round trip") {
  TempDir dir("manifest");
  write_text_file(dir.file("m.jsonl"), kTinyManifest);
  const auto m = corpus::load_manifest(dir.file("m.jsonl"));
  std::map<std::string, std::string> rel;
  for (const auto &spk : m.speakers)
    for (const auto &cid : spk.clip_ids) rel[cid] = "wav/" + cid + ".wav";
  corpus::save_manifest(dir.file("back.jsonl"), m.schema, m.speakers, rel);
  const auto again = corpus::load_manifest(dir.file("back.jsonl"));
  CHECK(again.schema.hash() == m.schema.hash());
  CHECK(again.speakers.size() == m.speakers.size());
  for (std::size_t i = 0; i < m.speakers.size(); ++i) {
    CHECK(again.speakers[i].speaker_id == m.speakers[i].speaker_id);
    CHECK(again.speakers[i].labels == m.speakers[i].labels);
    CHECK(again.speakers[i].clip_ids == m.speakers[i].clip_ids);
  }
  // deterministic writer
  corpus::save_manifest(dir.file("back2.jsonl"), m.schema, m.speakers, rel);
  CHECK(read_text_file(dir.file("back.jsonl")) == read_text_file(dir.file("back2.jsonl")));
}

TEST_CASE("generate_trials: counts, targets, determinism") {
  TempDir dir("trials");
  write_text_file(dir.file("m.jsonl"), kTinyManifest);
  const auto m = corpus::load_manifest(dir.file("m.jsonl"));

  SUBCASE("exhaustive target check on the 2x2 corpus") {
    const auto set = corpus::generate_trials(m, 2, 4, 42);
    CHECK(set.n_pos == 2);
    CHECK(set.n_neg == 4);
    CHECK_FALSE(set.pos_with_replacement);
    CHECK_FALSE(set.neg_with_replacement);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto &t : set.trials) {
      CHECK(t.clip_a != t.clip_b);
      const bool same = m.owner(t.clip_a).speaker_id == m.owner(t.clip_b).speaker_id;
      CHECK(t.target == same);
      auto key = std::minmax(t.clip_a, t.clip_b);
      CHECK(seen.insert({key.first, key.second}).second);  // no duplicate pairs
    }
  }
  SUBCASE("degenerate request: only negatives") {
    const auto set = corpus::generate_trials(m, 0, 5, 7);
    CHECK(set.trials.size() == 5);
    for (const auto &t : set.trials) CHECK_FALSE(t.target);
  }
  SUBCASE("pool exhaustion flips the replacement flag") {
    const auto set = corpus::generate_trials(m, 10, 0, 7);  // pool has only 2 positives
    CHECK(set.n_pos == 10);
    CHECK(set.pos_with_replacement);
  }
  SUBCASE("fixed seed reproduces") {
    const auto a = corpus::generate_trials(m, 2, 4, 11);
    const auto b = corpus::generate_trials(m, 2, 4, 11);
    REQUIRE(a.trials.size() == b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
      CHECK(a.trials[i].clip_a == b.trials[i].clip_a);
      CHECK(a.trials[i].clip_b == b.trials[i].clip_b);
    }
  }
  SUBCASE("impossible requests error") {
    corpus::Manifest solo;
    solo.schema = m.schema;
    corpus::SpeakerRecord rec;
    rec.speaker_id = "only";
    rec.labels = {0, 0, 0, 0};
    rec.clip_ids = {"only_a"};
    solo.speakers.push_back(rec);
    solo.speaker_of_clip["only_a"] = 0;
    CHECK_THROWS_WITH_AS(corpus::generate_trials(solo, 1, 0, 1),
                         doctest::Contains("no speaker has 2 clips"), DataError);
    CHECK_THROWS_WITH_AS(corpus::generate_trials(solo, 0, 1, 1),
                         doctest::Contains("fewer than 2 speakers"), DataError);
  }
}

TEST_CASE("trial file round trip") {
  TempDir dir("trials");
  std::vector<corpus::TrialPair> trials = {{"a", "b", true}, {"c", "d", false}};
  corpus::save_trials(dir.file("t.txt"), trials);
  CHECK(read_text_file(dir.file("t.txt")) == "1 a b\n0 c d\n");
  const auto back = corpus::load_trials(dir.file("t.txt"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].target);
  CHECK(back[1].clip_b == "d");
  write_text_file(dir.file("bad.txt"), "2 x y\n");
  CHECK_THROWS_AS(corpus::load_trials(dir.file("bad.txt")), DataError);
}

TEST_CASE("label_distribution") {
  corpus::AttributeSchema schema = corpus::AttributeSchema::defaults(2, 2, 2, 2);
  std::vector<corpus::SpeakerRecord> recs(4);
  for (int i = 0; i < 4; ++i) {
    recs[i].speaker_id = "s" + std::to_string(i);
    recs[i].labels = {i % 2, i == 3 ? 1 : 0, 0, 0};
  }
  const Vector gender = corpus::label_distribution(recs, schema, "gender");
  CHECK(gender[0] == doctest::Approx(0.5));
  CHECK(gender[1] == doctest::Approx(0.5));
  const Vector nat = corpus::label_distribution(recs, schema, "nationality");
  CHECK(nat[0] == doctest::Approx(0.75));
  CHECK(nat[1] == doctest::Approx(0.25));
  CHECK(nat.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(corpus::label_distribution(recs, schema, "height"), DataError);
}

TEST_CASE("synthesize_corpus: counts, manifest, determinism") {
  TempDir dir("synth");
  corpus::SynthSpec spec;
  spec.n_speakers = 6;
  spec.clips_per_speaker = 3;
  spec.clip_duration_sec = 0.2;
  spec.schema = corpus::AttributeSchema::defaults(2, 3, 2, 3);

  const auto r1 = corpus::synthesize_corpus(spec, 99, (dir.path / "one").string());
  CHECK(r1.manifest.speakers.size() == 6);
  CHECK(r1.wav_paths.size() == 18);
  for (const auto &p : r1.wav_paths) CHECK(std::filesystem::exists(p));

  // reload through the public loader
  const auto loaded = corpus::load_manifest(r1.manifest_path);
  CHECK(loaded.speakers.size() == 6);
  CHECK(loaded.schema.hash() == spec.schema.hash());

  // byte-identical reruns
  const auto r2 = corpus::synthesize_corpus(spec, 99, (dir.path / "two").string());
  REQUIRE(r2.wav_paths.size() == r1.wav_paths.size());
  for (std::size_t i = 0; i < r1.wav_paths.size(); ++i)
    CHECK(read_binary_file(r1.wav_paths[i]) == read_binary_file(r2.wav_paths[i]));
  CHECK(read_text_file(r1.manifest_path) == read_text_file(r2.manifest_path));

  // a different seed produces different audio
  const auto r3 = corpus::synthesize_corpus(spec, 100, (dir.path / "three").string());
  CHECK(read_binary_file(r1.wav_paths[0]) != read_binary_file(r3.wav_paths[0]));
}

TEST_CASE("synthesize_corpus: validation") {
  corpus::SynthSpec spec;
  spec.n_speakers = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.n_speakers = 1;
  spec.clip_duration_sec = 0.01;  // shorter than a 25 ms frame
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("gender class moves fundamental-band energy") {
  corpus::SynthSpec spec;
  spec.clip_duration_sec = 0.5;
  // identical labels except gender; class 0 puts the fundamental below
  // ~140 Hz, class 1 above ~167 Hz, so the low band separates the two
  std::vector<int> low{0, 3, 2, 4};
  std::vector<int> high{1, 3, 2, 4};
  double e_low = 0.0, e_high = 0.0;
  for (int clip = 0; clip < 3; ++clip) {
    const auto a = corpus::render_clip(spec, low, mix_seed(5, 1), clip, "a");
    const auto b = corpus::render_clip(spec, high, mix_seed(5, 1), clip, "b");
    e_low += band_energy(a, 85, 150);
    e_high += band_energy(b, 85, 150);
  }
  CHECK(e_low > 5.0 * e_high);
}

TEST_CASE("voice traits follow labels") {
  corpus::SynthSpec spec;
  const auto schema = spec.schema;
  std::vector<int> labels{0, 0, 0, 0};
  const auto v0 = corpus::derive_voice(spec, labels, 1);
  labels[0] = 1;
  const auto v1 = corpus::derive_voice(spec, labels, 1);
  CHECK(v1.f0_hz > v0.f0_hz + 30.0);

  labels = {0, 0, 0, 0};
  const auto t0 = corpus::derive_voice(spec, labels, 2);
  labels[2] = static_cast<int>(schema.attributes[2].classes.size()) - 1;
  const auto t1 = corpus::derive_voice(spec, labels, 2);
  CHECK(t1.tilt_db_per_oct > t0.tilt_db_per_oct + 5.0);

  labels = {0, 0, 0, 0};
  const auto p0 = corpus::derive_voice(spec, labels, 3);
  labels[3] = static_cast<int>(schema.attributes[3].classes.size()) - 1;
  const auto p1 = corpus::derive_voice(spec, labels, 3);
  CHECK(p1.am_rate_hz > 5.0 * p0.am_rate_hz);
}
