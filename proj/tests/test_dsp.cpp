// tests/test_dsp.cpp

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

#include "attrsv/dsp.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <fstream>

#include "attrsv/rng.hpp"
#include "attrsv/serialize.hpp"
#include "test_util.hpp"

using namespace attrsv;
using attrsv::testing::TempDir;

namespace {

dsp::AudioClip sine_clip(double freq, double amplitude, int rate, double seconds,
                         const std::string &id = "sine") {
  dsp::AudioClip clip;
  clip.sample_rate = rate;
  clip.source_id = id;
  const auto n = static_cast<std::size_t>(rate * seconds);
  clip.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t)
    clip.samples[t] = amplitude * std::sin(2.0 * M_PI * freq * t / rate);
  return clip;
}

dsp::AudioClip noise_clip(double amplitude, int rate, double seconds, std::uint64_t seed) {
  dsp::AudioClip clip;
  clip.sample_rate = rate;
  clip.source_id = "noise";
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(rate * seconds);
  clip.samples.resize(n);
  for (auto &s : clip.samples) s = amplitude * (2.0 * rng.uniform() - 1.0);
  return clip;
}

// Raw PCM16 WAV writer independent of dsp::write_wav, for reader tests.
void write_raw_wav(const std::string &path, const std::vector<std::int16_t> &interleaved,
                   int channels, int rate) {
  std::ofstream out(path, std::ios::binary);
  auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char *>(&v), 4); };
  auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char *>(&v), 2); };
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
  out.write("RIFF", 4);
  u32(36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  u32(16);
  u16(1);
  u16(static_cast<std::uint16_t>(channels));
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(rate * channels * 2));
  u16(static_cast<std::uint16_t>(channels * 2));
  u16(16);
  out.write("data", 4);
  u32(data_bytes);
  for (std::int16_t s : interleaved) u16(static_cast<std::uint16_t>(s));
}

}  // namespace

TEST_CASE("load_wav: one second of silence") {
  TempDir dir("dsp");
  write_raw_wav(dir.file("silence.wav"), std::vector<std::int16_t>(16000, 0), 1, 16000);
  const auto clip = dsp::load_wav(dir.file("silence.wav"));
  CHECK(clip.sample_rate == 16000);
  CHECK(clip.samples.size() == 16000);
  for (double s : clip.samples) CHECK(s == 0.0);
}

TEST_CASE("load_wav: symmetric stereo cancels to zero") {
  TempDir dir("dsp");
  std::vector<std::int16_t> frames;
  for (int i = 0; i < 100; ++i) {
    frames.push_back(16384);   // +0.5
    frames.push_back(-16384);  // -0.5
  }
  write_raw_wav(dir.file("stereo.wav"), frames, 2, 8000);
  const auto clip = dsp::load_wav(dir.file("stereo.wav"));
  CHECK(clip.samples.size() == 100);
  for (double s : clip.samples) CHECK(s == 0.0);
}

TEST_CASE("load_wav: -32768 maps to exactly -1.0") {
  TempDir dir("dsp");
  write_raw_wav(dir.file("min.wav"), {static_cast<std::int16_t>(-32768)}, 1, 16000);
  const auto clip = dsp::load_wav(dir.file("min.wav"));
  REQUIRE(clip.samples.size() == 1);
  CHECK(clip.samples[0] == -1.0);
}

TEST_CASE("load_wav: error cases are reported distinctly") {
  TempDir dir("dsp");
  CHECK_THROWS_WITH_AS(dsp::load_wav(dir.file("absent.wav")),
                       doctest::Contains("file not found"), DataError);

  write_text_file(dir.file("garbage.wav"), "this is not a wav");
  CHECK_THROWS_WITH_AS(dsp::load_wav(dir.file("garbage.wav")),
                       doctest::Contains("not a RIFF/WAVE"), DataError);

  // IEEE float format tag
  {
    std::vector<std::uint8_t> bytes = read_binary_file(dir.file("garbage.wav"));
    write_raw_wav(dir.file("float.wav"), {0, 0}, 1, 16000);
    bytes = read_binary_file(dir.file("float.wav"));
    bytes[20] = 3;  // fmt tag -> IEEE float
    write_binary_file(dir.file("float.wav"), bytes);
    CHECK_THROWS_WITH_AS(dsp::load_wav(dir.file("float.wav")),
                         doctest::Contains("not integer PCM"), DataError);
  }
  // 8-bit depth
  {
    write_raw_wav(dir.file("8bit.wav"), {0, 0}, 1, 16000);
    auto bytes = read_binary_file(dir.file("8bit.wav"));
    bytes[34] = 8;
    write_binary_file(dir.file("8bit.wav"), bytes);
    CHECK_THROWS_WITH_AS(dsp::load_wav(dir.file("8bit.wav")),
                         doctest::Contains("unsupported bit depth"), DataError);
  }
  // zero-length data chunk
  {
    write_raw_wav(dir.file("empty.wav"), {}, 1, 16000);
    CHECK_THROWS_WITH_AS(dsp::load_wav(dir.file("empty.wav")),
                         doctest::Contains("zero-length"), DataError);
  }
}

TEST_CASE("write_wav / load_wav round trip") {
  TempDir dir("dsp");
  const auto clip = sine_clip(440.0, 0.5, 16000, 0.25);
  dsp::write_wav(dir.file("rt.wav"), clip);
  const auto back = dsp::load_wav(dir.file("rt.wav"));
  REQUIRE(back.samples.size() == clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    CHECK(back.samples[i] == doctest::Approx(clip.samples[i]).epsilon(1e-3));
}

TEST_CASE("frame count formula") {
  // 1 s at 16 kHz with 25 ms frames / 10 ms hop
  CHECK(dsp::frame_count(16000, 400, 160) == 98);
  const auto m = dsp::compute_mfcc(sine_clip(440.0, 0.5, 16000, 1.0));
  CHECK(m.frames() == 98);

  // property: holds for random lengths >= one frame
  Rng rng(1234);
  for (int i = 0; i < 200; ++i) {
    const long n = 400 + static_cast<long>(rng.uniform_u64(30000));
    const long expect = (n - 400) / 160 + 1;
    CHECK(dsp::frame_count(n, 400, 160) == expect);
  }
  CHECK(dsp::frame_count(399, 400, 160) == 0);
}

TEST_CASE("mfcc: digital silence gives the log-floor constant in every frame") {
  dsp::AudioClip clip;
  clip.sample_rate = 16000;
  clip.source_id = "silence";
  clip.samples.assign(16000, 0.0);
  dsp::MfccConfig cfg;
  const auto m = dsp::compute_mfcc(clip, cfg);

  // All filter energies hit the floor; the DCT of a constant vector is zero
  // except for coefficient 0.
  const double log_floor = std::log(cfg.log_floor);
  const double c0 = std::sqrt(static_cast<double>(cfg.n_mel_filters)) * log_floor;
  for (Eigen::Index f = 0; f < m.frames(); ++f) {
    CHECK(m.values(f, 0) == doctest::Approx(c0).epsilon(1e-9));
    for (Eigen::Index c = 1; c < m.n_coeffs(); ++c)
      CHECK(m.values(f, c) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  }
  // zero variance over frames
  for (Eigen::Index c = 0; c < m.n_coeffs(); ++c) {
    const double mean = m.values.col(c).mean();
    CHECK((m.values.col(c).array() - mean).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mfcc: distinct tones separate") {
  const auto a = dsp::compute_mfcc(sine_clip(440.0, 0.5, 16000, 1.0));
  const auto b = dsp::compute_mfcc(sine_clip(3000.0, 0.5, 16000, 1.0));
  const Vector mean_a = a.values.colwise().mean();
  const Vector mean_b = b.values.colwise().mean();
  CHECK((mean_a - mean_b).norm() > 1.0);
}

TEST_CASE("mfcc: pure function, bit-identical runs") {
  const auto clip = noise_clip(0.4, 16000, 0.5, 99);
  const auto m1 = dsp::compute_mfcc(clip);
  const auto m2 = dsp::compute_mfcc(clip);
  CHECK(m1.values == m2.values);
}

TEST_CASE("mfcc: amplitude scaling moves only coefficient 0") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto clip = noise_clip(0.5, 16000, 0.3, 1000 + trial);
    const double c = 0.1 + 0.8 * rng.uniform();
    dsp::AudioClip scaled = clip;
    for (auto &s : scaled.samples) s *= c;

    const auto base = dsp::compute_mfcc(clip);
    const auto moved = dsp::compute_mfcc(scaled);
    for (Eigen::Index f = 0; f < base.frames(); ++f)
      for (Eigen::Index k = 1; k < base.n_coeffs(); ++k)
        CHECK(base.values(f, k) == doctest::Approx(moved.values(f, k)).epsilon(1e-6));
    // coefficient 0 shifts by a frame-independent constant
    const double shift = moved.values(0, 0) - base.values(0, 0);
    CHECK(std::abs(shift) > 1e-6);
    for (Eigen::Index f = 1; f < base.frames(); ++f)
      CHECK(moved.values(f, 0) - base.values(f, 0) == doctest::Approx(shift).epsilon(1e-6));
  }
}

TEST_CASE("mfcc: errors") {
  dsp::MfccConfig cfg;
  dsp::AudioClip shorty = sine_clip(440.0, 0.5, 16000, 0.01);
  CHECK_THROWS_AS(dsp::compute_mfcc(shorty, cfg), DataError);

  dsp::MfccConfig bad = cfg;
  bad.n_coeffs = 30;  // > 26 filters
  CHECK_THROWS_AS(dsp::compute_mfcc(sine_clip(440.0, 0.5, 16000, 1.0), bad), ConfigError);
}

TEST_CASE("mfcc: resampling path matches target rate framing") {
  const auto clip = sine_clip(440.0, 0.5, 8000, 1.0);
  const auto m = dsp::compute_mfcc(clip);  // resampled to 16 kHz internally
  CHECK(m.frames() == dsp::frame_count(16000, 400, 160));
}

TEST_CASE("mean_variance_normalize") {
  dsp::MfccMatrix m;
  m.values.resize(2, 1);
  m.values << 1.0, 3.0;
  const auto n = dsp::mean_variance_normalize(m);
  CHECK(n.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(n.values(1, 0) == doctest::Approx(1.0).epsilon(1e-12));

  // column means ~0 for random matrices
  Rng rng(5);
  dsp::MfccMatrix r;
  r.values.resize(50, 8);
  for (Eigen::Index i = 0; i < r.values.rows(); ++i)
    for (Eigen::Index j = 0; j < r.values.cols(); ++j)
      r.values(i, j) = rng.normal(3.0, 2.5);
  const auto rn = dsp::mean_variance_normalize(r);
  for (Eigen::Index j = 0; j < rn.values.cols(); ++j) {
    CHECK(std::abs(rn.values.col(j).mean()) < 1e-9);
    const double var = rn.values.col(j).squaredNorm() / 50.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }

  // constant column stays all zero
  dsp::MfccMatrix c;
  c.values.resize(4, 2);
  c.values.col(0).setConstant(7.5);
  c.values.col(1) << 1, 2, 3, 4;
  const auto cn = dsp::mean_variance_normalize(c);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(cn.values(i, 0) == 0.0);

  dsp::MfccMatrix one;
  one.values.resize(1, 3);
  CHECK_THROWS_AS(dsp::mean_variance_normalize(one), DataError);
}

TEST_CASE("feature cache round trip") {
  TempDir dir("cache");
  const auto m = dsp::compute_mfcc(noise_clip(0.4, 16000, 0.3, 55));
  dsp::write_feature_cache(dir.file("x.atsv"), m);
  const auto back = dsp::read_feature_cache(dir.file("x.atsv"));
  REQUIRE(back.frames() == m.frames());
  REQUIRE(back.n_coeffs() == m.n_coeffs());
  for (Eigen::Index f = 0; f < m.frames(); ++f)
    for (Eigen::Index c = 0; c < m.n_coeffs(); ++c)
      CHECK(back.values(f, c) == static_cast<double>(static_cast<float>(m.values(f, c))));

  // write(read(x)) is byte-identical: float32 is a fixed point of the codec
  dsp::write_feature_cache(dir.file("y.atsv"), back);
  CHECK(read_binary_file(dir.file("x.atsv")) == read_binary_file(dir.file("y.atsv")));

  // header magic is enforced
  auto bytes = read_binary_file(dir.file("x.atsv"));
  bytes[0] = 'Z';
  write_binary_file(dir.file("bad.atsv"), bytes);
  CHECK_THROWS_AS(dsp::read_feature_cache(dir.file("bad.atsv")), DataError);
}
