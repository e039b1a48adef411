// src/dsp.cpp

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

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "attrsv/serialize.hpp"

namespace attrsv::dsp {

namespace {

std::uint32_t read_u32le(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16le(const std::uint8_t *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void append_u32le(std::vector<std::uint8_t> &v, std::uint32_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 8) & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 16) & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 24) & 0xff));
}

void append_u16le(std::vector<std::uint8_t> &v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 8) & 0xff));
}

Vector make_window(WindowKind kind, int length) {
  Vector w(length);
  switch (kind) {
    case WindowKind::kHann:
      for (int n = 0; n < length; ++n)
        w[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / (length - 1));
      break;
    case WindowKind::kHamming:
      for (int n = 0; n < length; ++n)
        w[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (length - 1));
      break;
    case WindowKind::kRect:
      w.setOnes();
      break;
  }
  return w;
}

// Triangular mel filterbank, n_filters x (fft_size/2 + 1).
Matrix make_filterbank(const MfccConfig &cfg) {
  const int n_bins = cfg.fft_size / 2 + 1;
  const double high_hz = cfg.mel_high_hz > 0.0 ? cfg.mel_high_hz : cfg.sample_rate / 2.0;
  const double lo = hz_to_mel(cfg.mel_low_hz);
  const double hi = hz_to_mel(high_hz);

  std::vector<int> bin(cfg.n_mel_filters + 2);
  for (int j = 0; j < cfg.n_mel_filters + 2; ++j) {
    const double mel = lo + (hi - lo) * j / (cfg.n_mel_filters + 1);
    bin[j] = static_cast<int>(std::floor((cfg.fft_size + 1) * mel_to_hz(mel) / cfg.sample_rate));
  }

  Matrix fb = Matrix::Zero(cfg.n_mel_filters, n_bins);
  for (int m = 0; m < cfg.n_mel_filters; ++m) {
    for (int k = bin[m]; k < bin[m + 1]; ++k)
      fb(m, k) = static_cast<double>(k - bin[m]) / (bin[m + 1] - bin[m]);
    for (int k = bin[m + 1]; k < bin[m + 2]; ++k)
      fb(m, k) = static_cast<double>(bin[m + 2] - k) / (bin[m + 2] - bin[m + 1]);
  }
  return fb;
}

// Orthonormal DCT-II basis, n_coeffs x n_filters.
Matrix make_dct(int n_coeffs, int n_filters) {
  Matrix d(n_coeffs, n_filters);
  const double scale = std::sqrt(2.0 / n_filters);
  for (int k = 0; k < n_coeffs; ++k)
    for (int m = 0; m < n_filters; ++m)
      d(k, m) = scale * std::cos(M_PI * k * (2 * m + 1) / (2.0 * n_filters));
  d.row(0) *= 1.0 / std::sqrt(2.0);
  return d;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

int MfccConfig::frame_length_samples() const {
  return static_cast<int>(std::lround(frame_length_ms / 1000.0 * sample_rate));
}

int MfccConfig::frame_hop_samples() const {
  return static_cast<int>(std::lround(frame_hop_ms / 1000.0 * sample_rate));
}

void MfccConfig::validate() const {
  if (sample_rate <= 0) throw ConfigError("mfcc: sample_rate must be positive");
  if (frame_length_ms <= 0.0 || frame_hop_ms <= 0.0)
    throw ConfigError("mfcc: frame length and hop must be positive");
  if (fft_size <= 0 || fft_size < frame_length_samples())
    throw ConfigError("mfcc: fft_size must be >= frame length in samples");
  if (n_mel_filters < 1) throw ConfigError("mfcc: need at least one mel filter");
  if (n_coeffs < 1) throw ConfigError("mfcc: n_coeffs must be positive");
  if (n_coeffs > n_mel_filters)
    throw ConfigError("mfcc: n_coeffs exceeds mel filter count");
  if (log_floor <= 0.0) throw ConfigError("mfcc: log_floor must be positive");
}

long frame_count(long n_samples, int frame_length_samples, int frame_hop_samples) {
  if (n_samples < frame_length_samples) return 0;
  return (n_samples - frame_length_samples) / frame_hop_samples + 1;
}

AudioClip load_wav(const std::string &path) {
  if (!std::filesystem::exists(path)) throw DataError("wav: file not found: " + path);
  std::vector<std::uint8_t> bytes = read_binary_file(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError("wav: not a RIFF/WAVE file: " + path);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_off = 0, data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char *id = reinterpret_cast<const char *>(bytes.data() + pos);
    const std::uint32_t len = read_u32le(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) throw DataError("wav: truncated chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw DataError("wav: malformed fmt chunk in " + path);
      format = read_u16le(bytes.data() + body);
      channels = read_u16le(bytes.data() + body + 2);
      rate = read_u32le(bytes.data() + body + 4);
      bits = read_u16le(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }

  if (!have_fmt) throw DataError("wav: missing fmt chunk: " + path);
  if (format != 1) throw DataError("wav: not integer PCM (format tag " +
                                   std::to_string(format) + "): " + path);
  if (bits != 16) throw DataError("wav: unsupported bit depth " +
                                  std::to_string(bits) + " (want 16): " + path);
  if (channels == 0 || rate == 0) throw DataError("wav: malformed fmt fields: " + path);
  if (data_off == 0 || data_len == 0) throw DataError("wav: zero-length audio: " + path);

  const std::size_t frame_bytes = 2u * channels;
  const std::size_t n = data_len / frame_bytes;
  if (n == 0) throw DataError("wav: zero-length audio: " + path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.source_id = path;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    long sum = 0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const std::uint8_t *p = bytes.data() + data_off + i * frame_bytes + 2 * c;
      sum += static_cast<std::int16_t>(p[0] | (p[1] << 8));
    }
    clip.samples[i] = static_cast<double>(sum) / channels / 32768.0;
  }
  return clip;
}

void write_wav(const std::string &path, const AudioClip &clip) {
  if (clip.sample_rate <= 0) throw DataError("wav: clip has no sample rate");
  if (clip.samples.empty()) throw DataError("wav: refusing to write empty clip");
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());

  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  append_u32le(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  append_u32le(out, 16);
  append_u16le(out, 1);  // PCM
  append_u16le(out, 1);  // mono
  append_u32le(out, static_cast<std::uint32_t>(clip.sample_rate));
  append_u32le(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  append_u16le(out, 2);
  append_u16le(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  append_u32le(out, 2 * n);
  for (double s : clip.samples) {
    double x = std::max(-1.0, std::min(1.0, s));
    auto v = static_cast<std::int16_t>(std::lround(x * 32767.0));
    append_u16le(out, static_cast<std::uint16_t>(v));
  }
  write_binary_file(path, out);
}

AudioClip resample_linear(const AudioClip &clip, int target_rate) {
  if (target_rate <= 0) throw ConfigError("resample: target rate must be positive");
  if (clip.sample_rate == target_rate) return clip;
  if (clip.samples.empty()) throw DataError("resample: empty clip");

  const double ratio = static_cast<double>(clip.sample_rate) / target_rate;
  const auto n_out = static_cast<std::size_t>(
      std::floor((clip.samples.size() - 1) / ratio)) + 1;

  AudioClip out;
  out.sample_rate = target_rate;
  out.source_id = clip.source_id;
  out.samples.resize(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double t = i * ratio;
    const auto lo = static_cast<std::size_t>(t);
    const std::size_t hi = std::min(lo + 1, clip.samples.size() - 1);
    const double frac = t - static_cast<double>(lo);
    out.samples[i] = (1.0 - frac) * clip.samples[lo] + frac * clip.samples[hi];
  }
  return out;
}

MfccMatrix compute_mfcc(const AudioClip &clip, const MfccConfig &config) {
  config.validate();
  if (clip.samples.empty()) throw DataError("mfcc: empty clip " + clip.source_id);

  const AudioClip &src =
      clip.sample_rate == config.sample_rate ? clip : resample_linear(clip, config.sample_rate);

  const int frame_len = config.frame_length_samples();
  const int hop = config.frame_hop_samples();
  const long n_frames = frame_count(static_cast<long>(src.samples.size()), frame_len, hop);
  if (n_frames < 1)
    throw DataError("mfcc: clip shorter than one frame (" + std::to_string(src.samples.size()) +
                    " samples < " + std::to_string(frame_len) + "): " + clip.source_id);

  // Pre-emphasis: y[t] = x[t] - a * x[t-1], y[0] = x[0].
  std::vector<double> emph(src.samples.size());
  emph[0] = src.samples[0];
  for (std::size_t t = 1; t < src.samples.size(); ++t)
    emph[t] = src.samples[t] - config.preemphasis * src.samples[t - 1];

  const Vector window = make_window(config.window, frame_len);
  const Matrix fb = make_filterbank(config);
  const Matrix dct = make_dct(config.n_coeffs, config.n_mel_filters);
  const int n_bins = config.fft_size / 2 + 1;

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> buf(config.fft_size);
  std::vector<std::complex<double>> spec;

  Matrix power(n_bins, n_frames);
  for (long f = 0; f < n_frames; ++f) {
    const long off = f * hop;
    for (int n = 0; n < frame_len; ++n) buf[n] = emph[off + n] * window[n];
    std::fill(buf.begin() + frame_len, buf.end(), 0.0);
    fft.fwd(spec, buf);
    for (int k = 0; k < n_bins; ++k)
      power(k, f) = std::norm(spec[k]) / config.fft_size;
  }

  Matrix energies = (fb * power).cwiseMax(config.log_floor).array().log().matrix();
  MfccMatrix out;
  out.values = (dct * energies).transpose();
  out.frame_length_ms = config.frame_length_ms;
  out.frame_hop_ms = config.frame_hop_ms;
  return out;
}

MfccMatrix mean_variance_normalize(const MfccMatrix &m) {
  if (m.frames() < 2) throw DataError("mvn: need at least 2 frames");
  MfccMatrix out = m;
  const double n = static_cast<double>(m.frames());
  for (Eigen::Index c = 0; c < m.n_coeffs(); ++c) {
    const double mean = m.values.col(c).mean();
    out.values.col(c).array() -= mean;
    const double var = out.values.col(c).squaredNorm() / n;
    if (var > 0.0) out.values.col(c) /= std::sqrt(var);
  }
  return out;
}

void write_feature_cache(const std::string &path, const MfccMatrix &m) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'A', 'T', 'S', 'V'});
  append_u32le(out, 1);  // format version
  append_u32le(out, static_cast<std::uint32_t>(m.frames()));
  append_u32le(out, static_cast<std::uint32_t>(m.n_coeffs()));
  std::vector<double> row_major;
  row_major.reserve(static_cast<std::size_t>(m.frames() * m.n_coeffs()));
  for (Eigen::Index r = 0; r < m.frames(); ++r)
    for (Eigen::Index c = 0; c < m.n_coeffs(); ++c) row_major.push_back(m.values(r, c));
  std::vector<std::uint8_t> payload = pack_f32_le(row_major);
  out.insert(out.end(), payload.begin(), payload.end());
  write_binary_file(path, out);
}

MfccMatrix read_feature_cache(const std::string &path) {
  std::vector<std::uint8_t> bytes = read_binary_file(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "ATSV", 4) != 0)
    throw DataError("feature cache: bad magic: " + path);
  const std::uint32_t version = read_u32le(bytes.data() + 4);
  if (version != 1) throw DataError("feature cache: unsupported version: " + path);
  const std::uint32_t frames = read_u32le(bytes.data() + 8);
  const std::uint32_t n_coeffs = read_u32le(bytes.data() + 12);
  const std::size_t expected = 16 + 4ull * frames * n_coeffs;
  if (bytes.size() != expected) throw DataError("feature cache: size mismatch: " + path);

  std::vector<double> vals =
      unpack_f32_le(std::vector<std::uint8_t>(bytes.begin() + 16, bytes.end()));
  MfccMatrix m;
  m.values.resize(frames, n_coeffs);
  for (std::uint32_t r = 0; r < frames; ++r)
    for (std::uint32_t c = 0; c < n_coeffs; ++c) m.values(r, c) = vals[r * n_coeffs + c];
  return m;
}

}  // namespace attrsv::dsp
