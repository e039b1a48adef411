// attrsv/dsp.hpp

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

#ifndef ATTRSV_DSP_HPP
#define ATTRSV_DSP_HPP

#include <string>
#include <vector>

#include "attrsv/common.hpp"

namespace attrsv::dsp {

/// Mono PCM waveform, samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;
  std::string source_id;

  double duration_sec() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class WindowKind { kHann, kHamming, kRect };

/// MFCC extraction parameters.  Defaults are standard 16 kHz speech settings.
struct MfccConfig {
  int sample_rate = 16000;       // clips at other rates are linearly resampled
  double frame_length_ms = 25.0;
  double frame_hop_ms = 10.0;
  double preemphasis = 0.97;
  int fft_size = 512;
  int n_mel_filters = 26;
  double mel_low_hz = 20.0;
  double mel_high_hz = 0.0;      // 0 means sample_rate / 2
  int n_coeffs = 20;
  double log_floor = 1e-10;
  WindowKind window = WindowKind::kHann;

  int frame_length_samples() const;
  int frame_hop_samples() const;
  void validate() const;  // throws ConfigError
};

/// frames x n_coeffs feature matrix.
struct MfccMatrix {
  Matrix values;  // rows = frames, cols = coefficients
  double frame_length_ms = 0.0;
  double frame_hop_ms = 0.0;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index n_coeffs() const { return values.cols(); }
};

/// mel(f) = 2595 * log10(1 + f / 700)
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Frame count for a clip of n_samples: floor((n - len) / hop) + 1.
long frame_count(long n_samples, int frame_length_samples, int frame_hop_samples);

/// Reads a RIFF/WAVE PCM 16-bit file; multichannel input is averaged to mono
/// and integer samples are scaled by 1/32768.
AudioClip load_wav(const std::string &path);

/// Writes a mono PCM 16-bit WAV.  Samples are clamped to [-1, 1] and rounded
/// to the nearest 16-bit value.
void write_wav(const std::string &path, const AudioClip &clip);

AudioClip resample_linear(const AudioClip &clip, int target_rate);

/// Pre-emphasis -> framing -> window -> magnitude FFT -> mel filterbank ->
/// log with floor -> DCT-II (orthonormal), keeping the first n_coeffs.
MfccMatrix compute_mfcc(const AudioClip &clip, const MfccConfig &config = MfccConfig{});

/// Columns rescaled to mean 0 / unit population variance; zero-variance
/// columns are mean-centered only.
MfccMatrix mean_variance_normalize(const MfccMatrix &m);

// Feature cache: magic "ATSV", then u32 version, u32 frames, u32 n_coeffs
// (little-endian), then row-major 32-bit floats.
void write_feature_cache(const std::string &path, const MfccMatrix &m);
MfccMatrix read_feature_cache(const std::string &path);

}  // namespace attrsv::dsp

#endif  // ATTRSV_DSP_HPP
