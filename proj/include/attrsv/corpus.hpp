// attrsv/corpus.hpp

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

#ifndef ATTRSV_CORPUS_HPP
#define ATTRSV_CORPUS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "attrsv/common.hpp"
#include "attrsv/dsp.hpp"

namespace attrsv::corpus {

struct Attribute {
  std::string name;
  std::vector<std::string> classes;
};

/// Ordered attribute list; the order fixes the similarity-vector layout.
struct AttributeSchema {
  std::vector<Attribute> attributes;

  int index_of(const std::string &name) const;
  int class_index(int attr, const std::string &class_name) const;
  void validate() const;
  std::string canonical() const;
  std::string hash() const;

  /// gender / nationality / age / profession with the given class counts.
  static AttributeSchema defaults(int gender = 2, int nationality = 8, int age = 6,
                                  int profession = 10);
};

struct SpeakerRecord {
  std::string speaker_id;
  std::vector<int> labels;  // schema order, one class index per attribute
  std::vector<std::string> clip_ids;
};

struct Manifest {
  AttributeSchema schema;
  std::vector<SpeakerRecord> speakers;
  std::map<std::string, std::string> clip_paths;  // clip id -> resolved path
  std::map<std::string, int> speaker_of_clip;     // clip id -> index into speakers

  const SpeakerRecord &owner(const std::string &clip_id) const;
  std::vector<std::string> all_clip_ids() const;  // manifest order
};

// JSON-lines manifest: first line holds the schema, one speaker per
// subsequent line.  Clip paths resolve relative to the manifest directory.
Manifest load_manifest(const std::string &path);
void save_manifest(const std::string &path, const AttributeSchema &schema,
                   const std::vector<SpeakerRecord> &speakers,
                   const std::map<std::string, std::string> &relative_clip_paths);

struct TrialPair {
  std::string clip_a, clip_b;
  bool target = false;
};

struct TrialSet {
  std::vector<TrialPair> trials;
  long n_pos = 0, n_neg = 0;
  // set when a pool was exhausted and sampling fell back to replacement
  bool pos_with_replacement = false;
  bool neg_with_replacement = false;
};

/// Uniform sampling without replacement (with-replacement fallback when a
/// pool is exhausted, flagged in the result).  Deterministic per seed.
TrialSet generate_trials(const Manifest &manifest, long n_pos, long n_neg,
                         std::uint64_t seed);

// Trial list: one `<0|1> <clip_a> <clip_b>` line per trial.
void save_trials(const std::string &path, const std::vector<TrialPair> &trials);
std::vector<TrialPair> load_trials(const std::string &path);

/// Empirical class frequencies over speakers; sums to 1.
Vector label_distribution(const std::vector<SpeakerRecord> &records,
                          const AttributeSchema &schema, const std::string &attribute);

/// Synthetic-corpus shape.  Every attribute drives one acoustic dimension:
/// gender the fundamental band, nationality the spectral-envelope peaks, age
/// the spectral tilt, profession the amplitude-modulation rate.
struct SynthSpec {
  int n_speakers = 160;
  int clips_per_speaker = 10;
  double clip_duration_sec = 1.0;
  int sample_rate = 16000;
  AttributeSchema schema = AttributeSchema::defaults();
  std::map<std::string, std::vector<double>> priors;  // per attribute; absent = uniform
  double noise_std = 0.01;
  double am_depth = 0.85;
  double harmonic_amplitude = 0.45;
  std::string speaker_prefix = "spk";

  void validate() const;
};

/// Per-speaker acoustic traits derived from labels plus speaker randomness.
struct VoiceTraits {
  double f0_hz = 0.0;
  double peak1_hz = 0.0, peak2_hz = 0.0;
  double tilt_db_per_oct = 0.0;
  double am_rate_hz = 0.0;
};

VoiceTraits derive_voice(const SynthSpec &spec, const std::vector<int> &labels,
                         std::uint64_t speaker_seed);

/// Renders one clip; deterministic in (spec, labels, speaker_seed, clip_index).
dsp::AudioClip render_clip(const SynthSpec &spec, const std::vector<int> &labels,
                           std::uint64_t speaker_seed, int clip_index,
                           const std::string &clip_id);

struct SynthResult {
  Manifest manifest;
  std::string manifest_path;
  std::vector<std::string> wav_paths;
};

/// Writes WAVs under <out_dir>/wav/ and a manifest at <out_dir>/manifest.jsonl.
/// Byte-identical for identical (spec, seed).
SynthResult synthesize_corpus(const SynthSpec &spec, std::uint64_t seed,
                              const std::string &out_dir);

}  // namespace attrsv::corpus

#endif  // ATTRSV_CORPUS_HPP
