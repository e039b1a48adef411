// attrsv/config.hpp

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

#ifndef ATTRSV_CONFIG_HPP
#define ATTRSV_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "attrsv/attrnet.hpp"
#include "attrsv/common.hpp"
#include "attrsv/dsp.hpp"
#include "attrsv/metrics.hpp"

namespace attrsv::cli {

extern const char *kToolkitVersion;

// Minimal TOML reader covering what run configs use: [section] headers
// (dotted), key = value with strings, integers, floats, booleans and flat
// arrays, # comments.  Keys flatten to "section.key".
struct TomlValue {
  enum class Kind { kString, kInt, kFloat, kBool, kArray };
  Kind kind = Kind::kString;
  std::string str;
  long long integer = 0;
  double real = 0.0;
  bool boolean = false;
  std::vector<TomlValue> array;

  std::string as_string(const std::string &key) const;
  long long as_int(const std::string &key) const;
  double as_double(const std::string &key) const;
  bool as_bool(const std::string &key) const;
  std::vector<std::string> as_string_list(const std::string &key) const;
  std::vector<long long> as_int_list(const std::string &key) const;
  std::vector<double> as_double_list(const std::string &key) const;
};

using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string &text);
TomlValue parse_toml_value(const std::string &text);

/// Effective run configuration: the TOML file, then --set overrides, then the
/// ATTRSV_SEED environment variable.  Relative paths resolve against the
/// config file's directory.
struct RunConfig {
  std::uint64_t seed = 42;
  int jobs = 1;
  std::string out_dir = "out";
  std::string corpus_dir = "corpus";
  std::string cache_dir = "cache";
  std::string model_dir = "models";

  // synth
  int synth_train_speakers = 160;
  int synth_test_speakers = 40;
  int synth_clips_per_speaker = 10;
  double synth_duration_sec = 1.0;
  int synth_sample_rate = 16000;
  double synth_noise_std = 0.01;
  double synth_am_depth = 0.85;
  int classes_gender = 2, classes_nationality = 8, classes_age = 6, classes_profession = 10;

  dsp::MfccConfig mfcc;

  // synthetic embedding extractors written by `extract`
  std::vector<std::string> embedding_tags = {"xv", "ec"};
  std::vector<int> embedding_dims = {48, 48};
  std::vector<double> embedding_noise = {0.35, 0.12};
  std::map<std::string, std::string> embedding_files;  // tag -> external file

  attrnet::TrainConfig stage1;  // desk-scale defaults; see init config
  std::map<std::string, attrnet::TrainConfig> stage1_per_attribute;
  attrnet::TdnnConfig tdnn;
  std::vector<int> mlp_hidden = {256, 256};

  long trials_train_pos = 8000, trials_train_neg = 8000;
  long trials_test_pos = 4000, trials_test_neg = 4000;

  metrics::StageTwoParams stage2;

  std::vector<std::string> eval_routes = {"ac", "xv", "ec"};
  std::vector<std::string> eval_modes = {"softmax", "hard"};
  std::vector<std::string> eval_models = {"linreg", "logreg", "random-forest",
                                          "neural-net"};
  std::string single_attribute_model = "random-forest";

  std::string config_path;  // where this config was loaded from

  /// FNV-1a fingerprint of the canonical serialization.
  std::string fingerprint() const;
  std::string to_toml() const;

  attrnet::TrainConfig stage1_for(const std::string &attribute) const;

  // resolved artifact locations
  std::string train_manifest_path() const;
  std::string test_manifest_path() const;
  std::string embeddings_path(const std::string &tag) const;
  std::string cache_path(const std::string &clip_id) const;
  std::string trials_path(bool test_split) const;
  std::string stage1_model_path(const std::string &route, const std::string &attr) const;
  std::string stage2_model_path(const std::string &route, const std::string &mode,
                                const std::string &kind) const;
  std::string similarity_dump_path(const std::string &route, const std::string &mode) const;
  std::string scores_path(const std::string &route, const std::string &mode,
                          const std::string &kind) const;
  std::string report_path() const;
  std::string csv_path() const;
  std::string run_record_path(const std::string &command) const;
};

/// TOML text with every default spelled out (written by `attrsv init`).
std::string default_config_toml();

RunConfig load_config(const std::string &path, const std::vector<std::string> &overrides);

}  // namespace attrsv::cli

#endif  // ATTRSV_CONFIG_HPP
