// src/config.cpp

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

#include "attrsv/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <set>
#include <sstream>

#include "attrsv/serialize.hpp"

namespace fs = std::filesystem;

namespace attrsv::cli {

const char *kToolkitVersion = "0.1.0";

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string &msg, long line) {
  throw ConfigError("config: " + msg + " (line " + std::to_string(line) + ")");
}

std::string kind_str(TomlValue::Kind k) {
  switch (k) {
    case TomlValue::Kind::kString: return "string";
    case TomlValue::Kind::kInt: return "integer";
    case TomlValue::Kind::kFloat: return "float";
    case TomlValue::Kind::kBool: return "boolean";
    case TomlValue::Kind::kArray: return "array";
  }
  return "?";
}

TomlValue parse_scalar(const std::string &raw, long line) {
  const std::string text = trim(raw);
  if (text.empty()) bad("empty value", line);
  TomlValue v;
  if (text.front() == '"') {
    v.kind = TomlValue::Kind::kString;
    std::string out;
    bool closed = false;
    for (std::size_t i = 1; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '\\') {
        if (i + 1 >= text.size()) bad("dangling escape", line);
        const char e = text[++i];
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: bad(std::string("unsupported escape \\") + e, line);
        }
      } else if (c == '"') {
        if (trim(text.substr(i + 1)).empty()) {
          closed = true;
          break;
        }
        bad("trailing characters after string", line);
      } else {
        out += c;
      }
    }
    if (!closed) bad("unterminated string", line);
    v.str = out;
    return v;
  }
  if (text == "true" || text == "false") {
    v.kind = TomlValue::Kind::kBool;
    v.boolean = text == "true";
    return v;
  }
  // integer, then float
  {
    std::string digits;
    for (char c : text)
      if (c != '_') digits += c;
    bool is_int = !digits.empty();
    for (std::size_t i = 0; i < digits.size(); ++i) {
      const char c = digits[i];
      if (i == 0 && (c == '+' || c == '-')) continue;
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        is_int = false;
        break;
      }
    }
    if (is_int && digits != "+" && digits != "-") {
      v.kind = TomlValue::Kind::kInt;
      try {
        v.integer = std::stoll(digits);
      } catch (const std::exception &) {
        bad("integer out of range: " + text, line);
      }
      return v;
    }
    try {
      std::size_t used = 0;
      v.real = std::stod(digits, &used);
      if (used == digits.size()) {
        v.kind = TomlValue::Kind::kFloat;
        return v;
      }
    } catch (const std::exception &) {
    }
  }
  bad("cannot parse value: " + text, line);
}

TomlValue parse_value(const std::string &raw, long line) {
  const std::string text = trim(raw);
  if (text.empty()) bad("empty value", line);
  if (text.front() != '[') return parse_scalar(text, line);

  if (text.back() != ']') bad("unterminated array", line);
  TomlValue v;
  v.kind = TomlValue::Kind::kArray;
  const std::string body = text.substr(1, text.size() - 2);
  std::string item;
  bool in_string = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (in_string) {
      item += c;
      if (c == '\\' && i + 1 < body.size()) item += body[++i];
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      item += c;
      in_string = true;
    } else if (c == ',') {
      if (!trim(item).empty()) v.array.push_back(parse_scalar(item, line));
      item.clear();
    } else {
      item += c;
    }
  }
  if (!trim(item).empty()) v.array.push_back(parse_scalar(item, line));
  return v;
}

bool valid_key(const std::string &k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
      return false;
  return true;
}

std::string strip_comment(const std::string &line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

std::string TomlValue::as_string(const std::string &key) const {
  if (kind != Kind::kString)
    throw ConfigError("config: '" + key + "' must be a string, got " + kind_str(kind));
  return str;
}

long long TomlValue::as_int(const std::string &key) const {
  if (kind != Kind::kInt)
    throw ConfigError("config: '" + key + "' must be an integer, got " + kind_str(kind));
  return integer;
}

double TomlValue::as_double(const std::string &key) const {
  if (kind == Kind::kFloat) return real;
  if (kind == Kind::kInt) return static_cast<double>(integer);
  throw ConfigError("config: '" + key + "' must be a number, got " + kind_str(kind));
}

bool TomlValue::as_bool(const std::string &key) const {
  if (kind != Kind::kBool)
    throw ConfigError("config: '" + key + "' must be a boolean, got " + kind_str(kind));
  return boolean;
}

std::vector<std::string> TomlValue::as_string_list(const std::string &key) const {
  if (kind != Kind::kArray)
    throw ConfigError("config: '" + key + "' must be an array, got " + kind_str(kind));
  std::vector<std::string> out;
  for (const auto &v : array) out.push_back(v.as_string(key));
  return out;
}

std::vector<long long> TomlValue::as_int_list(const std::string &key) const {
  if (kind != Kind::kArray)
    throw ConfigError("config: '" + key + "' must be an array, got " + kind_str(kind));
  std::vector<long long> out;
  for (const auto &v : array) out.push_back(v.as_int(key));
  return out;
}

std::vector<double> TomlValue::as_double_list(const std::string &key) const {
  if (kind != Kind::kArray)
    throw ConfigError("config: '" + key + "' must be an array, got " + kind_str(kind));
  std::vector<double> out;
  for (const auto &v : array) out.push_back(v.as_double(key));
  return out;
}

TomlTable parse_toml(const std::string &text) {
  TomlTable table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) bad("invalid section name '" + section + "'", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad("expected key = value", line_no);
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) bad("invalid key '" + key + "'", line_no);
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.count(full)) bad("duplicate key '" + full + "'", line_no);
    table[full] = parse_value(line.substr(eq + 1), line_no);
  }
  return table;
}

TomlValue parse_toml_value(const std::string &text) { return parse_value(text, 0); }

namespace {

// Typed reader that tracks consumed keys so typos surface as errors.
struct Reader {
  const TomlTable &table;
  std::set<std::string> used;

  bool has(const std::string &k) {
    return table.count(k) > 0;
  }
  const TomlValue *find(const std::string &k) {
    auto it = table.find(k);
    if (it == table.end()) return nullptr;
    used.insert(k);
    return &it->second;
  }
  long long get_int(const std::string &k, long long dflt) {
    const TomlValue *v = find(k);
    return v ? v->as_int(k) : dflt;
  }
  double get_double(const std::string &k, double dflt) {
    const TomlValue *v = find(k);
    return v ? v->as_double(k) : dflt;
  }
  std::string get_string(const std::string &k, const std::string &dflt) {
    const TomlValue *v = find(k);
    return v ? v->as_string(k) : dflt;
  }
  std::vector<std::string> get_strings(const std::string &k, std::vector<std::string> dflt) {
    const TomlValue *v = find(k);
    return v ? v->as_string_list(k) : dflt;
  }
  std::vector<int> get_ints(const std::string &k, std::vector<int> dflt) {
    const TomlValue *v = find(k);
    if (!v) return dflt;
    std::vector<int> out;
    for (long long x : v->as_int_list(k)) out.push_back(static_cast<int>(x));
    return out;
  }
  std::vector<double> get_doubles(const std::string &k, std::vector<double> dflt) {
    const TomlValue *v = find(k);
    return v ? v->as_double_list(k) : dflt;
  }
};

dsp::WindowKind window_from_name(const std::string &name) {
  if (name == "hann") return dsp::WindowKind::kHann;
  if (name == "hamming") return dsp::WindowKind::kHamming;
  if (name == "rect") return dsp::WindowKind::kRect;
  throw ConfigError("config: unknown window '" + name + "'");
}

std::string window_name(dsp::WindowKind w) {
  switch (w) {
    case dsp::WindowKind::kHann: return "hann";
    case dsp::WindowKind::kHamming: return "hamming";
    case dsp::WindowKind::kRect: return "rect";
  }
  return "?";
}

attrnet::LrSchedule schedule_from_name(const std::string &name) {
  if (name == "none") return attrnet::LrSchedule::kNone;
  if (name == "linear-decay") return attrnet::LrSchedule::kLinearDecay;
  throw ConfigError("config: unknown lr_schedule '" + name + "'");
}

std::string schedule_name(attrnet::LrSchedule s) {
  return s == attrnet::LrSchedule::kNone ? "none" : "linear-decay";
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  const std::string s = ss.str();
  // bare integers would re-parse as TOML ints; force a float marker
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    return s + ".0";
  return s;
}

template <typename T>
std::string fmt_list(const std::vector<T> &xs) {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) ss << ", ";
    if constexpr (std::is_same_v<T, std::string>)
      ss << '"' << xs[i] << '"';
    else if constexpr (std::is_same_v<T, double>)
      ss << fmt(xs[i]);
    else
      ss << xs[i];
  }
  ss << ']';
  return ss.str();
}

void read_train_fields(Reader &r, const std::string &prefix, attrnet::TrainConfig &t) {
  t.iterations = r.get_int(prefix + ".iterations", t.iterations);
  t.batch_size = static_cast<int>(r.get_int(prefix + ".batch_size", t.batch_size));
  t.learning_rate = r.get_double(prefix + ".learning_rate", t.learning_rate);
  t.momentum = r.get_double(prefix + ".momentum", t.momentum);
  t.schedule = schedule_from_name(
      r.get_string(prefix + ".lr_schedule", schedule_name(t.schedule)));
}

}  // namespace

attrnet::TrainConfig RunConfig::stage1_for(const std::string &attribute) const {
  auto it = stage1_per_attribute.find(attribute);
  attrnet::TrainConfig t = it != stage1_per_attribute.end() ? it->second : stage1;
  return t;
}

std::string RunConfig::to_toml() const {
  std::ostringstream o;
  o << "# attrsv run configuration\n";
  o << "seed = " << seed << "\n";
  o << "jobs = " << jobs << "\n\n";
  o << "[paths]\n";
  o << "out_dir = \"" << out_dir << "\"\n";
  o << "corpus_dir = \"" << corpus_dir << "\"\n";
  o << "cache_dir = \"" << cache_dir << "\"\n";
  o << "model_dir = \"" << model_dir << "\"\n\n";
  o << "[synth]\n";
  o << "train_speakers = " << synth_train_speakers << "\n";
  o << "test_speakers = " << synth_test_speakers << "\n";
  o << "clips_per_speaker = " << synth_clips_per_speaker << "\n";
  o << "duration_sec = " << fmt(synth_duration_sec) << "\n";
  o << "sample_rate = " << synth_sample_rate << "\n";
  o << "noise_std = " << fmt(synth_noise_std) << "\n";
  o << "am_depth = " << fmt(synth_am_depth) << "\n";
  o << "gender_classes = " << classes_gender << "\n";
  o << "nationality_classes = " << classes_nationality << "\n";
  o << "age_classes = " << classes_age << "\n";
  o << "profession_classes = " << classes_profession << "\n\n";
  o << "[mfcc]\n";
  o << "sample_rate = " << mfcc.sample_rate << "\n";
  o << "frame_length_ms = " << fmt(mfcc.frame_length_ms) << "\n";
  o << "frame_hop_ms = " << fmt(mfcc.frame_hop_ms) << "\n";
  o << "preemphasis = " << fmt(mfcc.preemphasis) << "\n";
  o << "fft_size = " << mfcc.fft_size << "\n";
  o << "n_mel_filters = " << mfcc.n_mel_filters << "\n";
  o << "mel_low_hz = " << fmt(mfcc.mel_low_hz) << "\n";
  o << "mel_high_hz = " << fmt(mfcc.mel_high_hz) << "  # 0 = sample_rate / 2\n";
  o << "n_coeffs = " << mfcc.n_coeffs << "\n";
  o << "log_floor = " << fmt(mfcc.log_floor) << "\n";
  o << "window = \"" << window_name(mfcc.window) << "\"\n\n";
  o << "[embeddings]\n";
  o << "tags = " << fmt_list(embedding_tags) << "\n";
  o << "dims = " << fmt_list(embedding_dims) << "\n";
  o << "noise = " << fmt_list(embedding_noise) << "\n";
  {
    std::vector<std::string> files;
    for (const auto &tag : embedding_tags) {
      auto it = embedding_files.find(tag);
      files.push_back(it == embedding_files.end() ? "" : it->second);
    }
    o << "external_files = " << fmt_list(files) << "  # empty = synthesize in `extract`\n\n";
  }
  o << "[stage1]\n";
  o << "iterations = " << stage1.iterations << "  # paper-faithful setting: 100000\n";
  o << "batch_size = " << stage1.batch_size << "\n";
  o << "learning_rate = " << fmt(stage1.learning_rate) << "\n";
  o << "momentum = " << fmt(stage1.momentum) << "\n";
  o << "lr_schedule = \"" << schedule_name(stage1.schedule) << "\"\n";
  o << "tdnn_channels = " << fmt_list(tdnn.channels) << "\n";
  o << "tdnn_kernels = " << fmt_list(tdnn.kernels) << "\n";
  o << "tdnn_dilations = " << fmt_list(tdnn.dilations) << "\n";
  o << "tdnn_fc = " << fmt_list(tdnn.fc) << "\n";
  o << "mlp_hidden = " << fmt_list(mlp_hidden) << "\n";
  for (const auto &[attr, t] : stage1_per_attribute) {
    o << "\n[stage1." << attr << "]\n";
    o << "iterations = " << t.iterations << "\n";
    o << "batch_size = " << t.batch_size << "\n";
    o << "learning_rate = " << fmt(t.learning_rate) << "\n";
    o << "momentum = " << fmt(t.momentum) << "\n";
    o << "lr_schedule = \"" << schedule_name(t.schedule) << "\"\n";
  }
  o << "\n[trials]\n";
  o << "train_pos = " << trials_train_pos << "\n";
  o << "train_neg = " << trials_train_neg << "\n";
  o << "test_pos = " << trials_test_pos << "\n";
  o << "test_neg = " << trials_test_neg << "\n\n";
  o << "[stage2]\n";
  o << "forest_trees = " << stage2.forest_trees << "\n";
  o << "forest_max_depth = " << stage2.forest_max_depth << "\n";
  o << "forest_min_leaf = " << stage2.forest_min_leaf << "\n";
  o << "forest_feature_subsample = " << stage2.forest_feature_subsample
    << "  # 0 = ceil(sqrt(k))\n";
  o << "nn_hidden = " << stage2.nn_hidden << "\n";
  o << "nn_epochs = " << stage2.nn_epochs << "\n";
  o << "nn_lr = " << fmt(stage2.nn_lr) << "\n";
  o << "logreg_epochs = " << stage2.logreg_epochs << "\n";
  o << "logreg_lr = " << fmt(stage2.logreg_lr) << "\n\n";
  o << "[eval]\n";
  o << "routes = " << fmt_list(eval_routes) << "\n";
  o << "modes = " << fmt_list(eval_modes) << "\n";
  o << "stage2_models = " << fmt_list(eval_models) << "\n";
  o << "single_attribute_model = \"" << single_attribute_model << "\"\n";
  return o.str();
}

std::string RunConfig::fingerprint() const { return fnv1a64_hex(to_toml()); }

std::string default_config_toml() {
  RunConfig cfg;
  cfg.stage1.iterations = 5000;  // desk-scale default; 100000 is the paper-faithful run
  return cfg.to_toml();
}

namespace {

std::string resolve(const std::string &base_dir, const std::string &p) {
  const fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

RunConfig load_config(const std::string &path, const std::vector<std::string> &overrides) {
  TomlTable table;
  std::string base_dir;
  if (!path.empty()) {
    if (!fs::exists(path)) throw ConfigError("config: file not found: " + path);
    table = parse_toml(read_text_file(path));
    base_dir = fs::path(path).parent_path().string();
  }

  for (const auto &ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: override must look like key=value, got '" + ov + "'");
    const std::string key = trim(ov.substr(0, eq));
    if (!valid_key(key)) throw ConfigError("config: invalid override key '" + key + "'");
    const std::string value = trim(ov.substr(eq + 1));
    TomlValue v;
    try {
      v = parse_toml_value(value);
    } catch (const ConfigError &) {
      v.kind = TomlValue::Kind::kString;  // bare strings are convenient on a CLI
      v.str = value;
    }
    table[key] = v;
  }

  RunConfig cfg;
  cfg.config_path = path;
  cfg.stage1.iterations = 5000;  // desk-scale default, see init config
  Reader r{table, {}};

  cfg.seed = static_cast<std::uint64_t>(r.get_int("seed", static_cast<long long>(cfg.seed)));
  cfg.jobs = static_cast<int>(r.get_int("jobs", cfg.jobs));
  if (cfg.jobs < 1) throw ConfigError("config: jobs must be >= 1");

  cfg.out_dir = resolve(base_dir, r.get_string("paths.out_dir", cfg.out_dir));
  cfg.corpus_dir = resolve(base_dir, r.get_string("paths.corpus_dir", cfg.corpus_dir));
  cfg.cache_dir = resolve(base_dir, r.get_string("paths.cache_dir", cfg.cache_dir));
  cfg.model_dir = resolve(base_dir, r.get_string("paths.model_dir", cfg.model_dir));

  cfg.synth_train_speakers =
      static_cast<int>(r.get_int("synth.train_speakers", cfg.synth_train_speakers));
  cfg.synth_test_speakers =
      static_cast<int>(r.get_int("synth.test_speakers", cfg.synth_test_speakers));
  cfg.synth_clips_per_speaker =
      static_cast<int>(r.get_int("synth.clips_per_speaker", cfg.synth_clips_per_speaker));
  cfg.synth_duration_sec = r.get_double("synth.duration_sec", cfg.synth_duration_sec);
  cfg.synth_sample_rate = static_cast<int>(r.get_int("synth.sample_rate", cfg.synth_sample_rate));
  cfg.synth_noise_std = r.get_double("synth.noise_std", cfg.synth_noise_std);
  cfg.synth_am_depth = r.get_double("synth.am_depth", cfg.synth_am_depth);
  cfg.classes_gender = static_cast<int>(r.get_int("synth.gender_classes", cfg.classes_gender));
  cfg.classes_nationality =
      static_cast<int>(r.get_int("synth.nationality_classes", cfg.classes_nationality));
  cfg.classes_age = static_cast<int>(r.get_int("synth.age_classes", cfg.classes_age));
  cfg.classes_profession =
      static_cast<int>(r.get_int("synth.profession_classes", cfg.classes_profession));

  cfg.mfcc.sample_rate = static_cast<int>(r.get_int("mfcc.sample_rate", cfg.mfcc.sample_rate));
  cfg.mfcc.frame_length_ms = r.get_double("mfcc.frame_length_ms", cfg.mfcc.frame_length_ms);
  cfg.mfcc.frame_hop_ms = r.get_double("mfcc.frame_hop_ms", cfg.mfcc.frame_hop_ms);
  cfg.mfcc.preemphasis = r.get_double("mfcc.preemphasis", cfg.mfcc.preemphasis);
  cfg.mfcc.fft_size = static_cast<int>(r.get_int("mfcc.fft_size", cfg.mfcc.fft_size));
  cfg.mfcc.n_mel_filters = static_cast<int>(r.get_int("mfcc.n_mel_filters", cfg.mfcc.n_mel_filters));
  cfg.mfcc.mel_low_hz = r.get_double("mfcc.mel_low_hz", cfg.mfcc.mel_low_hz);
  cfg.mfcc.mel_high_hz = r.get_double("mfcc.mel_high_hz", cfg.mfcc.mel_high_hz);
  cfg.mfcc.n_coeffs = static_cast<int>(r.get_int("mfcc.n_coeffs", cfg.mfcc.n_coeffs));
  cfg.mfcc.log_floor = r.get_double("mfcc.log_floor", cfg.mfcc.log_floor);
  cfg.mfcc.window = window_from_name(r.get_string("mfcc.window", window_name(cfg.mfcc.window)));

  cfg.embedding_tags = r.get_strings("embeddings.tags", cfg.embedding_tags);
  cfg.embedding_dims = r.get_ints("embeddings.dims", cfg.embedding_dims);
  cfg.embedding_noise = r.get_doubles("embeddings.noise", cfg.embedding_noise);
  {
    std::vector<std::string> files =
        r.get_strings("embeddings.external_files",
                      std::vector<std::string>(cfg.embedding_tags.size(), ""));
    if (files.size() != cfg.embedding_tags.size() ||
        cfg.embedding_dims.size() != cfg.embedding_tags.size() ||
        cfg.embedding_noise.size() != cfg.embedding_tags.size())
      throw ConfigError("config: embeddings.{dims,noise,external_files} must match tags");
    cfg.embedding_files.clear();
    for (std::size_t i = 0; i < files.size(); ++i)
      if (!files[i].empty())
        cfg.embedding_files[cfg.embedding_tags[i]] = resolve(base_dir, files[i]);
  }

  read_train_fields(r, "stage1", cfg.stage1);
  cfg.tdnn.channels = r.get_ints("stage1.tdnn_channels", cfg.tdnn.channels);
  cfg.tdnn.kernels = r.get_ints("stage1.tdnn_kernels", cfg.tdnn.kernels);
  cfg.tdnn.dilations = r.get_ints("stage1.tdnn_dilations", cfg.tdnn.dilations);
  cfg.tdnn.fc = r.get_ints("stage1.tdnn_fc", cfg.tdnn.fc);
  cfg.mlp_hidden = r.get_ints("stage1.mlp_hidden", cfg.mlp_hidden);

  for (const char *attr : {"gender", "nationality", "age", "profession"}) {
    const std::string prefix = std::string("stage1.") + attr;
    bool any = false;
    for (const auto &[k, v] : table)
      if (k.rfind(prefix + ".", 0) == 0) any = true;
    if (any) {
      attrnet::TrainConfig t = cfg.stage1;
      read_train_fields(r, prefix, t);
      cfg.stage1_per_attribute[attr] = t;
    }
  }

  cfg.trials_train_pos = r.get_int("trials.train_pos", cfg.trials_train_pos);
  cfg.trials_train_neg = r.get_int("trials.train_neg", cfg.trials_train_neg);
  cfg.trials_test_pos = r.get_int("trials.test_pos", cfg.trials_test_pos);
  cfg.trials_test_neg = r.get_int("trials.test_neg", cfg.trials_test_neg);

  cfg.stage2.forest_trees = static_cast<int>(r.get_int("stage2.forest_trees", cfg.stage2.forest_trees));
  cfg.stage2.forest_max_depth =
      static_cast<int>(r.get_int("stage2.forest_max_depth", cfg.stage2.forest_max_depth));
  cfg.stage2.forest_min_leaf =
      static_cast<int>(r.get_int("stage2.forest_min_leaf", cfg.stage2.forest_min_leaf));
  cfg.stage2.forest_feature_subsample = static_cast<int>(
      r.get_int("stage2.forest_feature_subsample", cfg.stage2.forest_feature_subsample));
  cfg.stage2.nn_hidden = static_cast<int>(r.get_int("stage2.nn_hidden", cfg.stage2.nn_hidden));
  cfg.stage2.nn_epochs = static_cast<int>(r.get_int("stage2.nn_epochs", cfg.stage2.nn_epochs));
  cfg.stage2.nn_lr = r.get_double("stage2.nn_lr", cfg.stage2.nn_lr);
  cfg.stage2.logreg_epochs =
      static_cast<int>(r.get_int("stage2.logreg_epochs", cfg.stage2.logreg_epochs));
  cfg.stage2.logreg_lr = r.get_double("stage2.logreg_lr", cfg.stage2.logreg_lr);

  cfg.eval_routes = r.get_strings("eval.routes", cfg.eval_routes);
  cfg.eval_modes = r.get_strings("eval.modes", cfg.eval_modes);
  cfg.eval_models = r.get_strings("eval.stage2_models", cfg.eval_models);
  cfg.single_attribute_model =
      r.get_string("eval.single_attribute_model", cfg.single_attribute_model);

  for (const auto &[k, v] : table)
    if (!r.used.count(k)) throw ConfigError("config: unknown key '" + k + "'");

  if (const char *env = std::getenv("ATTRSV_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception &) {
      throw ConfigError("config: ATTRSV_SEED is not a valid integer");
    }
  }

  cfg.stage1.validate();
  for (const auto &[attr, t] : cfg.stage1_per_attribute) t.validate();
  cfg.tdnn.validate();
  cfg.mfcc.validate();
  return cfg;
}

// Artifact locations -------------------------------------------------------

std::string RunConfig::train_manifest_path() const {
  return (fs::path(corpus_dir) / "train" / "manifest.jsonl").string();
}
std::string RunConfig::test_manifest_path() const {
  return (fs::path(corpus_dir) / "test" / "manifest.jsonl").string();
}
std::string RunConfig::embeddings_path(const std::string &tag) const {
  auto it = embedding_files.find(tag);
  if (it != embedding_files.end()) return it->second;
  return (fs::path(corpus_dir) / ("embeddings-" + tag + ".jsonl")).string();
}
std::string RunConfig::cache_path(const std::string &clip_id) const {
  return (fs::path(cache_dir) / (clip_id + ".atsv")).string();
}
std::string RunConfig::trials_path(bool test_split) const {
  return (fs::path(out_dir) / (test_split ? "trials-test.txt" : "trials-train.txt")).string();
}
std::string RunConfig::stage1_model_path(const std::string &route,
                                         const std::string &attr) const {
  return (fs::path(model_dir) / ("stage1-" + route + "-" + attr + ".json")).string();
}
std::string RunConfig::stage2_model_path(const std::string &route, const std::string &mode,
                                         const std::string &kind) const {
  return (fs::path(model_dir) / ("stage2-" + route + "-" + mode + "-" + kind + ".json"))
      .string();
}
std::string RunConfig::similarity_dump_path(const std::string &route,
                                            const std::string &mode) const {
  return (fs::path(out_dir) / ("sv-train-" + route + "-" + mode + ".jsonl")).string();
}
std::string RunConfig::scores_path(const std::string &route, const std::string &mode,
                                   const std::string &kind) const {
  return (fs::path(out_dir) / ("scores-" + route + "-" + mode + "-" + kind + ".jsonl"))
      .string();
}
std::string RunConfig::report_path() const {
  return (fs::path(out_dir) / "report.json").string();
}
std::string RunConfig::csv_path() const {
  return (fs::path(out_dir) / "eer_grid.csv").string();
}
std::string RunConfig::run_record_path(const std::string &command) const {
  return (fs::path(out_dir) / "runs" / (command + ".json")).string();
}

}  // namespace attrsv::cli
