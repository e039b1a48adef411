// src/corpus.cpp

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

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "attrsv/rng.hpp"
#include "attrsv/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace attrsv::corpus {

int AttributeSchema::index_of(const std::string &name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == name) return static_cast<int>(i);
  return -1;
}

int AttributeSchema::class_index(int attr, const std::string &class_name) const {
  const auto &classes = attributes[attr].classes;
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == class_name) return static_cast<int>(i);
  return -1;
}

void AttributeSchema::validate() const {
  if (attributes.empty()) throw DataError("schema: no attributes");
  std::set<std::string> names;
  for (const auto &attr : attributes) {
    if (!names.insert(attr.name).second)
      throw DataError("schema: duplicate attribute name '" + attr.name + "'");
    if (attr.classes.size() < 2)
      throw DataError("schema: attribute '" + attr.name + "' needs at least 2 classes");
    std::set<std::string> cls(attr.classes.begin(), attr.classes.end());
    if (cls.size() != attr.classes.size())
      throw DataError("schema: duplicate class name under '" + attr.name + "'");
  }
}

std::string AttributeSchema::canonical() const {
  std::string out;
  for (const auto &attr : attributes) {
    out += attr.name;
    out += ':';
    for (std::size_t i = 0; i < attr.classes.size(); ++i) {
      if (i) out += ',';
      out += attr.classes[i];
    }
    out += ';';
  }
  return out;
}

std::string AttributeSchema::hash() const { return fnv1a64_hex(canonical()); }

AttributeSchema AttributeSchema::defaults(int gender, int nationality, int age,
                                          int profession) {
  auto make = [](const std::string &name, const char *prefix, int k) {
    Attribute a;
    a.name = name;
    for (int i = 0; i < k; ++i) a.classes.push_back(prefix + std::to_string(i));
    return a;
  };
  AttributeSchema s;
  s.attributes = {make("gender", "g", gender), make("nationality", "n", nationality),
                  make("age", "a", age), make("profession", "p", profession)};
  return s;
}

const SpeakerRecord &Manifest::owner(const std::string &clip_id) const {
  auto it = speaker_of_clip.find(clip_id);
  if (it == speaker_of_clip.end())
    throw DataError("manifest: unknown clip id '" + clip_id + "'");
  return speakers[static_cast<std::size_t>(it->second)];
}

std::vector<std::string> Manifest::all_clip_ids() const {
  std::vector<std::string> out;
  for (const auto &spk : speakers)
    out.insert(out.end(), spk.clip_ids.begin(), spk.clip_ids.end());
  return out;
}

namespace {

json parse_json_line(const std::string &line, const std::string &context) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw DataError("manifest: malformed JSON " + context);
  return j;
}

}  // namespace

Manifest load_manifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open " + path);
  const fs::path base = fs::path(path).parent_path();

  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw DataError("manifest: missing schema line in " + path);

  Manifest m;
  {
    json j = parse_json_line(line, "schema line of " + path);
    if (!j.contains("attributes") || !j["attributes"].is_array())
      throw DataError("manifest: schema line lacks 'attributes' array in " + path);
    for (const auto &ja : j["attributes"]) {
      Attribute a;
      a.name = ja.at("name").get<std::string>();
      for (const auto &c : ja.at("classes")) a.classes.push_back(c.get<std::string>());
      m.schema.attributes.push_back(std::move(a));
    }
  }
  m.schema.validate();

  std::set<std::string> speaker_ids;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_json_line(line, "at line " + std::to_string(line_no) + " of " + path);

    SpeakerRecord rec;
    rec.speaker_id = j.at("speaker_id").get<std::string>();
    if (!speaker_ids.insert(rec.speaker_id).second)
      throw DataError("manifest: duplicate speaker id '" + rec.speaker_id + "'");

    const auto &labels = j.at("labels");
    rec.labels.resize(m.schema.attributes.size());
    for (std::size_t a = 0; a < m.schema.attributes.size(); ++a) {
      const auto &attr = m.schema.attributes[a];
      if (!labels.contains(attr.name))
        throw DataError("manifest: speaker '" + rec.speaker_id + "' lacks a '" +
                        attr.name + "' label");
      const std::string cls = labels[attr.name].get<std::string>();
      const int ci = m.schema.class_index(static_cast<int>(a), cls);
      if (ci < 0)
        throw DataError("manifest: speaker '" + rec.speaker_id + "' has unknown " +
                        attr.name + " class '" + cls + "'");
      rec.labels[a] = ci;
    }

    std::set<std::string> within;
    for (const auto &jc : j.at("clips")) {
      const std::string cid = jc.at("id").get<std::string>();
      if (!within.insert(cid).second)
        throw DataError("manifest: duplicate clip id '" + cid + "' under speaker '" +
                        rec.speaker_id + "'");
      if (m.clip_paths.count(cid))
        throw DataError("manifest: clip id '" + cid + "' appears under two speakers");
      rec.clip_ids.push_back(cid);
      const fs::path rel = jc.at("path").get<std::string>();
      m.clip_paths[cid] = (rel.is_absolute() ? rel : base / rel).string();
      m.speaker_of_clip[cid] = static_cast<int>(m.speakers.size());
    }
    m.speakers.push_back(std::move(rec));
  }
  if (m.speakers.empty()) throw DataError("manifest: no speakers in " + path);
  return m;
}

void save_manifest(const std::string &path, const AttributeSchema &schema,
                   const std::vector<SpeakerRecord> &speakers,
                   const std::map<std::string, std::string> &relative_clip_paths) {
  schema.validate();
  std::ostringstream out;
  {
    json attrs = json::array();
    for (const auto &a : schema.attributes)
      attrs.push_back({{"name", a.name}, {"classes", a.classes}});
    out << json{{"attributes", attrs}}.dump() << "\n";
  }
  for (const auto &spk : speakers) {
    json labels = json::object();
    for (std::size_t a = 0; a < schema.attributes.size(); ++a)
      labels[schema.attributes[a].name] =
          schema.attributes[a].classes[static_cast<std::size_t>(spk.labels[a])];
    json clips = json::array();
    for (const auto &cid : spk.clip_ids) {
      auto it = relative_clip_paths.find(cid);
      if (it == relative_clip_paths.end())
        throw DataError("manifest: no path for clip '" + cid + "'");
      clips.push_back({{"id", cid}, {"path", it->second}});
    }
    out << json{{"speaker_id", spk.speaker_id}, {"labels", labels}, {"clips", clips}}.dump()
        << "\n";
  }
  write_text_file(path, out.str());
}

namespace {

struct ClipRef {
  int speaker;
  int clip;  // index into flattened clip list
};

std::uint64_t pack_pair(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

TrialSet generate_trials(const Manifest &manifest, long n_pos, long n_neg,
                         std::uint64_t seed) {
  std::vector<std::string> clips;
  std::vector<int> clip_speaker;
  for (std::size_t s = 0; s < manifest.speakers.size(); ++s)
    for (const auto &cid : manifest.speakers[s].clip_ids) {
      clips.push_back(cid);
      clip_speaker.push_back(static_cast<int>(s));
    }

  const long n_clips = static_cast<long>(clips.size());
  bool any_multi = false;
  for (const auto &spk : manifest.speakers)
    if (spk.clip_ids.size() >= 2) any_multi = true;
  if (n_pos > 0 && !any_multi)
    throw DataError("trials: positives requested but no speaker has 2 clips");
  if (n_neg > 0 && manifest.speakers.size() < 2)
    throw DataError("trials: negatives requested but fewer than 2 speakers");
  if (n_pos < 0 || n_neg < 0) throw ConfigError("trials: counts must be nonnegative");

  TrialSet out;
  Rng rng(mix_seed(seed, 0x7214));

  // Positive pool is small enough to enumerate outright.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pos_pool;
  {
    std::uint32_t base = 0;
    for (const auto &spk : manifest.speakers) {
      const std::uint32_t n = static_cast<std::uint32_t>(spk.clip_ids.size());
      for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
          pos_pool.emplace_back(base + i, base + j);
      base += n;
    }
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> picked_pos;
  if (n_pos <= static_cast<long>(pos_pool.size())) {
    rng.shuffle(pos_pool);
    picked_pos.assign(pos_pool.begin(), pos_pool.begin() + n_pos);
  } else {
    out.pos_with_replacement = true;
    for (long i = 0; i < n_pos; ++i)
      picked_pos.push_back(pos_pool[rng.uniform_u64(pos_pool.size())]);
  }

  // Negatives: enumerate when the cross pool is modest, otherwise rejection
  // sample with a dedupe set.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> picked_neg;
  const double total_pairs = 0.5 * static_cast<double>(n_clips) * (n_clips - 1);
  const double neg_pool_size = total_pairs - static_cast<double>(pos_pool.size());
  if (neg_pool_size <= 0 && n_neg > 0)
    throw DataError("trials: no cross-speaker pairs available");
  if (n_neg > 0) {
    if (neg_pool_size <= 4e6) {
      std::vector<std::pair<std::uint32_t, std::uint32_t>> neg_pool;
      neg_pool.reserve(static_cast<std::size_t>(neg_pool_size));
      for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n_clips); ++i)
        for (std::uint32_t j = i + 1; j < static_cast<std::uint32_t>(n_clips); ++j)
          if (clip_speaker[i] != clip_speaker[j]) neg_pool.emplace_back(i, j);
      if (n_neg <= static_cast<long>(neg_pool.size())) {
        rng.shuffle(neg_pool);
        picked_neg.assign(neg_pool.begin(), neg_pool.begin() + n_neg);
      } else {
        out.neg_with_replacement = true;
        for (long i = 0; i < n_neg; ++i)
          picked_neg.push_back(neg_pool[rng.uniform_u64(neg_pool.size())]);
      }
    } else {
      std::unordered_set<std::uint64_t> used;
      while (static_cast<long>(picked_neg.size()) < n_neg) {
        const auto i = static_cast<std::uint32_t>(rng.uniform_u64(n_clips));
        const auto j = static_cast<std::uint32_t>(rng.uniform_u64(n_clips));
        if (i == j || clip_speaker[i] == clip_speaker[j]) continue;
        if (!used.insert(pack_pair(i, j)).second) continue;
        picked_neg.emplace_back(std::min(i, j), std::max(i, j));
      }
    }
  }

  out.n_pos = static_cast<long>(picked_pos.size());
  out.n_neg = static_cast<long>(picked_neg.size());
  out.trials.reserve(picked_pos.size() + picked_neg.size());
  for (const auto &[a, b] : picked_pos) out.trials.push_back({clips[a], clips[b], true});
  for (const auto &[a, b] : picked_neg) out.trials.push_back({clips[a], clips[b], false});
  rng.shuffle(out.trials);
  return out;
}

void save_trials(const std::string &path, const std::vector<TrialPair> &trials) {
  std::ostringstream out;
  for (const auto &t : trials)
    out << (t.target ? 1 : 0) << ' ' << t.clip_a << ' ' << t.clip_b << "\n";
  write_text_file(path, out.str());
}

std::vector<TrialPair> load_trials(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("trials: cannot open " + path);
  std::vector<TrialPair> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int label;
    TrialPair t;
    if (!(ss >> label >> t.clip_a >> t.clip_b) || (label != 0 && label != 1))
      throw DataError("trials: malformed line " + std::to_string(line_no) + " in " + path);
    t.target = label == 1;
    out.push_back(std::move(t));
  }
  return out;
}

Vector label_distribution(const std::vector<SpeakerRecord> &records,
                          const AttributeSchema &schema, const std::string &attribute) {
  const int a = schema.index_of(attribute);
  if (a < 0) throw DataError("label_distribution: unknown attribute '" + attribute + "'");
  if (records.empty()) throw DataError("label_distribution: no records");
  Vector counts = Vector::Zero(static_cast<Eigen::Index>(schema.attributes[a].classes.size()));
  for (const auto &rec : records) counts[rec.labels[static_cast<std::size_t>(a)]] += 1.0;
  return counts / counts.sum();
}

void SynthSpec::validate() const {
  if (n_speakers <= 0) throw ConfigError("synth: zero speakers requested");
  if (clips_per_speaker <= 0) throw ConfigError("synth: clips_per_speaker must be positive");
  if (sample_rate <= 0) throw ConfigError("synth: sample_rate must be positive");
  if (clip_duration_sec * sample_rate < 0.025 * sample_rate || clip_duration_sec < 0.025)
    throw ConfigError("synth: clip duration shorter than one 25 ms frame");
  schema.validate();
  for (const auto &[name, p] : priors) {
    const int a = schema.index_of(name);
    if (a < 0) throw ConfigError("synth: prior for unknown attribute '" + name + "'");
    if (p.size() != schema.attributes[static_cast<std::size_t>(a)].classes.size())
      throw ConfigError("synth: prior length mismatch for '" + name + "'");
    double sum = 0.0;
    for (double v : p) {
      if (v < 0.0) throw ConfigError("synth: negative prior for '" + name + "'");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ConfigError("synth: prior for '" + name + "' does not sum to 1");
  }
}

namespace {

// Class-to-acoustics maps.  Spacings are wide relative to the per-speaker
// jitter so each attribute stays decodable from audio alone.

double gender_f0(int cls, int k, double u) {
  const double step = 145.0 / k;
  const double lo = 95.0 + cls * step;
  return lo + u * 0.6 * step;
}

double nationality_peak1(int cls, int k) {
  return k > 1 ? 480.0 + 1620.0 * cls / (k - 1) : 480.0;
}

double nationality_peak2(int cls, int k) {
  return k > 1 ? 2700.0 + 2800.0 * cls / (k - 1) : 2700.0;
}

double age_tilt(int cls, int k) {
  return k > 1 ? -13.0 + 13.5 * cls / (k - 1) : -13.0;
}

double profession_rate(int cls, int k) {
  return k > 1 ? 1.8 * std::pow(25.0 / 1.8, static_cast<double>(cls) / (k - 1)) : 1.8;
}

double gauss_bump(double f, double center, double width) {
  const double d = (f - center) / width;
  return std::exp(-0.5 * d * d);
}

double envelope(double f, const VoiceTraits &v) {
  const double ref = std::max(f, 180.0);
  const double tilt = std::pow(10.0, v.tilt_db_per_oct * std::log2(ref / 180.0) / 20.0);
  return tilt * (1.0 + 6.0 * gauss_bump(f, v.peak1_hz, 110.0) +
                 6.0 * gauss_bump(f, v.peak2_hz, 170.0));
}

int attr_or_throw(const AttributeSchema &schema, const char *name) {
  const int a = schema.index_of(name);
  if (a < 0) throw ConfigError(std::string("synth: schema lacks attribute '") + name + "'");
  return a;
}

}  // namespace

VoiceTraits derive_voice(const SynthSpec &spec, const std::vector<int> &labels,
                         std::uint64_t speaker_seed) {
  const auto &schema = spec.schema;
  const int ag = attr_or_throw(schema, "gender");
  const int an = attr_or_throw(schema, "nationality");
  const int aa = attr_or_throw(schema, "age");
  const int ap = attr_or_throw(schema, "profession");

  Rng rng(mix_seed(speaker_seed, 0x701CE));
  VoiceTraits v;
  v.f0_hz = gender_f0(labels[static_cast<std::size_t>(ag)],
                      static_cast<int>(schema.attributes[ag].classes.size()), rng.uniform());
  const int kn = static_cast<int>(schema.attributes[an].classes.size());
  v.peak1_hz = nationality_peak1(labels[an], kn) * (1.0 + 0.012 * (2.0 * rng.uniform() - 1.0));
  v.peak2_hz = nationality_peak2(labels[an], kn) * (1.0 + 0.012 * (2.0 * rng.uniform() - 1.0));
  v.tilt_db_per_oct = age_tilt(labels[aa], static_cast<int>(schema.attributes[aa].classes.size())) +
                      0.35 * (2.0 * rng.uniform() - 1.0);
  v.am_rate_hz = profession_rate(labels[ap],
                                 static_cast<int>(schema.attributes[ap].classes.size())) *
                 (1.0 + 0.012 * (2.0 * rng.uniform() - 1.0));
  return v;
}

dsp::AudioClip render_clip(const SynthSpec &spec, const std::vector<int> &labels,
                           std::uint64_t speaker_seed, int clip_index,
                           const std::string &clip_id) {
  const VoiceTraits v = derive_voice(spec, labels, speaker_seed);
  Rng rng(mix_seed(speaker_seed, 1000 + static_cast<std::uint64_t>(clip_index)));

  const double f0 = v.f0_hz * (1.0 + 0.01 * (2.0 * rng.uniform() - 1.0));
  const double am_phase = 2.0 * M_PI * rng.uniform();
  const double am_rate = v.am_rate_hz * (1.0 + 0.008 * (2.0 * rng.uniform() - 1.0));

  const double f_max = std::min(6800.0, 0.85 * spec.sample_rate / 2.0);
  const int n_harm = std::max(1, static_cast<int>(f_max / f0));

  std::vector<double> amps(static_cast<std::size_t>(n_harm));
  double amp_sum = 0.0;
  for (int h = 1; h <= n_harm; ++h) {
    amps[h - 1] = envelope(h * f0, v);
    amp_sum += amps[h - 1];
  }
  for (double &a : amps) a *= spec.harmonic_amplitude / amp_sum;

  // Rotating phasors avoid per-sample trig for the harmonic bank.
  std::vector<std::complex<double>> phase(amps.size()), step(amps.size());
  for (int h = 1; h <= n_harm; ++h) {
    const double phi = 2.0 * M_PI * rng.uniform();
    phase[h - 1] = std::polar(1.0, phi);
    step[h - 1] = std::polar(1.0, 2.0 * M_PI * h * f0 / spec.sample_rate);
  }
  std::complex<double> am_phasor = std::polar(1.0, am_phase);
  const std::complex<double> am_step =
      std::polar(1.0, 2.0 * M_PI * am_rate / spec.sample_rate);

  dsp::AudioClip clip;
  clip.sample_rate = spec.sample_rate;
  clip.source_id = clip_id;
  const auto n = static_cast<std::size_t>(std::lround(spec.clip_duration_sec * spec.sample_rate));
  clip.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (std::size_t h = 0; h < amps.size(); ++h) {
      s += amps[h] * phase[h].imag();
      phase[h] *= step[h];
    }
    const double am = 1.0 + spec.am_depth * am_phasor.imag();
    am_phasor *= am_step;
    double x = am * s + spec.noise_std * rng.normal();
    clip.samples[t] = std::max(-0.999, std::min(0.999, x));
  }
  return clip;
}

SynthResult synthesize_corpus(const SynthSpec &spec, std::uint64_t seed,
                              const std::string &out_dir) {
  spec.validate();
  fs::create_directories(fs::path(out_dir) / "wav");

  SynthResult result;
  result.manifest.schema = spec.schema;

  std::map<std::string, std::vector<double>> priors;
  for (const auto &attr : spec.schema.attributes) {
    auto it = spec.priors.find(attr.name);
    if (it != spec.priors.end()) {
      priors[attr.name] = it->second;
    } else {
      priors[attr.name] =
          std::vector<double>(attr.classes.size(), 1.0 / attr.classes.size());
    }
  }

  std::map<std::string, std::string> rel_paths;
  char buf[32];
  for (int s = 0; s < spec.n_speakers; ++s) {
    const std::uint64_t speaker_seed = mix_seed(seed, static_cast<std::uint64_t>(s));
    Rng label_rng(mix_seed(speaker_seed, 0x1abe1));

    SpeakerRecord rec;
    std::snprintf(buf, sizeof buf, "%s%04d", spec.speaker_prefix.c_str(), s);
    rec.speaker_id = buf;
    for (const auto &attr : spec.schema.attributes)
      rec.labels.push_back(label_rng.sample_discrete(priors[attr.name]));

    for (int c = 0; c < spec.clips_per_speaker; ++c) {
      std::snprintf(buf, sizeof buf, "%s_c%02d", rec.speaker_id.c_str(), c);
      const std::string clip_id = buf;
      rec.clip_ids.push_back(clip_id);
      const std::string rel = "wav/" + clip_id + ".wav";
      rel_paths[clip_id] = rel;

      const dsp::AudioClip clip = render_clip(spec, rec.labels, speaker_seed, c, clip_id);
      const std::string wav_path = (fs::path(out_dir) / rel).string();
      dsp::write_wav(wav_path, clip);
      result.wav_paths.push_back(wav_path);

      result.manifest.clip_paths[clip_id] = wav_path;
      result.manifest.speaker_of_clip[clip_id] = s;
    }
    result.manifest.speakers.push_back(std::move(rec));
  }

  result.manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
  save_manifest(result.manifest_path, spec.schema, result.manifest.speakers, rel_paths);
  return result;
}

}  // namespace attrsv::corpus
