// src/similarity.cpp

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

#include "attrsv/similarity.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "attrsv/serialize.hpp"

using nlohmann::json;

namespace attrsv::similarity {

std::string mode_name(Mode m) { return m == Mode::kHard ? "hard" : "softmax"; }

Mode mode_from_name(const std::string &name) {
  if (name == "hard") return Mode::kHard;
  if (name == "softmax") return Mode::kSoftmax;
  throw DataError("unknown similarity mode '" + name + "'");
}

double cosine(const Vector &p, const Vector &q) {
  if (p.size() != q.size()) throw DataError("cosine: vector length mismatch");
  const double denom = std::max(p.norm() * q.norm(), 1e-12);
  return p.dot(q) / denom;
}

namespace {

void check_schema(const AttributeOutputs &a, const AttributeOutputs &b) {
  if (a.schema_hash != b.schema_hash || a.classes.size() != b.classes.size() ||
      a.probs.size() != b.probs.size())
    throw DataError("similarity: schema mismatch between outputs");
  for (std::size_t i = 0; i < a.probs.size(); ++i)
    if (a.probs[i].size() != b.probs[i].size())
      throw DataError("similarity: probability vector length mismatch at attribute " +
                      std::to_string(i));
}

}  // namespace

SimilarityVector hard_similarity(const AttributeOutputs &a, const AttributeOutputs &b) {
  check_schema(a, b);
  SimilarityVector sv;
  sv.mode = Mode::kHard;
  sv.schema_hash = a.schema_hash;
  sv.values.resize(static_cast<Eigen::Index>(a.classes.size()));
  for (std::size_t i = 0; i < a.classes.size(); ++i)
    sv.values[static_cast<Eigen::Index>(i)] = a.classes[i] == b.classes[i] ? 1.0 : 0.0;
  return sv;
}

SimilarityVector softmax_similarity(const AttributeOutputs &a, const AttributeOutputs &b) {
  check_schema(a, b);
  SimilarityVector sv;
  sv.mode = Mode::kSoftmax;
  sv.schema_hash = a.schema_hash;
  sv.values.resize(static_cast<Eigen::Index>(a.probs.size()));
  for (std::size_t i = 0; i < a.probs.size(); ++i)
    sv.values[static_cast<Eigen::Index>(i)] = cosine(a.probs[i], b.probs[i]);
  return sv;
}

SimilarityVector groundtruth_similarity(const corpus::SpeakerRecord &rec_a,
                                        const corpus::SpeakerRecord &rec_b,
                                        const corpus::AttributeSchema &schema) {
  if (rec_a.labels.size() != schema.attributes.size() ||
      rec_b.labels.size() != schema.attributes.size())
    throw DataError("groundtruth similarity: records do not match the schema");
  SimilarityVector sv;
  sv.mode = Mode::kHard;
  sv.schema_hash = schema.hash();
  sv.values.resize(static_cast<Eigen::Index>(schema.attributes.size()));
  for (std::size_t i = 0; i < schema.attributes.size(); ++i)
    sv.values[static_cast<Eigen::Index>(i)] = rec_a.labels[i] == rec_b.labels[i] ? 1.0 : 0.0;
  return sv;
}

SimilarityVector random_similarity(const corpus::AttributeSchema &schema,
                                   const std::vector<std::vector<double>> &distributions,
                                   Rng &rng) {
  if (distributions.size() != schema.attributes.size())
    throw DataError("random similarity: one distribution per attribute required");
  SimilarityVector sv;
  sv.mode = Mode::kHard;
  sv.schema_hash = schema.hash();
  sv.values.resize(static_cast<Eigen::Index>(schema.attributes.size()));
  for (std::size_t i = 0; i < schema.attributes.size(); ++i) {
    if (distributions[i].size() != schema.attributes[i].classes.size())
      throw DataError("random similarity: distribution length mismatch for '" +
                      schema.attributes[i].name + "'");
    const int la = rng.sample_discrete(distributions[i]);
    const int lb = rng.sample_discrete(distributions[i]);
    sv.values[static_cast<Eigen::Index>(i)] = la == lb ? 1.0 : 0.0;
  }
  return sv;
}

SimilarityVector random_similarity(const corpus::AttributeSchema &schema,
                                   const std::vector<std::vector<double>> &distributions,
                                   std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x4a2d));
  return random_similarity(schema, distributions, rng);
}

void save_similarity_dump(const std::string &path, const std::string &schema_hash,
                          Mode mode, const std::vector<DumpRow> &rows) {
  std::ostringstream out;
  out << json{{"format_version", 1}, {"schema_hash", schema_hash}, {"mode", mode_name(mode)}}
             .dump()
      << "\n";
  for (const auto &row : rows) {
    json j;
    j["trial"] = {row.clip_a, row.clip_b};
    j["target"] = row.target;
    j["mode"] = mode_name(mode);
    j["values"] = to_std(row.values);
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

SimilarityDump load_similarity_dump(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("similarity dump: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("similarity dump: empty file " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("schema_hash"))
    throw DataError("similarity dump: malformed header in " + path);

  SimilarityDump dump;
  dump.schema_hash = header.at("schema_hash").get<std::string>();
  dump.mode = mode_from_name(header.at("mode").get<std::string>());
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw DataError("similarity dump: malformed JSON at line " + std::to_string(line_no) +
                      " of " + path);
    DumpRow row;
    row.clip_a = j.at("trial").at(0).get<std::string>();
    row.clip_b = j.at("trial").at(1).get<std::string>();
    row.target = j.at("target").get<int>();
    row.values = to_eigen(j.at("values").get<std::vector<double>>());
    dump.rows.push_back(std::move(row));
  }
  return dump;
}

}  // namespace attrsv::similarity
