// attrsv/similarity.hpp

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

#ifndef ATTRSV_SIMILARITY_HPP
#define ATTRSV_SIMILARITY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "attrsv/common.hpp"
#include "attrsv/corpus.hpp"
#include "attrsv/rng.hpp"

namespace attrsv::similarity {

enum class Mode { kHard, kSoftmax };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string &name);

/// Stage-1 outputs for one clip: per attribute in schema order.
struct AttributeOutputs {
  std::vector<int> classes;
  std::vector<Vector> probs;
  std::string schema_hash;
};

/// Per-attribute agreement scores, schema order.
struct SimilarityVector {
  Vector values;
  Mode mode = Mode::kHard;
  std::string schema_hash;
};

/// Cosine in double precision with a 1e-12 denominator guard.
double cosine(const Vector &p, const Vector &q);

/// Component i = 1.0 iff the predicted class indices match.
SimilarityVector hard_similarity(const AttributeOutputs &a, const AttributeOutputs &b);

/// Component i = cos(p_i, q_i) over the probability vectors.
SimilarityVector softmax_similarity(const AttributeOutputs &a, const AttributeOutputs &b);

/// Hard similarity over true manifest labels, bypassing classifiers.
SimilarityVector groundtruth_similarity(const corpus::SpeakerRecord &rec_a,
                                        const corpus::SpeakerRecord &rec_b,
                                        const corpus::AttributeSchema &schema);

/// Two labels per attribute drawn independently from its distribution;
/// component 1 if they collide.  Deterministic per seed.
SimilarityVector random_similarity(const corpus::AttributeSchema &schema,
                                   const std::vector<std::vector<double>> &distributions,
                                   std::uint64_t seed);
SimilarityVector random_similarity(const corpus::AttributeSchema &schema,
                                   const std::vector<std::vector<double>> &distributions,
                                   Rng &rng);

/// One dumped similarity row (stage-2 training reuse).
struct DumpRow {
  std::string clip_a, clip_b;
  int target = 0;
  Vector values;
};

// JSON-lines: a header {"format_version","schema_hash","mode"} then one
// {"trial":[a,b],"target":0|1,"mode":...,"values":[...]} line per trial.
void save_similarity_dump(const std::string &path, const std::string &schema_hash,
                          Mode mode, const std::vector<DumpRow> &rows);
struct SimilarityDump {
  std::string schema_hash;
  Mode mode = Mode::kHard;
  std::vector<DumpRow> rows;
};
SimilarityDump load_similarity_dump(const std::string &path);

}  // namespace attrsv::similarity

#endif  // ATTRSV_SIMILARITY_HPP
