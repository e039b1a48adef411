// attrsv/commands.hpp

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

#ifndef ATTRSV_COMMANDS_HPP
#define ATTRSV_COMMANDS_HPP

#include <string>
#include <vector>

#include "attrsv/config.hpp"
#include "attrsv/corpus.hpp"
#include "attrsv/metrics.hpp"

namespace attrsv::cli {

// Every command is idempotent for a fixed (config, seed): artifacts are
// written deterministically, and a run record keyed by the command lands in
// <out_dir>/runs/.

void run_init(const std::string &out_path);
void run_synth(const RunConfig &cfg);
void run_extract(const RunConfig &cfg);
void run_make_trials(const RunConfig &cfg);
void run_train_attr(const RunConfig &cfg);
void run_train_sv(const RunConfig &cfg);
void run_eval(const RunConfig &cfg, const std::vector<std::string> &attributes_filter = {});

struct ExplainRequest {
  std::string clip_a, clip_b;
  std::string route = "ac";
  std::string mode = "softmax";
  std::string model = "random-forest";
  std::string format = "text";  // text | json
};

struct AttributeExplanation {
  std::string name;
  std::string class_a, class_b;
  double similarity = 0.0;
  double importance = 0.0;
  double contribution = 0.0;   // w_i * s_i for linear models
  bool has_contribution = false;
};

struct Explanation {
  corpus::TrialPair trial;
  std::string route, mode, model_kind;
  std::vector<AttributeExplanation> attributes;  // schema order
  double score = 0.0;
  double threshold = 0.0;  // EER threshold from the most recent eval
  bool decision = false;
  bool linear = false;
  double intercept = 0.0;
  std::string importance_caption;
};

Explanation build_explanation(const RunConfig &cfg, const ExplainRequest &req);

/// text: per attribute (sorted ascending by similarity) both predicted
/// classes, similarity, importance, contribution.  json: the lossless struct.
std::string render_explanation(const Explanation &e, const std::string &format);

/// Synthetic embedding extractor: a seeded random projection of pooled MFCC
/// statistics (means, standard deviations, mean absolute frame deltas),
/// L2-normalized, plus per-clip Gaussian noise at the tag's noise level.
Vector synth_embedding(const dsp::MfccMatrix &features, const std::string &tag,
                       const std::string &clip_id, int dim, double noise_std);

}  // namespace attrsv::cli

#endif  // ATTRSV_COMMANDS_HPP
