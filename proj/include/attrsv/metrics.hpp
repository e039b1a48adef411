// attrsv/metrics.hpp

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

#ifndef ATTRSV_METRICS_HPP
#define ATTRSV_METRICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "attrsv/common.hpp"
#include "attrsv/corpus.hpp"
#include "attrsv/similarity.hpp"
#include "attrsv/verifier.hpp"

namespace attrsv::metrics {

/// FAR/FRR evaluated at every candidate threshold: the sorted unique scores
/// plus -inf / +inf sentinels.  FAR(t) = fraction of negatives scoring >= t,
/// FRR(t) = fraction of positives scoring < t.
struct ErrorCurve {
  std::vector<double> thresholds;  // ascending, sentinels at both ends
  std::vector<double> far, frr;
  long n_pos = 0, n_neg = 0;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  long n_pos = 0, n_neg = 0;
  bool degenerate_curve = false;   // two or fewer distinct finite score values
  bool boundary_threshold = false; // crossing resolved at a curve boundary
};

struct LabeledScore {
  double score = 0.0;
  bool target = false;
};

ErrorCurve error_curve(const std::vector<LabeledScore> &scores);

/// EER at the FAR = FRR crossing: linear interpolation between the two
/// bracketing thresholds; (FAR+FRR)/2 at the bracketing point minimizing
/// |FAR - FRR| when the crossing lands on a sentinel boundary.
EerResult equal_error_rate(const ErrorCurve &curve);

/// Convenience wrapper used across the toolkit.
EerResult eer_from_scores(const std::vector<double> &scores, const std::vector<int> &targets);

// ---------------------------------------------------------------------------
// End-to-end system evaluation.

/// Stage-1 route selector: the groundtruth and random baselines, or a
/// predicted route identified by its tag ("ac" or an embedding tag).
struct RouteId {
  enum Kind { kGroundtruth, kRandom, kPredicted } kind = kPredicted;
  std::string tag;

  static RouteId groundtruth() { return {kGroundtruth, "groundtruth"}; }
  static RouteId random() { return {kRandom, "random"}; }
  static RouteId predicted(const std::string &tag) { return {kPredicted, tag}; }
  std::string name() const { return tag; }
};

struct StageTwoParams {
  int forest_trees = 100;
  int forest_max_depth = 8;
  int forest_min_leaf = 5;
  int forest_feature_subsample = 0;  // 0 = ceil(sqrt(k))
  int nn_hidden = 16;
  int nn_epochs = 500;
  double nn_lr = 0.1;
  int logreg_epochs = 500;
  double logreg_lr = 0.5;
};

/// Everything a system evaluation needs; route_outputs maps a predicted route
/// tag to per-clip stage-1 outputs covering both splits.
struct SystemInputs {
  corpus::AttributeSchema schema;
  const corpus::Manifest *train_manifest = nullptr;
  const corpus::Manifest *test_manifest = nullptr;
  std::vector<corpus::TrialPair> train_trials, test_trials;
  std::map<std::string, std::map<std::string, similarity::AttributeOutputs>> route_outputs;
  StageTwoParams stage2;
  std::uint64_t seed = 0;
};

struct SystemResult {
  EerResult eer;
  std::map<std::string, double> per_attribute_accuracy;  // predicted routes only
  verifier::ImportanceReport importance;
  verifier::StageTwoModel model;
  std::vector<verifier::TrialScore> test_scores;
};

/// Builds the similarity vector for one trial under a route/mode, honoring an
/// optional attribute mask (indices into the schema).
similarity::SimilarityVector trial_similarity(const SystemInputs &in, const RouteId &route,
                                              similarity::Mode mode,
                                              const corpus::TrialPair &trial, bool test_split,
                                              long trial_index,
                                              const std::vector<int> &attr_mask = {});

/// Similarity vectors plus targets for a whole trial split.
std::vector<verifier::SimSample> similarity_set(const SystemInputs &in, const RouteId &route,
                                                similarity::Mode mode, bool test_split,
                                                const std::vector<int> &attr_mask = {});

struct FitOutcome {
  verifier::StageTwoModel model;
  std::vector<verifier::SimSample> train_set;
};

/// Fits one stage-2 cell on the train trials; the cell seed derives from the
/// master seed and the (route, mode, kind, mask) identity.
FitOutcome fit_stage_two(const SystemInputs &in, const RouteId &route, similarity::Mode mode,
                         verifier::ModelKind kind, const std::vector<int> &attr_mask = {});

/// Fits the stage-2 model on the train trials and scores the test trials.
SystemResult evaluate_system(const SystemInputs &in, const RouteId &route,
                             similarity::Mode mode, verifier::ModelKind kind,
                             const std::vector<int> &attr_mask = {});

/// Stage-1 accuracy of a predicted route over the test manifest's clips.
std::map<std::string, double> route_accuracy(const SystemInputs &in, const std::string &tag);

/// Similarity vector reduced to a single attribute before stage 2.
EerResult single_attribute_eer(const SystemInputs &in, const std::string &attribute,
                               similarity::Mode mode, const RouteId &route,
                               verifier::ModelKind kind);

// ---------------------------------------------------------------------------
// Aggregated report.

struct ReportCell {
  std::string route, mode, kind;
  EerResult eer;
  std::vector<double> importance;
  std::string importance_method;
};

struct SingleAttrCell {
  std::string attribute, route, mode, kind;
  EerResult eer;
};

struct Report {
  std::string toolkit_version, config_fingerprint, schema_hash;
  std::vector<std::string> attribute_names;
  long train_pos = 0, train_neg = 0, test_pos = 0, test_neg = 0;
  std::map<std::string, std::map<std::string, double>> accuracy;  // route -> attr -> acc
  std::vector<ReportCell> cells;
  std::vector<SingleAttrCell> single_attribute;

  std::string to_json_string() const;
  static Report from_json_string(const std::string &text);
  /// Flat EER grid: one row per stage-2 model, columns groundtruth,
  /// softmax routes, hard routes, random.
  std::string to_csv(const std::vector<std::string> &predicted_routes) const;
};

}  // namespace attrsv::metrics

#endif  // ATTRSV_METRICS_HPP
