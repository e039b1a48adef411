// src/metrics.cpp

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

#include "attrsv/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "attrsv/rng.hpp"
#include "attrsv/serialize.hpp"

using nlohmann::json;

namespace attrsv::metrics {

ErrorCurve error_curve(const std::vector<LabeledScore> &scores) {
  std::vector<double> pos, neg;
  for (const auto &s : scores) (s.target ? pos : neg).push_back(s.score);
  if (pos.empty() || neg.empty())
    throw DataError("error_curve: need at least one positive and one negative trial");
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> thresholds;
  thresholds.reserve(pos.size() + neg.size() + 2);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  {
    std::vector<double> all;
    all.reserve(pos.size() + neg.size());
    all.insert(all.end(), pos.begin(), pos.end());
    all.insert(all.end(), neg.begin(), neg.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    thresholds.insert(thresholds.end(), all.begin(), all.end());
  }
  thresholds.push_back(std::numeric_limits<double>::infinity());

  ErrorCurve curve;
  curve.n_pos = static_cast<long>(pos.size());
  curve.n_neg = static_cast<long>(neg.size());
  curve.thresholds = thresholds;
  curve.far.resize(thresholds.size());
  curve.frr.resize(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    const auto neg_ge =
        neg.end() - std::lower_bound(neg.begin(), neg.end(), t);  // scores >= t
    const auto pos_lt = std::lower_bound(pos.begin(), pos.end(), t) - pos.begin();
    curve.far[i] = static_cast<double>(neg_ge) / static_cast<double>(neg.size());
    curve.frr[i] = static_cast<double>(pos_lt) / static_cast<double>(pos.size());
  }
  return curve;
}

EerResult equal_error_rate(const ErrorCurve &curve) {
  if (curve.thresholds.size() < 2 || curve.thresholds.size() != curve.far.size() ||
      curve.thresholds.size() != curve.frr.size())
    throw DataError("equal_error_rate: malformed curve");

  EerResult result;
  result.n_pos = curve.n_pos;
  result.n_neg = curve.n_neg;
  result.degenerate_curve = curve.thresholds.size() <= 4;  // sentinels + <=2 scores

  // diff = FAR - FRR is non-increasing: 1 at -inf, -1 at +inf.
  const std::size_t n = curve.thresholds.size();
  std::size_t lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = curve.far[i] - curve.frr[i];
    if (d == 0.0) {
      result.eer = curve.far[i];
      result.threshold = curve.thresholds[i];
      if (!std::isfinite(result.threshold)) {
        result.boundary_threshold = true;
        result.threshold = i == 0 ? curve.thresholds[1] : curve.thresholds[n - 2];
      }
      return result;
    }
    if (d > 0.0) lo = i;
    if (d < 0.0) break;
  }
  const std::size_t hi = lo + 1;

  const double d_lo = curve.far[lo] - curve.frr[lo];
  const double d_hi = curve.far[hi] - curve.frr[hi];
  const double t_lo = curve.thresholds[lo], t_hi = curve.thresholds[hi];
  if (std::isfinite(t_lo) && std::isfinite(t_hi)) {
    const double alpha = d_lo / (d_lo - d_hi);
    result.eer = curve.far[lo] + alpha * (curve.far[hi] - curve.far[lo]);
    result.threshold = t_lo + alpha * (t_hi - t_lo);
    return result;
  }

  // Crossing lands on a sentinel: take the bracketing point that minimizes
  // |FAR - FRR| and report the midpoint of its error pair.
  const std::size_t pick = std::abs(d_lo) <= std::abs(d_hi) ? lo : hi;
  result.eer = 0.5 * (curve.far[pick] + curve.frr[pick]);
  result.boundary_threshold = !std::isfinite(curve.thresholds[pick]);
  result.threshold = std::isfinite(curve.thresholds[pick])
                         ? curve.thresholds[pick]
                         : (pick == 0 ? curve.thresholds[1] : curve.thresholds[n - 2]);
  return result;
}

EerResult eer_from_scores(const std::vector<double> &scores,
                          const std::vector<int> &targets) {
  if (scores.size() != targets.size())
    throw DataError("eer: scores/targets length mismatch");
  std::vector<LabeledScore> labeled(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    labeled[i] = {scores[i], targets[i] != 0};
  return equal_error_rate(error_curve(labeled));
}

// ---------------------------------------------------------------------------

namespace {

const corpus::Manifest &manifest_for_clip(const SystemInputs &in, const std::string &clip) {
  if (in.test_manifest && in.test_manifest->speaker_of_clip.count(clip))
    return *in.test_manifest;
  if (in.train_manifest && in.train_manifest->speaker_of_clip.count(clip))
    return *in.train_manifest;
  throw DataError("evaluation: clip '" + clip + "' not present in any manifest");
}

Vector apply_mask(const Vector &values, const std::vector<int> &mask) {
  if (mask.empty()) return values;
  Vector out(static_cast<Eigen::Index>(mask.size()));
  for (std::size_t i = 0; i < mask.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[mask[i]];
  return out;
}

std::string masked_hash(const std::string &schema_hash, const std::vector<int> &mask) {
  if (mask.empty()) return schema_hash;
  std::string tag = schema_hash + ":mask";
  for (int m : mask) tag += ":" + std::to_string(m);
  return fnv1a64_hex(tag);
}

const similarity::AttributeOutputs &clip_outputs(const SystemInputs &in,
                                                 const std::string &route_tag,
                                                 const std::string &clip) {
  auto rit = in.route_outputs.find(route_tag);
  if (rit == in.route_outputs.end())
    throw DataError("evaluation: no stage-1 outputs for route '" + route_tag + "'");
  auto cit = rit->second.find(clip);
  if (cit == rit->second.end())
    throw DataError("evaluation: route '" + route_tag + "' lacks outputs for clip '" +
                    clip + "'");
  return cit->second;
}

std::vector<std::vector<double>> train_distributions(const SystemInputs &in) {
  if (!in.train_manifest) throw DataError("evaluation: train manifest required");
  std::vector<std::vector<double>> dists;
  for (const auto &attr : in.schema.attributes) {
    Vector d = corpus::label_distribution(in.train_manifest->speakers, in.schema, attr.name);
    dists.push_back(to_std(d));
  }
  return dists;
}

}  // namespace

namespace {

similarity::SimilarityVector trial_similarity_impl(
    const SystemInputs &in, const RouteId &route, similarity::Mode mode,
    const corpus::TrialPair &trial, bool test_split, long trial_index,
    const std::vector<int> &attr_mask, const std::vector<std::vector<double>> *dists) {
  similarity::SimilarityVector sv;
  switch (route.kind) {
    case RouteId::kGroundtruth: {
      const corpus::Manifest &ma = manifest_for_clip(in, trial.clip_a);
      const corpus::Manifest &mb = manifest_for_clip(in, trial.clip_b);
      sv = similarity::groundtruth_similarity(ma.owner(trial.clip_a), mb.owner(trial.clip_b),
                                              in.schema);
      break;
    }
    case RouteId::kRandom: {
      const std::uint64_t stream =
          mix_seed(in.seed, (test_split ? 0x7e57u : 0x7124u) + 2ull * trial_index);
      sv = similarity::random_similarity(in.schema, *dists, stream);
      break;
    }
    case RouteId::kPredicted: {
      const auto &oa = clip_outputs(in, route.tag, trial.clip_a);
      const auto &ob = clip_outputs(in, route.tag, trial.clip_b);
      sv = mode == similarity::Mode::kHard ? similarity::hard_similarity(oa, ob)
                                           : similarity::softmax_similarity(oa, ob);
      break;
    }
  }
  if (!attr_mask.empty()) {
    sv.values = apply_mask(sv.values, attr_mask);
    sv.schema_hash = masked_hash(sv.schema_hash, attr_mask);
  }
  return sv;
}

}  // namespace

similarity::SimilarityVector trial_similarity(const SystemInputs &in, const RouteId &route,
                                              similarity::Mode mode,
                                              const corpus::TrialPair &trial, bool test_split,
                                              long trial_index,
                                              const std::vector<int> &attr_mask) {
  std::vector<std::vector<double>> dists;
  if (route.kind == RouteId::kRandom) dists = train_distributions(in);
  return trial_similarity_impl(in, route, mode, trial, test_split, trial_index, attr_mask,
                               &dists);
}

std::vector<verifier::SimSample> similarity_set(const SystemInputs &in, const RouteId &route,
                                                similarity::Mode mode, bool test_split,
                                                const std::vector<int> &attr_mask) {
  const auto &trials = test_split ? in.test_trials : in.train_trials;
  std::vector<std::vector<double>> dists;
  if (route.kind == RouteId::kRandom) dists = train_distributions(in);
  std::vector<verifier::SimSample> out(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto sv = trial_similarity_impl(in, route, mode, trials[i], test_split,
                                          static_cast<long>(i), attr_mask, &dists);
    out[i] = {sv.values, trials[i].target ? 1 : 0};
  }
  return out;
}

FitOutcome fit_stage_two(const SystemInputs &in, const RouteId &route, similarity::Mode mode,
                         verifier::ModelKind kind, const std::vector<int> &attr_mask) {
  for (int m : attr_mask)
    if (m < 0 || m >= static_cast<int>(in.schema.attributes.size()))
      throw DataError("evaluation: attribute mask index out of range");
  if (in.train_trials.empty()) throw DataError("evaluation: train trials required");

  FitOutcome out;
  out.train_set = similarity_set(in, route, mode, false, attr_mask);
  const std::string hash = masked_hash(in.schema.hash(), attr_mask);
  const std::string cell = route.name() + "/" + similarity::mode_name(mode) + "/" +
                           verifier::kind_name(kind) + "/" + hash;
  const std::uint64_t cell_seed = mix_seed(in.seed, fnv1a64(cell));

  switch (kind) {
    case verifier::ModelKind::kLinReg:
      out.model = verifier::fit_linreg(out.train_set, hash);
      break;
    case verifier::ModelKind::kLogReg:
      out.model = verifier::fit_logreg(out.train_set, in.stage2.logreg_epochs,
                                       in.stage2.logreg_lr, cell_seed, hash);
      break;
    case verifier::ModelKind::kForest:
      out.model = verifier::fit_forest(out.train_set, in.stage2.forest_trees,
                                       in.stage2.forest_max_depth, in.stage2.forest_min_leaf,
                                       in.stage2.forest_feature_subsample, cell_seed, hash);
      break;
    case verifier::ModelKind::kNeuralNet:
      out.model = verifier::fit_nn(out.train_set, in.stage2.nn_hidden, in.stage2.nn_epochs,
                                   in.stage2.nn_lr, cell_seed, hash);
      break;
  }
  return out;
}

std::map<std::string, double> route_accuracy(const SystemInputs &in, const std::string &tag) {
  if (!in.test_manifest) throw DataError("evaluation: test manifest required");
  std::map<std::string, double> out;
  std::vector<long> hits(in.schema.attributes.size(), 0);
  long total = 0;
  for (const auto &spk : in.test_manifest->speakers) {
    for (const auto &clip : spk.clip_ids) {
      const auto &outputs = clip_outputs(in, tag, clip);
      for (std::size_t a = 0; a < in.schema.attributes.size(); ++a)
        if (outputs.classes[a] == spk.labels[a]) ++hits[a];
      ++total;
    }
  }
  for (std::size_t a = 0; a < in.schema.attributes.size(); ++a)
    out[in.schema.attributes[a].name] =
        static_cast<double>(hits[a]) / static_cast<double>(total);
  return out;
}

SystemResult evaluate_system(const SystemInputs &in, const RouteId &route,
                             similarity::Mode mode, verifier::ModelKind kind,
                             const std::vector<int> &attr_mask) {
  if (in.test_trials.empty()) throw DataError("evaluation: test trials required");
  FitOutcome fit = fit_stage_two(in, route, mode, kind, attr_mask);

  SystemResult result;
  result.model = fit.model;

  const auto test_set = similarity_set(in, route, mode, true, attr_mask);
  std::vector<double> scores(test_set.size());
  std::vector<int> targets(test_set.size());
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    scores[i] = verifier::score_values(fit.model, test_set[i].values);
    targets[i] = test_set[i].target;
    result.test_scores.push_back({in.test_trials[i], scores[i]});
  }
  result.eer = eer_from_scores(scores, targets);
  const std::uint64_t imp_seed = mix_seed(
      mix_seed(in.seed, fnv1a64(route.name() + "/" + similarity::mode_name(mode) + "/" +
                                verifier::kind_name(kind))),
      0x1a9);
  result.importance = verifier::importance(fit.model, test_set, imp_seed);

  if (route.kind == RouteId::kPredicted && in.test_manifest)
    result.per_attribute_accuracy = route_accuracy(in, route.tag);
  return result;
}

EerResult single_attribute_eer(const SystemInputs &in, const std::string &attribute,
                               similarity::Mode mode, const RouteId &route,
                               verifier::ModelKind kind) {
  const int idx = in.schema.index_of(attribute);
  if (idx < 0) throw DataError("single_attribute_eer: unknown attribute '" + attribute + "'");
  return evaluate_system(in, route, mode, kind, {idx}).eer;
}

// ---------------------------------------------------------------------------

namespace {

json eer_to_json(const EerResult &e) {
  return {{"eer", e.eer},
          {"threshold", e.threshold},
          {"n_pos", e.n_pos},
          {"n_neg", e.n_neg},
          {"degenerate_curve", e.degenerate_curve},
          {"boundary_threshold", e.boundary_threshold}};
}

EerResult eer_from_json(const json &j) {
  EerResult e;
  e.eer = j.at("eer").get<double>();
  e.threshold = j.at("threshold").get<double>();
  e.n_pos = j.at("n_pos").get<long>();
  e.n_neg = j.at("n_neg").get<long>();
  e.degenerate_curve = j.at("degenerate_curve").get<bool>();
  e.boundary_threshold = j.at("boundary_threshold").get<bool>();
  return e;
}

}  // namespace

std::string Report::to_json_string() const {
  json j;
  j["format_version"] = 1;
  j["toolkit_version"] = toolkit_version;
  j["config_fingerprint"] = config_fingerprint;
  j["schema_hash"] = schema_hash;
  j["attributes"] = attribute_names;
  j["trial_counts"] = {{"train_pos", train_pos},
                       {"train_neg", train_neg},
                       {"test_pos", test_pos},
                       {"test_neg", test_neg}};
  j["accuracy"] = accuracy;
  json cells_json = json::array();
  for (const auto &c : cells)
    cells_json.push_back({{"route", c.route},
                          {"mode", c.mode},
                          {"stage2", c.kind},
                          {"eer", eer_to_json(c.eer)},
                          {"importance", c.importance},
                          {"importance_method", c.importance_method}});
  j["cells"] = std::move(cells_json);
  json singles = json::array();
  for (const auto &s : single_attribute)
    singles.push_back({{"attribute", s.attribute},
                       {"route", s.route},
                       {"mode", s.mode},
                       {"stage2", s.kind},
                       {"eer", eer_to_json(s.eer)}});
  j["single_attribute"] = std::move(singles);
  return j.dump(2) + "\n";
}

Report Report::from_json_string(const std::string &text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("report: malformed JSON");
  Report r;
  r.toolkit_version = j.at("toolkit_version").get<std::string>();
  r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  r.schema_hash = j.at("schema_hash").get<std::string>();
  r.attribute_names = j.at("attributes").get<std::vector<std::string>>();
  r.train_pos = j.at("trial_counts").at("train_pos").get<long>();
  r.train_neg = j.at("trial_counts").at("train_neg").get<long>();
  r.test_pos = j.at("trial_counts").at("test_pos").get<long>();
  r.test_neg = j.at("trial_counts").at("test_neg").get<long>();
  r.accuracy =
      j.at("accuracy").get<std::map<std::string, std::map<std::string, double>>>();
  for (const auto &jc : j.at("cells")) {
    ReportCell c;
    c.route = jc.at("route").get<std::string>();
    c.mode = jc.at("mode").get<std::string>();
    c.kind = jc.at("stage2").get<std::string>();
    c.eer = eer_from_json(jc.at("eer"));
    c.importance = jc.at("importance").get<std::vector<double>>();
    c.importance_method = jc.at("importance_method").get<std::string>();
    r.cells.push_back(std::move(c));
  }
  for (const auto &js : j.at("single_attribute")) {
    SingleAttrCell s;
    s.attribute = js.at("attribute").get<std::string>();
    s.route = js.at("route").get<std::string>();
    s.mode = js.at("mode").get<std::string>();
    s.kind = js.at("stage2").get<std::string>();
    s.eer = eer_from_json(js.at("eer"));
    r.single_attribute.push_back(std::move(s));
  }
  return r;
}

std::string Report::to_csv(const std::vector<std::string> &predicted_routes) const {
  auto find_eer = [&](const std::string &route, const std::string &mode,
                      const std::string &kind) -> std::string {
    for (const auto &c : cells)
      if (c.route == route && c.mode == mode && c.kind == kind) {
        std::ostringstream ss;
        ss.precision(6);
        ss << c.eer.eer;
        return ss.str();
      }
    return "";
  };

  std::vector<std::string> kinds;
  for (const auto &c : cells)
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) kinds.push_back(c.kind);

  std::ostringstream out;
  out << "stage2,groundtruth";
  for (const auto &r : predicted_routes) out << ",softmax:" << r;
  for (const auto &r : predicted_routes) out << ",hard:" << r;
  out << ",random\n";
  for (const auto &kind : kinds) {
    out << kind << ',' << find_eer("groundtruth", "hard", kind);
    for (const auto &r : predicted_routes) out << ',' << find_eer(r, "softmax", kind);
    for (const auto &r : predicted_routes) out << ',' << find_eer(r, "hard", kind);
    out << ',' << find_eer("random", "hard", kind) << "\n";
  }
  return out.str();
}

}  // namespace attrsv::metrics
