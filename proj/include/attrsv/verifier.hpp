// attrsv/verifier.hpp

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

#ifndef ATTRSV_VERIFIER_HPP
#define ATTRSV_VERIFIER_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "attrsv/common.hpp"
#include "attrsv/corpus.hpp"
#include "attrsv/similarity.hpp"

namespace attrsv::verifier {

enum class ModelKind { kLinReg, kLogReg, kForest, kNeuralNet };

std::string kind_name(ModelKind k);
ModelKind kind_from_name(const std::string &name);

/// One stage-2 training point: a similarity vector plus the trial target.
struct SimSample {
  Vector values;
  int target = 0;  // 1 = same speaker
};

struct LinRegModel {
  Vector weights;  // [intercept, w_1..w_k]
};

struct LogRegModel {
  Vector weights;  // [intercept, w_1..w_k]
};

struct ForestNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  double leaf_neg = 0.0, leaf_pos = 0.0;  // leaf class probabilities
};

struct ForestTree {
  std::vector<ForestNode> nodes;  // node 0 is the root
};

struct ForestModel {
  std::vector<ForestTree> trees;
  Vector impurity_importance;  // mean Gini decrease per feature, normalized
};

struct NeuralNetModel {
  Matrix w1;  // hidden x k
  Vector b1;
  Vector w2;  // hidden
  double b2 = 0.0;
};

struct StageTwoModel {
  ModelKind kind = ModelKind::kLinReg;
  int dim = 0;
  std::string schema_hash;
  std::uint64_t seed = 0;
  std::variant<LinRegModel, LogRegModel, ForestModel, NeuralNetModel> payload;
};

struct TrialScore {
  corpus::TrialPair trial;
  double score = 0.0;
};

struct ImportanceReport {
  std::vector<double> weights;  // schema order, nonnegative, sums to 1
  std::string method;           // abs-coefficient | gini-impurity-decrease | permutation-eer
};

/// OLS on [1, s_1..s_k] via normal equations with 1e-8 ridge jitter; a
/// rank-deficient design matrix raises NumericError.  Scores clamp to [0,1].
StageTwoModel fit_linreg(const std::vector<SimSample> &data,
                         const std::string &schema_hash = "");
/// Regression form with real targets in [0, 1].
StageTwoModel fit_linreg(const std::vector<Vector> &inputs, const std::vector<double> &targets,
                         const std::string &schema_hash = "");

/// Full-batch gradient descent on cross-entropy from zero weights.
StageTwoModel fit_logreg(const std::vector<SimSample> &data, int epochs, double lr,
                         std::uint64_t seed, const std::string &schema_hash = "");

/// Bagged CART with Gini splits; per-node feature subsampling of
/// ceil(sqrt(k)) features when feature_subsample <= 0.  A single-tree forest
/// trains on the full data (no bootstrap), so degenerate stumps reproduce the
/// training positive rate exactly.  Score = mean leaf positive probability.
StageTwoModel fit_forest(const std::vector<SimSample> &data, int n_trees, int max_depth,
                         int min_leaf, int feature_subsample, std::uint64_t seed,
                         const std::string &schema_hash = "");

/// k -> hidden (sigmoid) -> 1 (sigmoid), full-batch gradient descent on
/// cross-entropy.
StageTwoModel fit_nn(const std::vector<SimSample> &data, int hidden_units, int epochs,
                     double lr, std::uint64_t seed, const std::string &schema_hash = "");

/// Higher score = more likely same speaker.  Rejects schema-hash mismatches.
double score(const StageTwoModel &model, const similarity::SimilarityVector &sv);
double score_values(const StageTwoModel &model, const Vector &values);

/// Normalized per-attribute importances: |coefficient| for the linear models,
/// mean impurity decrease for the forest, permutation importance (seeded
/// shuffles, 10 repeats, EER degradation) for the neural net.
ImportanceReport importance(const StageTwoModel &model,
                            const std::vector<SimSample> &validation,
                            std::uint64_t seed = 0);

// Versioned JSON envelope per kind: weight vectors for linear/logistic,
// explicit node lists for the forest, shapes plus base64 weights for the NN.
void save_model(const std::string &path, const StageTwoModel &model);
StageTwoModel load_model(const std::string &path);

// Score dump: JSON-lines {"trial":[a,b],"target":...,"score":...}.
void save_scores(const std::string &path,
                 const std::vector<std::pair<TrialScore, int>> &scored);

}  // namespace attrsv::verifier

#endif  // ATTRSV_VERIFIER_HPP
