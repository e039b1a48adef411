// src/verifier.cpp

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

#include "attrsv/verifier.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "attrsv/metrics.hpp"
#include "attrsv/rng.hpp"
#include "attrsv/serialize.hpp"

using nlohmann::json;

namespace attrsv::verifier {

std::string kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kLinReg: return "linreg";
    case ModelKind::kLogReg: return "logreg";
    case ModelKind::kForest: return "random-forest";
    case ModelKind::kNeuralNet: return "neural-net";
  }
  throw NumericError("unreachable model kind");
}

ModelKind kind_from_name(const std::string &name) {
  if (name == "linreg") return ModelKind::kLinReg;
  if (name == "logreg") return ModelKind::kLogReg;
  if (name == "random-forest" || name == "forest") return ModelKind::kForest;
  if (name == "neural-net" || name == "nn") return ModelKind::kNeuralNet;
  throw DataError("unknown stage-2 model kind '" + name + "'");
}

namespace {

double sigmoid(double z) {
  z = std::max(-700.0, std::min(700.0, z));
  return 1.0 / (1.0 + std::exp(-z));
}

void validate_targets(const std::vector<SimSample> &data, bool need_both_classes,
                      const char *who) {
  if (data.empty()) throw DataError(std::string(who) + ": empty dataset");
  bool pos = false, neg = false;
  const Eigen::Index dim = data.front().values.size();
  for (const auto &s : data) {
    if (s.target != 0 && s.target != 1)
      throw DataError(std::string(who) + ": targets must be 0 or 1");
    if (s.values.size() != dim)
      throw DataError(std::string(who) + ": inconsistent similarity-vector length");
    (s.target == 1 ? pos : neg) = true;
  }
  if (need_both_classes && !(pos && neg))
    throw DataError(std::string(who) + ": both classes must be present");
}

// Canonical row order (lexicographic by values, then target) so fits do not
// depend on the storage order of the training data.
std::vector<std::size_t> canonical_order(const std::vector<SimSample> &data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const Vector &va = data[a].values, &vb = data[b].values;
    for (Eigen::Index i = 0; i < va.size(); ++i) {
      if (va[i] < vb[i]) return true;
      if (va[i] > vb[i]) return false;
    }
    return data[a].target < data[b].target;
  });
  return idx;
}

}  // namespace

StageTwoModel fit_linreg(const std::vector<Vector> &inputs, const std::vector<double> &targets,
                         const std::string &schema_hash) {
  if (inputs.empty()) throw DataError("linreg: empty dataset");
  if (inputs.size() != targets.size())
    throw DataError("linreg: inputs/targets length mismatch");
  const Eigen::Index k = inputs.front().size();
  const auto n = static_cast<Eigen::Index>(inputs.size());
  if (n < k + 1)
    throw DataError("linreg: need at least " + std::to_string(k + 1) + " samples");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != k) throw DataError("linreg: inconsistent similarity-vector length");
    if (!std::isfinite(targets[i]) || targets[i] < 0.0 || targets[i] > 1.0)
      throw DataError("linreg: targets must lie in [0, 1]");
  }

  // canonical row order so the fit ignores storage order
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (Eigen::Index i = 0; i < k; ++i) {
      if (inputs[a][i] < inputs[b][i]) return true;
      if (inputs[a][i] > inputs[b][i]) return false;
    }
    return targets[a] < targets[b];
  });

  Matrix x(n, k + 1);
  Vector y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    x(r, 0) = 1.0;
    x.row(r).tail(k) = inputs[order[static_cast<std::size_t>(r)]].transpose();
    y[r] = targets[order[static_cast<std::size_t>(r)]];
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  if (qr.rank() < k + 1)
    throw NumericError("linreg: rank-deficient design matrix (rank " +
                       std::to_string(qr.rank()) + " of " + std::to_string(k + 1) + ")");

  Matrix a = x.transpose() * x + 1e-8 * Matrix::Identity(k + 1, k + 1);
  Vector b = x.transpose() * y;
  Vector w = a.ldlt().solve(b);
  if (!w.allFinite()) throw NumericError("linreg: non-finite solution");

  StageTwoModel model;
  model.kind = ModelKind::kLinReg;
  model.dim = static_cast<int>(k);
  model.schema_hash = schema_hash;
  model.payload = LinRegModel{std::move(w)};
  return model;
}

StageTwoModel fit_linreg(const std::vector<SimSample> &data, const std::string &schema_hash) {
  validate_targets(data, false, "linreg");
  std::vector<Vector> inputs;
  std::vector<double> targets;
  inputs.reserve(data.size());
  targets.reserve(data.size());
  for (const auto &s : data) {
    inputs.push_back(s.values);
    targets.push_back(static_cast<double>(s.target));
  }
  return fit_linreg(inputs, targets, schema_hash);
}

StageTwoModel fit_logreg(const std::vector<SimSample> &data, int epochs, double lr,
                         std::uint64_t seed, const std::string &schema_hash) {
  validate_targets(data, true, "logreg");
  if (epochs < 1) throw ConfigError("logreg: epochs must be positive");
  const Eigen::Index k = data.front().values.size();
  const auto n = static_cast<Eigen::Index>(data.size());

  Matrix x(n, k + 1);
  Vector y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    x(r, 0) = 1.0;
    x.row(r).tail(k) = data[static_cast<std::size_t>(r)].values.transpose();
    y[r] = data[static_cast<std::size_t>(r)].target;
  }

  Vector w = Vector::Zero(k + 1);
  for (int e = 0; e < epochs; ++e) {
    Vector z = x * w;
    Vector p(n);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = sigmoid(z[i]);
      // softplus(z) - y*z, stable in both tails
      loss += std::log1p(std::exp(-std::abs(z[i]))) + std::max(z[i], 0.0) - y[i] * z[i];
    }
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss))
      throw NumericError("logreg: loss diverged at epoch " + std::to_string(e));
    Vector grad = x.transpose() * (p - y) / static_cast<double>(n);
    w -= lr * grad;
  }
  if (!w.allFinite()) throw NumericError("logreg: non-finite weights after training");

  StageTwoModel model;
  model.kind = ModelKind::kLogReg;
  model.dim = static_cast<int>(k);
  model.schema_hash = schema_hash;
  model.seed = seed;
  model.payload = LogRegModel{std::move(w)};
  return model;
}

namespace {

struct TreeBuilder {
  const std::vector<SimSample> &data;
  int max_depth, min_leaf, n_features, subsample;
  Rng &rng;
  ForestTree tree;
  Vector &impurity;  // per-feature Gini decrease accumulator
  double n_root;

  double gini(long pos, long n) const {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
  }

  std::vector<int> sample_features() {
    std::vector<int> all(static_cast<std::size_t>(n_features));
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < subsample; ++i) {
      const int j = i + rng.uniform_int(n_features - i);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(subsample));
    std::sort(all.begin(), all.end());
    return all;
  }

  // rows: indices into `data` (bootstrap may repeat).  Returns node index.
  int build(std::vector<std::size_t> &rows, int depth) {
    const long n = static_cast<long>(rows.size());
    long pos = 0;
    for (std::size_t r : rows) pos += data[r].target;
    const double node_gini = gini(pos, n);

    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto make_leaf = [&]() {
      ForestNode &leaf = tree.nodes[static_cast<std::size_t>(node_index)];
      leaf.feature = -1;
      leaf.leaf_pos = static_cast<double>(pos) / static_cast<double>(n);
      leaf.leaf_neg = 1.0 - leaf.leaf_pos;
      return node_index;
    };

    if (depth >= max_depth || n < 2 * min_leaf || pos == 0 || pos == n) return make_leaf();

    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 0.0;
    const std::vector<int> features = sample_features();
    std::vector<std::pair<double, int>> vals(rows.size());
    for (int f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        vals[i] = {data[rows[i]].values[f], data[rows[i]].target};
      std::sort(vals.begin(), vals.end());
      long left_pos = 0;
      for (long i = 0; i + 1 < n; ++i) {
        left_pos += vals[static_cast<std::size_t>(i)].second;
        if (vals[static_cast<std::size_t>(i)].first ==
            vals[static_cast<std::size_t>(i + 1)].first)
          continue;
        const long nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double child =
            (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / static_cast<double>(n);
        const double gain = node_gini - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (vals[static_cast<std::size_t>(i)].first +
                                  vals[static_cast<std::size_t>(i + 1)].first);
        }
      }
    }
    if (best_feature < 0 || best_gain <= 0.0) return make_leaf();

    impurity[best_feature] += best_gain * static_cast<double>(n) / n_root;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows)
      (data[r].values[best_feature] <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int li = build(left, depth + 1);
    const int ri = build(right, depth + 1);
    ForestNode &node = tree.nodes[static_cast<std::size_t>(node_index)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = li;
    node.right = ri;
    return node_index;
  }
};

}  // namespace

StageTwoModel fit_forest(const std::vector<SimSample> &data, int n_trees, int max_depth,
                         int min_leaf, int feature_subsample, std::uint64_t seed,
                         const std::string &schema_hash) {
  validate_targets(data, true, "forest");
  if (n_trees < 1) throw ConfigError("forest: n_trees must be positive");
  if (max_depth < 0) throw ConfigError("forest: max_depth must be nonnegative");
  if (min_leaf < 1) throw ConfigError("forest: min_leaf must be positive");

  const int k = static_cast<int>(data.front().values.size());
  const int m = feature_subsample <= 0
                    ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))))
                    : std::min(feature_subsample, k);

  const std::vector<std::size_t> canonical = canonical_order(data);
  const std::size_t n = data.size();

  ForestModel forest;
  Vector importance = Vector::Zero(k);
  for (int t = 0; t < n_trees; ++t) {
    Rng rng(mix_seed(seed, 0xF0 + static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows;
    rows.reserve(n);
    if (n_trees == 1) {
      rows = canonical;
    } else {
      // Bootstrap draws over the canonical order, sorted so the bag is a
      // multiset independent of input order.
      std::vector<std::size_t> draws(n);
      for (std::size_t i = 0; i < n; ++i) draws[i] = rng.uniform_u64(n);
      std::sort(draws.begin(), draws.end());
      for (std::size_t d : draws) rows.push_back(canonical[d]);
    }
    Vector tree_importance = Vector::Zero(k);
    TreeBuilder builder{data,        max_depth,       min_leaf,
                        k,           m,               rng,
                        ForestTree{}, tree_importance, static_cast<double>(rows.size())};
    builder.build(rows, 0);
    importance += tree_importance;
    forest.trees.push_back(std::move(builder.tree));
  }
  importance /= static_cast<double>(n_trees);
  forest.impurity_importance = importance;

  StageTwoModel model;
  model.kind = ModelKind::kForest;
  model.dim = k;
  model.schema_hash = schema_hash;
  model.seed = seed;
  model.payload = std::move(forest);
  return model;
}

StageTwoModel fit_nn(const std::vector<SimSample> &data, int hidden_units, int epochs,
                     double lr, std::uint64_t seed, const std::string &schema_hash) {
  validate_targets(data, false, "nn");
  if (hidden_units < 1) throw ConfigError("nn: hidden_units must be positive");
  if (epochs < 0) throw ConfigError("nn: epochs must be nonnegative");
  const Eigen::Index k = data.front().values.size();
  const auto n = static_cast<Eigen::Index>(data.size());

  Matrix x(k, n);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.col(i) = data[static_cast<std::size_t>(i)].values;
    y[i] = data[static_cast<std::size_t>(i)].target;
  }

  Rng rng(mix_seed(seed, 0x22));
  NeuralNetModel nn;
  const double a1 = std::sqrt(6.0 / static_cast<double>(k + hidden_units));
  nn.w1.resize(hidden_units, k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index r = 0; r < hidden_units; ++r) nn.w1(r, c) = rng.uniform(-a1, a1);
  nn.b1 = Vector::Zero(hidden_units);
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_units + 1));
  nn.w2.resize(hidden_units);
  for (Eigen::Index r = 0; r < hidden_units; ++r) nn.w2[r] = rng.uniform(-a2, a2);
  nn.b2 = 0.0;

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int e = 0; e < epochs; ++e) {
    Matrix z1 = nn.w1 * x;
    z1.colwise() += nn.b1;
    Matrix a1m = z1.unaryExpr([](double v) { return sigmoid(v); });
    Vector z2 = a1m.transpose() * nn.w2;
    z2.array() += nn.b2;

    double loss = 0.0;
    Vector p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = sigmoid(z2[i]);
      loss += std::log1p(std::exp(-std::abs(z2[i]))) + std::max(z2[i], 0.0) - y[i] * z2[i];
    }
    loss *= inv_n;
    if (!std::isfinite(loss))
      throw NumericError("nn: loss diverged at epoch " + std::to_string(e));

    Vector dz2 = (p - y) * inv_n;
    Vector dw2 = a1m * dz2;
    const double db2 = dz2.sum();
    Matrix da1 = nn.w2 * dz2.transpose();
    Matrix dz1 = da1.cwiseProduct(a1m.cwiseProduct(Matrix::Ones(a1m.rows(), a1m.cols()) - a1m));
    Matrix dw1 = dz1 * x.transpose();
    Vector db1 = dz1.rowwise().sum();

    nn.w1 -= lr * dw1;
    nn.b1 -= lr * db1;
    nn.w2 -= lr * dw2;
    nn.b2 -= lr * db2;
  }

  StageTwoModel model;
  model.kind = ModelKind::kNeuralNet;
  model.dim = static_cast<int>(k);
  model.schema_hash = schema_hash;
  model.seed = seed;
  model.payload = std::move(nn);
  return model;
}

double score_values(const StageTwoModel &model, const Vector &values) {
  if (values.size() != model.dim)
    throw DataError("score: similarity vector has " + std::to_string(values.size()) +
                    " components, model expects " + std::to_string(model.dim));
  switch (model.kind) {
    case ModelKind::kLinReg: {
      const auto &m = std::get<LinRegModel>(model.payload);
      const double raw = m.weights[0] + m.weights.tail(model.dim).dot(values);
      return std::max(0.0, std::min(1.0, raw));
    }
    case ModelKind::kLogReg: {
      const auto &m = std::get<LogRegModel>(model.payload);
      return sigmoid(m.weights[0] + m.weights.tail(model.dim).dot(values));
    }
    case ModelKind::kForest: {
      const auto &m = std::get<ForestModel>(model.payload);
      double sum = 0.0;
      for (const auto &tree : m.trees) {
        int node = 0;
        while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
          const ForestNode &nd = tree.nodes[static_cast<std::size_t>(node)];
          node = values[nd.feature] <= nd.threshold ? nd.left : nd.right;
        }
        sum += tree.nodes[static_cast<std::size_t>(node)].leaf_pos;
      }
      return sum / static_cast<double>(m.trees.size());
    }
    case ModelKind::kNeuralNet: {
      const auto &m = std::get<NeuralNetModel>(model.payload);
      Vector a1 = (m.w1 * values + m.b1).unaryExpr([](double v) { return sigmoid(v); });
      return sigmoid(m.w2.dot(a1) + m.b2);
    }
  }
  throw NumericError("unreachable model kind");
}

double score(const StageTwoModel &model, const similarity::SimilarityVector &sv) {
  if (!model.schema_hash.empty() && !sv.schema_hash.empty() &&
      model.schema_hash != sv.schema_hash)
    throw DataError("score: schema hash mismatch (model " + model.schema_hash +
                    ", vector " + sv.schema_hash + ")");
  return score_values(model, sv.values);
}

namespace {

std::vector<double> normalize_importance(Vector w) {
  w = w.cwiseMax(0.0);
  const double sum = w.sum();
  if (sum < 1e-12)
    return std::vector<double>(static_cast<std::size_t>(w.size()),
                               1.0 / static_cast<double>(w.size()));
  w /= sum;
  return std::vector<double>(w.data(), w.data() + w.size());
}

}  // namespace

ImportanceReport importance(const StageTwoModel &model,
                            const std::vector<SimSample> &validation, std::uint64_t seed) {
  ImportanceReport report;
  switch (model.kind) {
    case ModelKind::kLinReg:
    case ModelKind::kLogReg: {
      const Vector &w = model.kind == ModelKind::kLinReg
                            ? std::get<LinRegModel>(model.payload).weights
                            : std::get<LogRegModel>(model.payload).weights;
      report.method = "abs-coefficient";
      report.weights = normalize_importance(w.tail(model.dim).cwiseAbs());
      return report;
    }
    case ModelKind::kForest: {
      report.method = "gini-impurity-decrease";
      report.weights =
          normalize_importance(std::get<ForestModel>(model.payload).impurity_importance);
      return report;
    }
    case ModelKind::kNeuralNet: {
      if (validation.empty())
        throw DataError("importance: permutation importance needs validation data");
      report.method = "permutation-eer";
      const auto n = validation.size();
      std::vector<double> base_scores(n);
      std::vector<int> targets(n);
      for (std::size_t i = 0; i < n; ++i) {
        base_scores[i] = score_values(model, validation[i].values);
        targets[i] = validation[i].target;
      }
      const double base_eer = metrics::eer_from_scores(base_scores, targets).eer;

      constexpr int kRepeats = 10;
      Vector degradation = Vector::Zero(model.dim);
      std::vector<std::size_t> perm(n);
      std::vector<double> scores(n);
      for (int f = 0; f < model.dim; ++f) {
        double acc = 0.0;
        for (int r = 0; r < kRepeats; ++r) {
          Rng rng(mix_seed(seed, 0x9e00 + static_cast<std::uint64_t>(f) * 64 +
                                     static_cast<std::uint64_t>(r)));
          std::iota(perm.begin(), perm.end(), 0);
          rng.shuffle(perm);
          for (std::size_t i = 0; i < n; ++i) {
            Vector v = validation[i].values;
            v[f] = validation[perm[i]].values[f];
            scores[i] = score_values(model, v);
          }
          acc += std::max(0.0, metrics::eer_from_scores(scores, targets).eer - base_eer);
        }
        degradation[f] = acc / kRepeats;
      }
      report.weights = normalize_importance(degradation);
      return report;
    }
  }
  throw NumericError("unreachable model kind");
}

void save_model(const std::string &path, const StageTwoModel &model) {
  json j;
  j["format_version"] = 1;
  j["kind"] = kind_name(model.kind);
  j["dim"] = model.dim;
  j["schema_hash"] = model.schema_hash;
  j["seed"] = model.seed;
  switch (model.kind) {
    case ModelKind::kLinReg:
      j["weights"] = to_std(std::get<LinRegModel>(model.payload).weights);
      break;
    case ModelKind::kLogReg:
      j["weights"] = to_std(std::get<LogRegModel>(model.payload).weights);
      break;
    case ModelKind::kForest: {
      const auto &forest = std::get<ForestModel>(model.payload);
      json trees = json::array();
      for (const auto &tree : forest.trees) {
        json nodes = json::array();
        for (const auto &nd : tree.nodes)
          nodes.push_back({{"feature", nd.feature},
                           {"threshold", nd.threshold},
                           {"left", nd.left},
                           {"right", nd.right},
                           {"leaf_probs", {nd.leaf_neg, nd.leaf_pos}}});
        trees.push_back(std::move(nodes));
      }
      j["trees"] = std::move(trees);
      j["importance"] = to_std(forest.impurity_importance);
      break;
    }
    case ModelKind::kNeuralNet: {
      const auto &nn = std::get<NeuralNetModel>(model.payload);
      j["hidden"] = nn.w1.rows();
      std::vector<double> blob;
      blob.insert(blob.end(), nn.w1.data(), nn.w1.data() + nn.w1.size());
      blob.insert(blob.end(), nn.b1.data(), nn.b1.data() + nn.b1.size());
      blob.insert(blob.end(), nn.w2.data(), nn.w2.data() + nn.w2.size());
      blob.push_back(nn.b2);
      j["weights_b64"] = base64_encode(pack_f64_le(blob));
      break;
    }
  }
  write_text_file(path, j.dump(2) + "\n");
}

StageTwoModel load_model(const std::string &path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw DataError("stage-2 model: malformed JSON in " + path);
  if (j.value("format_version", 0) != 1)
    throw DataError("stage-2 model: unsupported version in " + path);

  StageTwoModel model;
  model.kind = kind_from_name(j.at("kind").get<std::string>());
  model.dim = j.at("dim").get<int>();
  model.schema_hash = j.at("schema_hash").get<std::string>();
  model.seed = j.at("seed").get<std::uint64_t>();

  switch (model.kind) {
    case ModelKind::kLinReg:
      model.payload = LinRegModel{to_eigen(j.at("weights").get<std::vector<double>>())};
      break;
    case ModelKind::kLogReg:
      model.payload = LogRegModel{to_eigen(j.at("weights").get<std::vector<double>>())};
      break;
    case ModelKind::kForest: {
      ForestModel forest;
      for (const auto &jt : j.at("trees")) {
        ForestTree tree;
        for (const auto &jn : jt) {
          ForestNode nd;
          nd.feature = jn.at("feature").get<int>();
          nd.threshold = jn.at("threshold").get<double>();
          nd.left = jn.at("left").get<int>();
          nd.right = jn.at("right").get<int>();
          nd.leaf_neg = jn.at("leaf_probs").at(0).get<double>();
          nd.leaf_pos = jn.at("leaf_probs").at(1).get<double>();
          tree.nodes.push_back(nd);
        }
        forest.trees.push_back(std::move(tree));
      }
      forest.impurity_importance = to_eigen(j.at("importance").get<std::vector<double>>());
      model.payload = std::move(forest);
      break;
    }
    case ModelKind::kNeuralNet: {
      const auto hidden = j.at("hidden").get<Eigen::Index>();
      std::vector<double> blob = unpack_f64_le(base64_decode(j.at("weights_b64")));
      const auto expected =
          static_cast<std::size_t>(hidden * model.dim + hidden + hidden + 1);
      if (blob.size() != expected)
        throw DataError("stage-2 model: NN weight blob size mismatch in " + path);
      NeuralNetModel nn;
      nn.w1 = Eigen::Map<Matrix>(blob.data(), hidden, model.dim);
      nn.b1 = Eigen::Map<Vector>(blob.data() + hidden * model.dim, hidden);
      nn.w2 = Eigen::Map<Vector>(blob.data() + hidden * model.dim + hidden, hidden);
      nn.b2 = blob.back();
      model.payload = std::move(nn);
      break;
    }
  }
  return model;
}

void save_scores(const std::string &path,
                 const std::vector<std::pair<TrialScore, int>> &scored) {
  std::ostringstream out;
  for (const auto &[ts, target] : scored) {
    json j;
    j["trial"] = {ts.trial.clip_a, ts.trial.clip_b};
    j["target"] = target;
    j["score"] = ts.score;
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace attrsv::verifier
