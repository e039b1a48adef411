// tests/test_verifier.cpp

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

#include <doctest.h>

#include <cmath>

#include "attrsv/rng.hpp"
#include "attrsv/serialize.hpp"
#include "test_util.hpp"

using namespace attrsv;
using attrsv::testing::TempDir;

namespace {

Vector vec4(double a, double b, double c, double d) {
  Vector v(4);
  v << a, b, c, d;
  return v;
}

std::vector<verifier::SimSample> random_sane_data(int n, std::uint64_t seed) {
  // positives cluster near all-ones, negatives near random agreement
  Rng rng(seed);
  std::vector<verifier::SimSample> data;
  for (int i = 0; i < n; ++i) {
    const int target = i % 2;
    Vector v(4);
    for (int d = 0; d < 4; ++d) {
      const double base = target == 1 ? 0.9 : 0.3;
      v[d] = std::clamp(base + 0.2 * (rng.uniform() - 0.5), 0.0, 1.0);
    }
    data.push_back({v, target});
  }
  return data;
}

// AUC by concordant-pair counting.
double auc(const verifier::StageTwoModel &model, const std::vector<verifier::SimSample> &data) {
  std::vector<double> pos, neg;
  for (const auto &s : data)
    (s.target == 1 ? pos : neg).push_back(verifier::score_values(model, s.values));
  double wins = 0.0;
  for (double p : pos)
    for (double q : neg) wins += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
  return wins / (pos.size() * neg.size());
}

// Exhaustive Gini sweep over all features and midpoint thresholds.
struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

BestSplit gini_oracle(const std::vector<verifier::SimSample> &data, int min_leaf) {
  const int k = static_cast<int>(data.front().values.size());
  const long n = static_cast<long>(data.size());
  long pos = 0;
  for (const auto &s : data) pos += s.target;
  auto gini = [](long p, long m) {
    if (m == 0) return 0.0;
    const double f = static_cast<double>(p) / m;
    return 1.0 - f * f - (1.0 - f) * (1.0 - f);
  };
  const double parent = gini(pos, n);

  BestSplit best;
  for (int f = 0; f < k; ++f) {
    std::vector<std::pair<double, int>> vals;
    for (const auto &s : data) vals.push_back({s.values[f], s.target});
    std::sort(vals.begin(), vals.end());
    long lp = 0;
    for (long i = 0; i + 1 < n; ++i) {
      lp += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;
      const long nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double child = (nl * gini(lp, nl) + nr * gini(pos - lp, nr)) / n;
      const double gain = parent - child;
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = f;
        best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("linreg: exact recovery of a single informative feature") {
  Rng rng(1);
  std::vector<verifier::SimSample> data;
  for (int i = 0; i < 60; ++i) {
    Vector v(4);
    for (int d = 0; d < 4; ++d) v[d] = rng.uniform();
    data.push_back({v, v[0] > 0.5 ? 1 : 0});
  }
  // targets exactly equal to s_gen
  std::vector<Vector> xs;
  std::vector<double> ys;
  for (auto &s : data) {
    xs.push_back(s.values);
    ys.push_back(s.values[0]);
  }
  const auto model = verifier::fit_linreg(xs, ys, "");
  const Vector &w = std::get<verifier::LinRegModel>(model.payload).weights;
  CHECK(w[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-6));
  for (int d = 2; d <= 4; ++d) CHECK(w[d] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("linreg: constant targets give a constant fit") {
  Rng rng(2);
  std::vector<Vector> xs;
  std::vector<double> ys;
  for (int i = 0; i < 30; ++i) {
    Vector v(4);
    for (int d = 0; d < 4; ++d) v[d] = rng.uniform();
    xs.push_back(v);
    ys.push_back(0.5);
  }
  const auto model = verifier::fit_linreg(xs, ys, "");
  const Vector &w = std::get<verifier::LinRegModel>(model.payload).weights;
  CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-6));
  for (int d = 1; d <= 4; ++d) CHECK(w[d] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("linreg: 1-D fit matches the hand-solved normal equations") {
  // 6-point dataset solved by Cramer's rule on (X'X + 1e-8 I) w = X'y
  const std::vector<double> x = {0.0, 0.1, 0.35, 0.6, 0.8, 1.0};
  const std::vector<double> y = {0.0, 0.0, 0.0, 1.0, 1.0, 1.0};
  std::vector<Vector> xs;
  for (double v : x) {
    Vector one(1);
    one << v;
    xs.push_back(one);
  }
  const auto model = verifier::fit_linreg(xs, y, "");
  const Vector &w = std::get<verifier::LinRegModel>(model.payload).weights;

  double sx = 0, sxx = 0, sy = 0, sxy = 0;
  const double n = 6.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sxx += x[i] * x[i];
    sy += y[i];
    sxy += x[i] * y[i];
  }
  const double a11 = n + 1e-8, a12 = sx, a22 = sxx + 1e-8;
  const double det = a11 * a22 - a12 * a12;
  const double w0 = (sy * a22 - a12 * sxy) / det;
  const double w1 = (a11 * sxy - sx * sy) / det;
  CHECK(w[0] == doctest::Approx(w0).epsilon(1e-9));
  CHECK(w[1] == doctest::Approx(w1).epsilon(1e-9));
}

TEST_CASE("linreg: rank deficiency is reported") {
  Rng rng(3);
  std::vector<verifier::SimSample> data;
  for (int i = 0; i < 30; ++i) {
    Vector v(4);
    v[0] = rng.uniform();
    v[1] = v[0];  // duplicated column
    v[2] = rng.uniform();
    v[3] = rng.uniform();
    data.push_back({v, i % 2});
  }
  CHECK_THROWS_WITH_AS(verifier::fit_linreg(data), doctest::Contains("rank-deficient"),
                       NumericError);
}

TEST_CASE("linreg: scores clamp to [0,1] and recover spec arithmetic") {
  verifier::StageTwoModel model;
  model.kind = verifier::ModelKind::kLinReg;
  model.dim = 4;
  Vector w(5);
  w << 0.0, 1.0, 0.0, 0.0, 0.0;
  model.payload = verifier::LinRegModel{w};
  CHECK(verifier::score_values(model, vec4(1, 0, 0, 0)) == 1.0);
  CHECK(verifier::score_values(model, vec4(0.3, 0, 0, 0)) == doctest::Approx(0.3));
  Vector big(5);
  big << 2.0, 1.0, 0.0, 0.0, 0.0;
  model.payload = verifier::LinRegModel{big};
  CHECK(verifier::score_values(model, vec4(1, 1, 1, 1)) == 1.0);  // clamped
}

TEST_CASE("logreg: separable 1-D data reaches AUC 1 and monotone scores") {
  std::vector<verifier::SimSample> data;
  for (int i = 0; i < 40; ++i) {
    Vector v(1);
    v << (i < 20 ? 0.1 + 0.01 * i : 0.7 + 0.01 * (i - 20));
    data.push_back({v, i < 20 ? 0 : 1});
  }
  const auto model = verifier::fit_logreg(data, 500, 0.5, 0);
  CHECK(auc(model, data) == 1.0);
  double prev = -1.0;
  for (double x = 0.0; x <= 1.0; x += 0.05) {
    Vector v(1);
    v << x;
    const double s = verifier::score_values(model, v);
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("logreg: symmetric data pins score 0.5 at the symmetry point") {
  // overlapping mirrored pairs keep the optimum finite; the converged
  // solution inherits the data symmetry around x = 0.5
  std::vector<verifier::SimSample> data;
  for (double d : {-0.05, 0.05, 0.15, 0.25, 0.35}) {
    Vector hi(1), lo(1);
    hi << 0.5 + d;
    lo << 0.5 - d;
    data.push_back({hi, 1});
    data.push_back({lo, 0});
  }
  const auto model = verifier::fit_logreg(data, 30000, 2.0, 0);
  Vector mid(1);
  mid << 0.5;
  CHECK(verifier::score_values(model, mid) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("logreg: implied first-step gradient matches finite differences") {
  // one epoch from zero weights moves w by exactly -lr * grad; compare that
  // against central differences of an independently coded loss
  auto data = random_sane_data(50, 9);
  const double lr = 0.25;
  const auto stepped = verifier::fit_logreg(data, 1, lr, 0);
  const Vector w1 = std::get<verifier::LogRegModel>(stepped.payload).weights;
  const Vector implied_grad = -w1 / lr;

  auto loss_at = [&](const Vector &w) {
    double acc = 0.0;
    for (const auto &s : data) {
      double z = w[0];
      for (int d = 0; d < 4; ++d) z += w[d + 1] * s.values[d];
      acc += std::log(1.0 + std::exp(-std::abs(z))) + std::max(z, 0.0) - s.target * z;
    }
    return acc / static_cast<double>(data.size());
  };

  const double h = 1e-6;
  int checked = 0;
  for (int i = 0; i < 5; ++i) {
    Vector up = Vector::Zero(5), down = Vector::Zero(5);
    up[i] += h;
    down[i] -= h;
    const double fd = (loss_at(up) - loss_at(down)) / (2 * h);
    if (std::abs(fd) + std::abs(implied_grad[i]) < 1e-7) continue;  // FD noise floor
    CHECK(std::abs(fd - implied_grad[i]) / (std::abs(fd) + std::abs(implied_grad[i])) < 1e-5);
    ++checked;
  }
  CHECK(checked >= 3);
}

TEST_CASE("logreg: both classes required, zero weights give 0.5") {
  std::vector<verifier::SimSample> one_class = {{vec4(1, 1, 1, 1), 1},
                                                {vec4(0, 1, 0, 1), 1}};
  CHECK_THROWS_AS(verifier::fit_logreg(one_class, 10, 0.5, 0), DataError);

  verifier::StageTwoModel model;
  model.kind = verifier::ModelKind::kLogReg;
  model.dim = 4;
  model.payload = verifier::LogRegModel{Vector::Zero(5)};
  for (int i = 0; i < 5; ++i) {
    Rng rng(i);
    Vector v(4);
    for (int d = 0; d < 4; ++d) v[d] = rng.uniform();
    CHECK(verifier::score_values(model, v) == 0.5);
  }
}

TEST_CASE("forest: axis-aligned rule on s_pro") {
  Rng rng(4);
  std::vector<verifier::SimSample> data;
  for (int i = 0; i < 1000; ++i) {
    Vector v(4);
    for (int d = 0; d < 4; ++d) v[d] = rng.uniform();
    data.push_back({v, v[3] > 0.5 ? 1 : 0});
  }
  const auto model = verifier::fit_forest(data, 1, 1, 5, 4, 0);
  long hits = 0;
  for (const auto &s : data)
    hits += (verifier::score_values(model, s.values) >= 0.5 ? 1 : 0) == s.target;
  CHECK(static_cast<double>(hits) / data.size() >= 0.99);

  // profession dominates the impurity importance
  const auto imp = verifier::importance(model, data, 0);
  CHECK(imp.method == "gini-impurity-decrease");
  CHECK(imp.weights[3] > 0.9);
}

TEST_CASE("forest: depth-0 stump scores the training positive rate") {
  Rng rng(5);
  std::vector<verifier::SimSample> data;
  for (int i = 0; i < 100; ++i) {
    Vector v(4);
    for (int d = 0; d < 4; ++d) v[d] = rng.uniform();
    data.push_back({v, i < 37 ? 1 : 0});
  }
  const auto model = verifier::fit_forest(data, 1, 0, 5, 0, 0);
  CHECK(verifier::score_values(model, vec4(0.1, 0.2, 0.3, 0.4)) == doctest::Approx(0.37));
}

TEST_CASE("forest: first split matches the exhaustive Gini oracle") {
  Rng rng(6);
  std::vector<verifier::SimSample> data;
  for (int i = 0; i < 30; ++i) {
    Vector v(3);
    for (int d = 0; d < 3; ++d) v[d] = std::round(rng.uniform() * 10.0) / 10.0;
    const int target = v[1] > 0.45 ? (rng.uniform() < 0.9 ? 1 : 0) : (rng.uniform() < 0.2 ? 1 : 0);
    data.push_back({v, target});
  }
  const int min_leaf = 3;
  const auto model = verifier::fit_forest(data, 1, 4, min_leaf, 3, 0);
  const auto &root = std::get<verifier::ForestModel>(model.payload).trees[0].nodes[0];
  const BestSplit oracle = gini_oracle(data, min_leaf);
  REQUIRE(oracle.feature >= 0);
  CHECK(root.feature == oracle.feature);
  CHECK(root.threshold == oracle.threshold);

  // reconstruct the implementation's root gain from its children
  // and compare against the oracle gain
  const auto &tree = std::get<verifier::ForestModel>(model.payload).trees[0];
  auto count = [&](int node, long &n, long &pos) {
    n = 0;
    pos = 0;
    for (const auto &s : data) {
      int cur = 0;
      // walk one step from the root only
      const auto &r = tree.nodes[0];
      cur = s.values[r.feature] <= r.threshold ? r.left : r.right;
      if (cur == node) {
        ++n;
        pos += s.target;
      }
    }
  };
  long nl, pl, nr, pr;
  count(tree.nodes[0].left, nl, pl);
  count(tree.nodes[0].right, nr, pr);
  auto gini = [](long p, long m) {
    const double f = static_cast<double>(p) / m;
    return 1.0 - f * f - (1.0 - f) * (1.0 - f);
  };
  long pos = 0;
  for (const auto &s : data) pos += s.target;
  const double parent = gini(pos, 30);
  const double impl_gain = parent - (nl * gini(pl, nl) + nr * gini(pr, nr)) / 30.0;
  CHECK(std::abs(impl_gain - oracle.gain) < 1e-12);
}

TEST_CASE("forest: determinism and bounds") {
  auto data = random_sane_data(200, 11);
  const auto a = verifier::fit_forest(data, 20, 6, 5, 0, 42);
  const auto b = verifier::fit_forest(data, 20, 6, 5, 0, 42);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    Vector v(4);
    for (int d = 0; d < 4; ++d) v[d] = rng.uniform();
    const double sa = verifier::score_values(a, v);
    CHECK(sa == verifier::score_values(b, v));
    CHECK(sa >= 0.0);
    CHECK(sa <= 1.0);
  }
}

TEST_CASE("nn: XOR over (s_gen, s_nat) is learnable with 8 hidden units") {
  std::vector<verifier::SimSample> data;
  for (int rep = 0; rep < 10; ++rep)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Vector v(2);
        v << a, b;
        data.push_back({v, a ^ b});
      }
  const auto model = verifier::fit_nn(data, 8, 4000, 2.0, 3);
  long hits = 0;
  for (const auto &s : data)
    hits += (verifier::score_values(model, s.values) >= 0.5 ? 1 : 0) == s.target;
  CHECK(static_cast<double>(hits) / data.size() == 1.0);
}

TEST_CASE("nn: zero-epoch training reproduces initial scores bit-identically") {
  auto data = random_sane_data(40, 13);
  const auto a = verifier::fit_nn(data, 8, 0, 0.1, 21);
  const auto b = verifier::fit_nn(data, 8, 0, 0.1, 21);
  for (const auto &s : data)
    CHECK(verifier::score_values(a, s.values) == verifier::score_values(b, s.values));
  const auto c = verifier::fit_nn(data, 8, 0, 0.1, 22);
  bool any_diff = false;
  for (const auto &s : data)
    any_diff |= verifier::score_values(a, s.values) != verifier::score_values(c, s.values);
  CHECK(any_diff);
}

TEST_CASE("nn: implied first-step gradient matches finite differences") {
  auto data = random_sane_data(30, 17);
  const double lr = 0.05;
  const int hidden = 4;
  const std::uint64_t seed = 5;
  const auto init = verifier::fit_nn(data, hidden, 0, lr, seed);
  const auto stepped = verifier::fit_nn(data, hidden, 1, lr, seed);
  const auto &n0 = std::get<verifier::NeuralNetModel>(init.payload);
  const auto &n1 = std::get<verifier::NeuralNetModel>(stepped.payload);

  // independent forward pass
  auto loss_at = [&](const verifier::NeuralNetModel &nn) {
    double acc = 0.0;
    for (const auto &s : data) {
      Vector a1 = nn.w1 * s.values + nn.b1;
      for (Eigen::Index i = 0; i < a1.size(); ++i) a1[i] = 1.0 / (1.0 + std::exp(-a1[i]));
      const double z = nn.w2.dot(a1) + nn.b2;
      acc += std::log(1.0 + std::exp(-std::abs(z))) + std::max(z, 0.0) - s.target * z;
    }
    return acc / static_cast<double>(data.size());
  };

  const double h = 1e-6;
  Rng rng(99);
  int checked = 0;
  for (int probe = 0; probe < 20; ++probe) {
    verifier::NeuralNetModel up = n0, down = n0;
    double implied;
    const int which = rng.uniform_int(3);
    if (which == 0) {
      const auto r = static_cast<Eigen::Index>(rng.uniform_u64(n0.w1.rows()));
      const auto c = static_cast<Eigen::Index>(rng.uniform_u64(n0.w1.cols()));
      up.w1(r, c) += h;
      down.w1(r, c) -= h;
      implied = (n0.w1(r, c) - n1.w1(r, c)) / lr;
    } else if (which == 1) {
      const auto r = static_cast<Eigen::Index>(rng.uniform_u64(n0.b1.size()));
      up.b1[r] += h;
      down.b1[r] -= h;
      implied = (n0.b1[r] - n1.b1[r]) / lr;
    } else {
      const auto r = static_cast<Eigen::Index>(rng.uniform_u64(n0.w2.size()));
      up.w2[r] += h;
      down.w2[r] -= h;
      implied = (n0.w2[r] - n1.w2[r]) / lr;
    }
    const double fd = (loss_at(up) - loss_at(down)) / (2 * h);
    if (std::abs(fd) + std::abs(implied) < 1e-8) continue;
    CHECK(std::abs(fd - implied) / (std::abs(fd) + std::abs(implied)) < 1e-4);
    ++checked;
  }
  CHECK(checked > 5);
}

TEST_CASE("scores: strict bounds per model family") {
  auto data = random_sane_data(100, 19);
  const auto logreg = verifier::fit_logreg(data, 200, 0.5, 1);
  const auto nn = verifier::fit_nn(data, 8, 200, 0.2, 1);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    Vector v(4);
    for (int d = 0; d < 4; ++d) v[d] = rng.uniform();
    const double sl = verifier::score_values(logreg, v);
    const double sn = verifier::score_values(nn, v);
    CHECK(sl > 0.0);
    CHECK(sl < 1.0);
    CHECK(sn > 0.0);
    CHECK(sn < 1.0);
  }
}

TEST_CASE("scores: all-ones beats all-zeros for every fitted kind") {
  auto data = random_sane_data(200, 23);
  const std::vector<verifier::StageTwoModel> models = {
      verifier::fit_linreg(data),
      verifier::fit_logreg(data, 300, 0.5, 2),
      verifier::fit_forest(data, 30, 6, 5, 0, 2),
      verifier::fit_nn(data, 8, 300, 0.2, 2),
  };
  for (const auto &m : models) {
    const double hi = verifier::score_values(m, vec4(1, 1, 1, 1));
    const double lo = verifier::score_values(m, vec4(0, 0, 0, 0));
    CHECK(hi > lo);
  }
}

TEST_CASE("storage order does not change linreg or forest") {
  auto data = random_sane_data(150, 29);
  auto shuffled = data;
  Rng rng(100);
  rng.shuffle(shuffled);

  const auto lin_a = verifier::fit_linreg(data);
  const auto lin_b = verifier::fit_linreg(shuffled);
  CHECK(std::get<verifier::LinRegModel>(lin_a.payload).weights ==
        std::get<verifier::LinRegModel>(lin_b.payload).weights);

  const auto rf_a = verifier::fit_forest(data, 15, 6, 5, 0, 7);
  const auto rf_b = verifier::fit_forest(shuffled, 15, 6, 5, 0, 7);
  for (int i = 0; i < 50; ++i) {
    Vector v(4);
    for (int d = 0; d < 4; ++d) v[d] = rng.uniform();
    CHECK(verifier::score_values(rf_a, v) == verifier::score_values(rf_b, v));
  }
}

TEST_CASE("importance: linear weights normalize, permutation flags the signal") {
  verifier::StageTwoModel lin;
  lin.kind = verifier::ModelKind::kLinReg;
  lin.dim = 4;
  Vector w(5);
  w << 0.0, 0.2, 0.6, 0.2, 0.0;
  lin.payload = verifier::LinRegModel{w};
  const auto imp = verifier::importance(lin, {}, 0);
  CHECK(imp.method == "abs-coefficient");
  CHECK(imp.weights[0] == doctest::Approx(0.2));
  CHECK(imp.weights[1] == doctest::Approx(0.6));
  CHECK(imp.weights[2] == doctest::Approx(0.2));
  CHECK(imp.weights[3] == doctest::Approx(0.0));
  double sum = 0.0;
  for (double x : imp.weights) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

  // NN permutation importance: only feature 0 carries signal
  Rng rng(3);
  std::vector<verifier::SimSample> data;
  for (int i = 0; i < 300; ++i) {
    Vector v(3);
    v[0] = i % 2 ? 0.9 : 0.1;
    v[1] = rng.uniform();
    v[2] = rng.uniform();
    data.push_back({v, i % 2});
  }
  const auto nn = verifier::fit_nn(data, 6, 400, 0.5, 4);
  const auto pimp = verifier::importance(nn, data, 5);
  CHECK(pimp.method == "permutation-eer");
  CHECK(pimp.weights[0] > 0.8);
  CHECK_THROWS_AS(verifier::importance(nn, {}, 5), DataError);
}

TEST_CASE("model save/load round trips for all kinds") {
  TempDir dir("verifier");
  auto data = random_sane_data(120, 31);
  const std::vector<verifier::StageTwoModel> models = {
      verifier::fit_linreg(data, "h1"),
      verifier::fit_logreg(data, 100, 0.5, 3, "h1"),
      verifier::fit_forest(data, 10, 5, 5, 0, 3, "h1"),
      verifier::fit_nn(data, 6, 100, 0.2, 3, "h1"),
  };
  Rng rng(7);
  int idx = 0;
  for (const auto &m : models) {
    const std::string path = dir.file("m" + std::to_string(idx++) + ".json");
    verifier::save_model(path, m);
    const auto back = verifier::load_model(path);
    CHECK(back.kind == m.kind);
    CHECK(back.schema_hash == "h1");
    CHECK(back.dim == 4);
    for (int i = 0; i < 30; ++i) {
      Vector v(4);
      for (int d = 0; d < 4; ++d) v[d] = rng.uniform();
      CHECK(verifier::score_values(back, v) == verifier::score_values(m, v));
    }
    // determinstic writer: save(load(x)) is byte-identical
    const std::string path2 = dir.file("rt" + std::to_string(idx) + ".json");
    verifier::save_model(path2, back);
    CHECK(read_text_file(path) == read_text_file(path2));
  }
}

TEST_CASE("score: schema hash mismatch is rejected") {
  auto data = random_sane_data(50, 37);
  const auto model = verifier::fit_linreg(data, "hashA");
  similarity::SimilarityVector sv;
  sv.values = vec4(1, 1, 1, 1);
  sv.schema_hash = "hashB";
  CHECK_THROWS_WITH_AS(verifier::score(model, sv), doctest::Contains("schema hash"),
                       DataError);
  sv.schema_hash = "hashA";
  CHECK_NOTHROW(verifier::score(model, sv));
  Vector bad(3);
  bad << 1, 1, 1;
  CHECK_THROWS_AS(verifier::score_values(model, bad), DataError);
}
