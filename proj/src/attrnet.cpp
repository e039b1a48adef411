// src/attrnet.cpp

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

#include "attrsv/attrnet.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "attrsv/rng.hpp"
#include "attrsv/serialize.hpp"

using nlohmann::json;

namespace attrsv::attrnet {

namespace {
constexpr double kStdEps = 1e-8;  // statistics-pooling variance floor
}

std::string route_name(Route r) {
  return r == Route::kEmbeddingMlp ? "embedding-mlp" : "mfcc-tdnn";
}

Route route_from_name(const std::string &name) {
  if (name == "embedding-mlp") return Route::kEmbeddingMlp;
  if (name == "mfcc-tdnn") return Route::kMfccTdnn;
  throw DataError("unknown classifier route '" + name + "'");
}

Vector softmax(const Vector &logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

int TdnnConfig::receptive_field() const {
  int rf = 1;
  for (std::size_t i = 0; i < kernels.size(); ++i) rf += (kernels[i] - 1) * dilations[i];
  return rf;
}

void TdnnConfig::validate() const {
  if (channels.empty() || channels.size() != kernels.size() ||
      channels.size() != dilations.size())
    throw ConfigError("tdnn: channels/kernels/dilations must have equal, nonzero length");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] < 1) throw ConfigError("tdnn: channel count must be positive");
    if (kernels[i] < 1 || kernels[i] % 2 == 0)
      throw ConfigError("tdnn: kernels must be odd and positive");
    if (dilations[i] < 1) throw ConfigError("tdnn: dilations must be positive");
  }
  for (int f : fc)
    if (f < 1) throw ConfigError("tdnn: fc widths must be positive");
}

void TrainConfig::validate() const {
  if (iterations <= 0) throw ConfigError("train: iterations must be positive");
  if (batch_size <= 0) throw ConfigError("train: batch_size must be positive");
  if (learning_rate < 0.0) throw ConfigError("train: learning_rate must be nonnegative");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("train: momentum must be in [0,1)");
}

int AttrClassifier::receptive_field() const {
  int rf = 1;
  for (const auto &c : convs) rf += (c.kernel - 1) * c.dilation;
  return rf;
}

long AttrClassifier::param_count() const {
  long n = 0;
  for (const auto &c : convs) n += c.weights.size() + c.bias.size();
  for (const auto &d : dense) n += d.weights.size() + d.bias.size();
  return n;
}

namespace {

Matrix init_weight(Eigen::Index out, Eigen::Index in, double fan_in, double fan_out,
                   Rng &rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  Matrix w(out, in);
  for (Eigen::Index c = 0; c < in; ++c)
    for (Eigen::Index r = 0; r < out; ++r) w(r, c) = rng.uniform(-a, a);
  return w;
}

void check_positive(int v, const char *what) {
  if (v < 1) throw ConfigError(std::string(what) + " must be positive");
}

}  // namespace

AttrClassifier build_embedding_mlp(int input_dim, int class_count,
                                   const std::vector<int> &hidden_dims,
                                   std::uint64_t seed) {
  check_positive(input_dim, "mlp: input_dim");
  check_positive(class_count, "mlp: class_count");
  for (int h : hidden_dims) check_positive(h, "mlp: hidden width");

  AttrClassifier net;
  net.route = Route::kEmbeddingMlp;
  net.input_dim = input_dim;
  net.class_count = class_count;
  net.input_mean = Vector::Zero(input_dim);
  net.input_scale = Vector::Ones(input_dim);

  Rng rng(mix_seed(seed, 0x319));
  int prev = input_dim;
  for (int h : hidden_dims) {
    DenseLayer d;
    d.weights = init_weight(h, prev, prev, h, rng);
    d.bias = Vector::Zero(h);
    net.dense.push_back(std::move(d));
    prev = h;
  }
  DenseLayer proj;
  proj.weights = init_weight(class_count, prev, prev, class_count, rng);
  proj.bias = Vector::Zero(class_count);
  net.dense.push_back(std::move(proj));
  return net;
}

AttrClassifier build_mfcc_tdnn(int n_coeffs, int class_count, const TdnnConfig &config,
                               std::uint64_t seed) {
  check_positive(n_coeffs, "tdnn: n_coeffs");
  check_positive(class_count, "tdnn: class_count");
  config.validate();

  AttrClassifier net;
  net.route = Route::kMfccTdnn;
  net.input_dim = n_coeffs;
  net.class_count = class_count;
  net.input_mean = Vector::Zero(n_coeffs);
  net.input_scale = Vector::Ones(n_coeffs);

  Rng rng(mix_seed(seed, 0x7d2));
  int prev = n_coeffs;
  for (std::size_t l = 0; l < config.channels.size(); ++l) {
    ConvLayer c;
    c.in_channels = prev;
    c.kernel = config.kernels[l];
    c.dilation = config.dilations[l];
    const int out = config.channels[l];
    c.weights = init_weight(out, static_cast<Eigen::Index>(prev) * c.kernel,
                            static_cast<double>(prev) * c.kernel,
                            static_cast<double>(out) * c.kernel, rng);
    c.bias = Vector::Zero(out);
    net.convs.push_back(std::move(c));
    prev = out;
  }

  int dense_in = 2 * prev;  // pooled mean + std per channel
  for (int h : config.fc) {
    DenseLayer d;
    d.weights = init_weight(h, dense_in, dense_in, h, rng);
    d.bias = Vector::Zero(h);
    net.dense.push_back(std::move(d));
    dense_in = h;
  }
  DenseLayer proj;
  proj.weights = init_weight(class_count, dense_in, dense_in, class_count, rng);
  proj.bias = Vector::Zero(class_count);
  net.dense.push_back(std::move(proj));
  return net;
}

NetGrads NetGrads::zeros_like(const AttrClassifier &net) {
  NetGrads g;
  for (const auto &c : net.convs) {
    g.conv_w.push_back(Matrix::Zero(c.weights.rows(), c.weights.cols()));
    g.conv_b.push_back(Vector::Zero(c.bias.size()));
  }
  for (const auto &d : net.dense) {
    g.dense_w.push_back(Matrix::Zero(d.weights.rows(), d.weights.cols()));
    g.dense_b.push_back(Vector::Zero(d.bias.size()));
  }
  return g;
}

void NetGrads::setZero() {
  for (auto &m : conv_w) m.setZero();
  for (auto &v : conv_b) v.setZero();
  for (auto &m : dense_w) m.setZero();
  for (auto &v : dense_b) v.setZero();
}

namespace {

Matrix unroll_circular(const Matrix &a, int kernel, int dilation) {
  const Eigen::Index c = a.rows(), t_len = a.cols();
  Matrix u(c * kernel, t_len);
  for (int j = 0; j < kernel; ++j) {
    const long off = (static_cast<long>(j) - (kernel - 1) / 2) * dilation;
    for (Eigen::Index t = 0; t < t_len; ++t) {
      long s = (static_cast<long>(t) + off) % t_len;
      if (s < 0) s += t_len;
      u.block(j * c, t, c, 1) = a.col(s);
    }
  }
  return u;
}

void scatter_circular(const Matrix &du, int kernel, int dilation, Matrix &da) {
  const Eigen::Index c = da.rows(), t_len = da.cols();
  for (int j = 0; j < kernel; ++j) {
    const long off = (static_cast<long>(j) - (kernel - 1) / 2) * dilation;
    for (Eigen::Index t = 0; t < t_len; ++t) {
      long s = (static_cast<long>(t) + off) % t_len;
      if (s < 0) s += t_len;
      da.col(s) += du.block(j * c, t, c, 1);
    }
  }
}

inline Matrix leaky(const Matrix &z, double slope) {
  return z.array().max(z.array() * slope).matrix();
}

inline Matrix leaky_grad(const Matrix &z, double slope) {
  return (z.array() > 0.0).select(Matrix::Ones(z.rows(), z.cols()),
                                  Matrix::Constant(z.rows(), z.cols(), slope));
}

struct TdnnCache {
  Matrix input;                   // standardized, C0 x T
  std::vector<Matrix> unrolled;   // per conv layer
  std::vector<Matrix> pre;        // conv pre-activations
  std::vector<Matrix> act;        // conv activations
  Vector mean, stddev, pooled;
  std::vector<Vector> dense_pre, dense_act;
  Vector logits;
};

void check_features(const AttrClassifier &net, const Matrix &features) {
  if (features.rows() != net.input_dim)
    throw DataError("classifier '" + net.attribute + "': shape mismatch, got " +
                    std::to_string(features.rows()) + " rows, want " +
                    std::to_string(net.input_dim));
  if (net.route == Route::kEmbeddingMlp) {
    if (features.cols() != 1)
      throw DataError("classifier '" + net.attribute +
                      "': embedding route expects a single column");
  } else if (features.cols() < net.receptive_field()) {
    throw DataError("classifier '" + net.attribute + "': clip has " +
                    std::to_string(features.cols()) + " frames, fewer than the receptive field (" +
                    std::to_string(net.receptive_field()) + ")");
  }
}

Matrix standardize(const AttrClassifier &net, const Matrix &features) {
  Matrix x = features;
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    x.row(r) = (x.row(r).array() - net.input_mean[r]) / net.input_scale[r];
  return x;
}

// Forward pass through the TDNN trunk up to the logits, caching everything
// needed by the backward pass.
void tdnn_forward(const AttrClassifier &net, const Matrix &features, TdnnCache &cache) {
  cache.input = standardize(net, features);
  const Matrix *cur = &cache.input;
  cache.unrolled.clear();
  cache.pre.clear();
  cache.act.clear();
  for (const auto &conv : net.convs) {
    cache.unrolled.push_back(unroll_circular(*cur, conv.kernel, conv.dilation));
    Matrix z = conv.weights * cache.unrolled.back();
    z.colwise() += conv.bias;
    cache.pre.push_back(z);
    cache.act.push_back(leaky(z, net.leaky_slope));
    cur = &cache.act.back();
  }

  const Matrix &h = *cur;
  cache.mean = h.rowwise().mean();
  Vector sq = h.array().square().matrix().rowwise().mean();
  Vector var = sq - cache.mean.array().square().matrix();
  cache.stddev = (var.array().max(0.0) + kStdEps).sqrt();
  cache.pooled.resize(2 * h.rows());
  cache.pooled.head(h.rows()) = cache.mean;
  cache.pooled.tail(h.rows()) = cache.stddev;

  cache.dense_pre.clear();
  cache.dense_act.clear();
  Vector a = cache.pooled;
  for (std::size_t l = 0; l < net.dense.size(); ++l) {
    Vector z = net.dense[l].weights * a + net.dense[l].bias;
    if (l + 1 < net.dense.size()) {
      cache.dense_pre.push_back(z);
      a = leaky(z, net.leaky_slope);
      cache.dense_act.push_back(a);
    } else {
      cache.logits = z;
    }
  }
}

Vector mlp_logits(const AttrClassifier &net, const Matrix &features,
                  std::vector<Vector> *pre = nullptr, std::vector<Vector> *act = nullptr) {
  Vector a = standardize(net, features).col(0);
  for (std::size_t l = 0; l < net.dense.size(); ++l) {
    Vector z = net.dense[l].weights * a + net.dense[l].bias;
    if (l + 1 < net.dense.size()) {
      if (pre) pre->push_back(z);
      a = leaky(z, net.leaky_slope);
      if (act) act->push_back(a);
    } else {
      return z;
    }
  }
  throw NumericError("mlp: network has no projection layer");
}

double cross_entropy(const Vector &logits, int label, Vector *probs) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  if (probs) *probs = (logits.array() - lse).exp();
  return lse - logits[label];
}

}  // namespace

double loss_and_grad(const AttrClassifier &net,
                     const std::vector<const TrainingExample *> &batch, NetGrads *grads) {
  if (batch.empty()) throw DataError("loss: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  if (grads) grads->setZero();

  if (net.route == Route::kEmbeddingMlp) {
    const auto b = static_cast<Eigen::Index>(batch.size());
    Matrix x(net.input_dim, b);
    for (Eigen::Index i = 0; i < b; ++i) {
      check_features(net, batch[i]->features);
      x.col(i) = standardize(net, batch[i]->features).col(0);
    }
    std::vector<Matrix> pre, act;
    Matrix a = x;
    for (std::size_t l = 0; l + 1 < net.dense.size(); ++l) {
      Matrix z = net.dense[l].weights * a;
      z.colwise() += net.dense[l].bias;
      pre.push_back(z);
      a = leaky(z, net.leaky_slope);
      act.push_back(a);
    }
    Matrix logits = net.dense.back().weights * a;
    logits.colwise() += net.dense.back().bias;

    Matrix dlogits(net.class_count, b);
    for (Eigen::Index i = 0; i < b; ++i) {
      Vector probs;
      total += cross_entropy(logits.col(i), batch[i]->label, grads ? &probs : nullptr);
      if (grads) {
        probs[batch[i]->label] -= 1.0;
        dlogits.col(i) = probs * inv_b;
      }
    }
    if (grads) {
      Matrix dz = dlogits;
      for (std::size_t l = net.dense.size(); l-- > 0;) {
        const Matrix &input = l == 0 ? x : act[l - 1];
        grads->dense_w[l] += dz * input.transpose();
        grads->dense_b[l] += dz.rowwise().sum();
        if (l > 0) {
          Matrix da = net.dense[l].weights.transpose() * dz;
          dz = da.cwiseProduct(leaky_grad(pre[l - 1], net.leaky_slope));
        }
      }
    }
    return total * inv_b;
  }

  // TDNN route: clips may have different frame counts, so walk the batch.
  TdnnCache cache;
  for (const TrainingExample *ex : batch) {
    check_features(net, ex->features);
    tdnn_forward(net, ex->features, cache);
    Vector probs;
    total += cross_entropy(cache.logits, ex->label, grads ? &probs : nullptr);
    if (!grads) continue;

    probs[ex->label] -= 1.0;
    Vector dz = probs * inv_b;
    Vector dpooled;
    for (std::size_t l = net.dense.size(); l-- > 0;) {
      const Vector &input = l == 0 ? cache.pooled : cache.dense_act[l - 1];
      grads->dense_w[l] += dz * input.transpose();
      grads->dense_b[l] += dz;
      Vector da = net.dense[l].weights.transpose() * dz;
      if (l > 0) {
        dz = da.cwiseProduct(leaky_grad(cache.dense_pre[l - 1], net.leaky_slope).col(0));
      } else {
        dpooled = da;
      }
    }

    const Matrix &h = cache.act.back();
    const Eigen::Index c = h.rows();
    const double t_len = static_cast<double>(h.cols());
    Matrix da(c, h.cols());
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      const double dmean = dpooled[ch];
      const double dstd = dpooled[c + ch];
      da.row(ch) = (Matrix::Constant(1, h.cols(), dmean / t_len) +
                    (h.row(ch).array() - cache.mean[ch]).matrix() *
                        (dstd / (t_len * cache.stddev[ch])));
    }

    for (std::size_t l = net.convs.size(); l-- > 0;) {
      Matrix dzc = da.cwiseProduct(leaky_grad(cache.pre[l], net.leaky_slope));
      grads->conv_w[l] += dzc * cache.unrolled[l].transpose();
      grads->conv_b[l] += dzc.rowwise().sum();
      if (l > 0) {
        Matrix du = net.convs[l].weights.transpose() * dzc;
        da = Matrix::Zero(cache.act[l - 1].rows(), cache.act[l - 1].cols());
        scatter_circular(du, net.convs[l].kernel, net.convs[l].dilation, da);
      }
    }
  }
  return total * inv_b;
}

Vector flatten_params(const AttrClassifier &net) {
  Vector out(net.param_count());
  Eigen::Index pos = 0;
  auto put = [&](const double *data, Eigen::Index n) {
    out.segment(pos, n) = Eigen::Map<const Vector>(data, n);
    pos += n;
  };
  for (const auto &c : net.convs) {
    put(c.weights.data(), c.weights.size());
    put(c.bias.data(), c.bias.size());
  }
  for (const auto &d : net.dense) {
    put(d.weights.data(), d.weights.size());
    put(d.bias.data(), d.bias.size());
  }
  return out;
}

void unflatten_params(AttrClassifier &net, const Vector &params) {
  if (params.size() != net.param_count())
    throw DataError("classifier: parameter vector size mismatch");
  Eigen::Index pos = 0;
  auto take = [&](double *data, Eigen::Index n) {
    Eigen::Map<Vector>(data, n) = params.segment(pos, n);
    pos += n;
  };
  for (auto &c : net.convs) {
    take(c.weights.data(), c.weights.size());
    take(c.bias.data(), c.bias.size());
  }
  for (auto &d : net.dense) {
    take(d.weights.data(), d.weights.size());
    take(d.bias.data(), d.bias.size());
  }
}

Vector flatten_grads(const AttrClassifier &net, const NetGrads &grads) {
  Vector out(net.param_count());
  Eigen::Index pos = 0;
  auto put = [&](const double *data, Eigen::Index n) {
    out.segment(pos, n) = Eigen::Map<const Vector>(data, n);
    pos += n;
  };
  for (std::size_t i = 0; i < grads.conv_w.size(); ++i) {
    put(grads.conv_w[i].data(), grads.conv_w[i].size());
    put(grads.conv_b[i].data(), grads.conv_b[i].size());
  }
  for (std::size_t i = 0; i < grads.dense_w.size(); ++i) {
    put(grads.dense_w[i].data(), grads.dense_w[i].size());
    put(grads.dense_b[i].data(), grads.dense_b[i].size());
  }
  return out;
}

namespace {

void fit_standardization(AttrClassifier &net, const std::vector<TrainingExample> &data) {
  Vector sum = Vector::Zero(net.input_dim);
  Vector sumsq = Vector::Zero(net.input_dim);
  double count = 0.0;
  for (const auto &ex : data) {
    sum += ex.features.rowwise().sum();
    sumsq += ex.features.array().square().matrix().rowwise().sum();
    count += static_cast<double>(ex.features.cols());
  }
  net.input_mean = sum / count;
  Vector var = sumsq / count - net.input_mean.array().square().matrix();
  net.input_scale = var.array().max(0.0).sqrt();
  for (Eigen::Index i = 0; i < net.input_scale.size(); ++i)
    if (net.input_scale[i] < 1e-8) net.input_scale[i] = 1.0;
}

}  // namespace

AttrClassifier train(AttrClassifier net, const std::vector<TrainingExample> &data,
                     const TrainConfig &config, std::vector<double> *loss_trace) {
  config.validate();
  if (data.empty()) throw DataError("train: empty dataset");
  for (const auto &ex : data) {
    if (ex.label < 0 || ex.label >= net.class_count)
      throw DataError("train: label " + std::to_string(ex.label) + " out of range for " +
                      std::to_string(net.class_count) + " classes");
    check_features(net, ex.features);
  }

  fit_standardization(net, data);

  NetGrads grads = NetGrads::zeros_like(net);
  NetGrads velocity = NetGrads::zeros_like(net);

  Rng rng(mix_seed(config.seed, 0x5bf));
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::size_t cursor = 0;

  std::vector<const TrainingExample *> batch(static_cast<std::size_t>(config.batch_size));
  double loss = 0.0;
  for (long it = 0; it < config.iterations; ++it) {
    for (auto &slot : batch) {
      if (cursor == order.size()) {
        rng.shuffle(order);
        cursor = 0;
      }
      slot = &data[order[cursor++]];
    }

    loss = loss_and_grad(net, batch, &grads);
    if (!std::isfinite(loss))
      throw NumericError("train: loss diverged at iteration " + std::to_string(it));
    if (loss_trace) loss_trace->push_back(loss);

    double lr = config.learning_rate;
    if (config.schedule == LrSchedule::kLinearDecay && config.iterations > 1)
      lr *= 1.0 - 0.9 * static_cast<double>(it) / static_cast<double>(config.iterations - 1);

    for (std::size_t l = 0; l < net.convs.size(); ++l) {
      velocity.conv_w[l] = config.momentum * velocity.conv_w[l] - lr * grads.conv_w[l];
      velocity.conv_b[l] = config.momentum * velocity.conv_b[l] - lr * grads.conv_b[l];
      net.convs[l].weights += velocity.conv_w[l];
      net.convs[l].bias += velocity.conv_b[l];
    }
    for (std::size_t l = 0; l < net.dense.size(); ++l) {
      velocity.dense_w[l] = config.momentum * velocity.dense_w[l] - lr * grads.dense_w[l];
      velocity.dense_b[l] = config.momentum * velocity.dense_b[l] - lr * grads.dense_b[l];
      net.dense[l].weights += velocity.dense_w[l];
      net.dense[l].bias += velocity.dense_b[l];
    }
  }

  net.meta.seed = config.seed;
  net.meta.iterations = config.iterations;
  net.meta.final_loss = loss;
  return net;
}

Prediction predict(const AttrClassifier &net, const Matrix &features) {
  check_features(net, features);
  Vector logits;
  if (net.route == Route::kEmbeddingMlp) {
    logits = mlp_logits(net, features);
  } else {
    TdnnCache cache;
    tdnn_forward(net, features, cache);
    logits = cache.logits;
  }
  Prediction p;
  p.probs = softmax(logits);
  p.class_index = 0;
  for (Eigen::Index i = 1; i < p.probs.size(); ++i)
    if (p.probs[i] > p.probs[p.class_index]) p.class_index = static_cast<int>(i);
  return p;
}

double evaluate_accuracy(const AttrClassifier &net,
                         const std::vector<TrainingExample> &data) {
  if (data.empty()) throw DataError("evaluate_accuracy: empty dataset");
  long hits = 0;
  for (const auto &ex : data)
    if (predict(net, ex.features).class_index == ex.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

void save_classifier(const std::string &path, const AttrClassifier &net,
                     const std::string &schema_hash) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "attr_classifier";
  j["attribute"] = net.attribute;
  j["route"] = route_name(net.route);
  j["input_dim"] = net.input_dim;
  j["class_count"] = net.class_count;
  j["leaky_slope"] = net.leaky_slope;
  j["schema_hash"] = schema_hash;

  json convs = json::array();
  for (const auto &c : net.convs)
    convs.push_back({{"in", c.in_channels},
                     {"out", c.weights.rows()},
                     {"kernel", c.kernel},
                     {"dilation", c.dilation}});
  j["conv"] = convs;

  json dense = json::array();
  for (const auto &d : net.dense)
    dense.push_back({{"in", d.weights.cols()}, {"out", d.weights.rows()}});
  j["dense"] = dense;

  std::vector<double> norm = to_std(net.input_mean);
  std::vector<double> scale = to_std(net.input_scale);
  norm.insert(norm.end(), scale.begin(), scale.end());
  j["input_norm_b64"] = base64_encode(pack_f32_le(norm));
  j["weights_b64"] = base64_encode(pack_f32_le(to_std(flatten_params(net))));
  j["train"] = {{"seed", net.meta.seed},
                {"iterations", net.meta.iterations},
                {"final_loss", net.meta.final_loss}};
  write_text_file(path, j.dump(2) + "\n");
}

LoadedClassifier load_classifier(const std::string &path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw DataError("classifier: malformed JSON in " + path);
  if (j.value("kind", "") != "attr_classifier" || j.value("format_version", 0) != 1)
    throw DataError("classifier: unsupported envelope in " + path);

  LoadedClassifier out;
  AttrClassifier &net = out.net;
  net.attribute = j.at("attribute").get<std::string>();
  net.route = route_from_name(j.at("route").get<std::string>());
  net.input_dim = j.at("input_dim").get<int>();
  net.class_count = j.at("class_count").get<int>();
  net.leaky_slope = j.at("leaky_slope").get<double>();
  out.schema_hash = j.at("schema_hash").get<std::string>();

  for (const auto &jc : j.at("conv")) {
    ConvLayer c;
    c.in_channels = jc.at("in").get<int>();
    c.kernel = jc.at("kernel").get<int>();
    c.dilation = jc.at("dilation").get<int>();
    c.weights.resize(jc.at("out").get<int>(),
                     static_cast<Eigen::Index>(c.in_channels) * c.kernel);
    c.bias.resize(c.weights.rows());
    net.convs.push_back(std::move(c));
  }
  for (const auto &jd : j.at("dense")) {
    DenseLayer d;
    d.weights.resize(jd.at("out").get<int>(), jd.at("in").get<int>());
    d.bias.resize(d.weights.rows());
    net.dense.push_back(std::move(d));
  }

  std::vector<double> norm = unpack_f32_le(base64_decode(j.at("input_norm_b64")));
  if (static_cast<long>(norm.size()) != 2L * net.input_dim)
    throw DataError("classifier: input-norm blob size mismatch in " + path);
  net.input_mean = Eigen::Map<Vector>(norm.data(), net.input_dim);
  net.input_scale = Eigen::Map<Vector>(norm.data() + net.input_dim, net.input_dim);

  std::vector<double> weights = unpack_f32_le(base64_decode(j.at("weights_b64")));
  if (static_cast<long>(weights.size()) != net.param_count())
    throw DataError("classifier: weight blob size mismatch in " + path);
  unflatten_params(net, to_eigen(weights));

  const auto &t = j.at("train");
  net.meta.seed = t.at("seed").get<std::uint64_t>();
  net.meta.iterations = t.at("iterations").get<long>();
  net.meta.final_loss = t.at("final_loss").get<double>();
  return out;
}

std::vector<std::pair<std::string, Vector>> load_embeddings(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("embeddings: cannot open " + path);
  std::vector<std::pair<std::string, Vector>> out;
  std::string line;
  long line_no = 0;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw DataError("embeddings: malformed JSON at line " + std::to_string(line_no) +
                      " of " + path);
    const auto values = j.at("values").get<std::vector<double>>();
    if (static_cast<std::size_t>(j.at("dim").get<int>()) != values.size())
      throw DataError("embeddings: dim field disagrees with values at line " +
                      std::to_string(line_no) + " of " + path);
    if (dim < 0) dim = static_cast<Eigen::Index>(values.size());
    if (dim != static_cast<Eigen::Index>(values.size()))
      throw DataError("embeddings: inconsistent dimensions in " + path);
    out.emplace_back(j.at("clip_id").get<std::string>(), to_eigen(values));
  }
  return out;
}

void save_embeddings(const std::string &path,
                     const std::vector<std::pair<std::string, Vector>> &embeddings) {
  std::ostringstream out;
  for (const auto &[clip_id, values] : embeddings) {
    json j;
    j["clip_id"] = clip_id;
    j["dim"] = values.size();
    j["values"] = to_std(values);
    out << j.dump() << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace attrsv::attrnet
