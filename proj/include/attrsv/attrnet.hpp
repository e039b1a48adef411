// attrsv/attrnet.hpp

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

#ifndef ATTRSV_ATTRNET_HPP
#define ATTRSV_ATTRNET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "attrsv/common.hpp"

namespace attrsv::attrnet {

enum class Route { kEmbeddingMlp, kMfccTdnn };

std::string route_name(Route r);
Route route_from_name(const std::string &name);

/// Numerically stable softmax (max subtraction); valid probabilities for any
/// finite logits.
Vector softmax(const Vector &logits);

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;
};

/// 1-D temporal convolution over frames with circular padding.  Wraparound
/// framing keeps pooled statistics exact under self-concatenation of a clip.
struct ConvLayer {
  Matrix weights;  // out_ch x (in_ch * kernel)
  Vector bias;
  int in_channels = 0;
  int kernel = 1;
  int dilation = 1;
};

struct TdnnConfig {
  std::vector<int> channels = {128, 128, 128};
  std::vector<int> kernels = {5, 3, 3};
  std::vector<int> dilations = {1, 2, 3};
  std::vector<int> fc = {256, 256};

  int receptive_field() const;
  void validate() const;
};

enum class LrSchedule { kNone, kLinearDecay };

struct TrainConfig {
  long iterations = 100000;
  int batch_size = 256;
  double learning_rate = 0.2;
  double momentum = 0.5;
  LrSchedule schedule = LrSchedule::kLinearDecay;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainMeta {
  std::uint64_t seed = 0;
  long iterations = 0;
  double final_loss = 0.0;
};

/// One attribute classifier.  Embedding route: dense stack over a fixed-size
/// vector.  MFCC route: conv stack over frames, statistics pooling
/// (per-channel mean and standard deviation), then the dense stack.
struct AttrClassifier {
  std::string attribute;
  Route route = Route::kEmbeddingMlp;
  int input_dim = 0;    // embedding dim, or n_coeffs for the TDNN route
  int class_count = 0;
  double leaky_slope = 0.01;
  std::vector<ConvLayer> convs;
  std::vector<DenseLayer> dense;  // hidden layers + class projection
  Vector input_mean, input_scale;  // feature standardization fitted by train()
  TrainMeta meta;

  int receptive_field() const;
  long param_count() const;
};

/// features: input_dim x 1 for the embedding route, n_coeffs x frames for the
/// MFCC route (frames >= receptive field).
struct TrainingExample {
  Matrix features;
  int label = 0;
};

/// Linear -> LeakyReLU -> Linear -> LeakyReLU -> Linear -> softmax.
/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
AttrClassifier build_embedding_mlp(int input_dim, int class_count,
                                   const std::vector<int> &hidden_dims,
                                   std::uint64_t seed);

AttrClassifier build_mfcc_tdnn(int n_coeffs, int class_count, const TdnnConfig &config,
                               std::uint64_t seed);

/// Gradient buffers mirroring a classifier's layers.
struct NetGrads {
  std::vector<Matrix> conv_w;
  std::vector<Vector> conv_b;
  std::vector<Matrix> dense_w;
  std::vector<Vector> dense_b;

  static NetGrads zeros_like(const AttrClassifier &net);
  void setZero();
};

/// Mean cross-entropy over the batch; fills grads when non-null.
double loss_and_grad(const AttrClassifier &net,
                     const std::vector<const TrainingExample *> &batch,
                     NetGrads *grads);

Vector flatten_params(const AttrClassifier &net);
void unflatten_params(AttrClassifier &net, const Vector &params);
Vector flatten_grads(const AttrClassifier &net, const NetGrads &grads);

/// Mini-batch SGD with classical momentum: v <- m*v - lr*g; w <- w + v.
/// Batches come from seeded shuffling with wraparound.  Fits input
/// standardization from the data before the first step.
AttrClassifier train(AttrClassifier net, const std::vector<TrainingExample> &data,
                     const TrainConfig &config, std::vector<double> *loss_trace = nullptr);

struct Prediction {
  int class_index = 0;
  Vector probs;
};

/// Argmax of the softmax output; ties break to the lowest index.
Prediction predict(const AttrClassifier &net, const Matrix &features);

double evaluate_accuracy(const AttrClassifier &net,
                         const std::vector<TrainingExample> &data);

// Model file: versioned JSON envelope, weights as base64 little-endian
// 32-bit floats (column-major within each layer).
void save_classifier(const std::string &path, const AttrClassifier &net,
                     const std::string &schema_hash);
struct LoadedClassifier {
  AttrClassifier net;
  std::string schema_hash;
};
LoadedClassifier load_classifier(const std::string &path);

// Embedding files: JSON-lines {"clip_id":..., "dim":..., "values":[...]}.
std::vector<std::pair<std::string, Vector>> load_embeddings(const std::string &path);
void save_embeddings(const std::string &path,
                     const std::vector<std::pair<std::string, Vector>> &embeddings);

}  // namespace attrsv::attrnet

#endif  // ATTRSV_ATTRNET_HPP
