// src/commands.cpp

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

#include "attrsv/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include "attrsv/attrnet.hpp"
#include "attrsv/parallel.hpp"
#include "attrsv/rng.hpp"
#include "attrsv/serialize.hpp"
#include "attrsv/similarity.hpp"
#include "attrsv/verifier.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace attrsv::cli {

namespace {

void write_run_record(const RunConfig &cfg, const std::string &command,
                      std::vector<std::string> artifacts) {
  fs::create_directories(fs::path(cfg.out_dir) / "runs");
  std::sort(artifacts.begin(), artifacts.end());
  json j;
  j["command"] = command;
  j["config_fingerprint"] = cfg.fingerprint();
  j["toolkit_version"] = kToolkitVersion;
  j["seed"] = cfg.seed;
  j["artifacts"] = artifacts;
  write_text_file(cfg.run_record_path(command), j.dump(2) + "\n");
}

corpus::SynthSpec synth_spec_for(const RunConfig &cfg, bool test_split) {
  corpus::SynthSpec spec;
  spec.n_speakers = test_split ? cfg.synth_test_speakers : cfg.synth_train_speakers;
  spec.clips_per_speaker = cfg.synth_clips_per_speaker;
  spec.clip_duration_sec = cfg.synth_duration_sec;
  spec.sample_rate = cfg.synth_sample_rate;
  spec.noise_std = cfg.synth_noise_std;
  spec.am_depth = cfg.synth_am_depth;
  spec.schema = corpus::AttributeSchema::defaults(cfg.classes_gender, cfg.classes_nationality,
                                                  cfg.classes_age, cfg.classes_profession);
  spec.speaker_prefix = test_split ? "tspk" : "spk";
  return spec;
}

corpus::Manifest load_manifest_or_hint(const std::string &path, const char *producer) {
  if (!fs::exists(path))
    throw DataError("missing manifest " + path + ": run `attrsv " + producer + "` first");
  return corpus::load_manifest(path);
}

std::pair<corpus::Manifest, corpus::Manifest> load_both_manifests(const RunConfig &cfg) {
  corpus::Manifest train = load_manifest_or_hint(cfg.train_manifest_path(), "synth");
  corpus::Manifest test = load_manifest_or_hint(cfg.test_manifest_path(), "synth");
  if (train.schema.hash() != test.schema.hash())
    throw DataError("train and test manifests carry different schemas");
  return {std::move(train), std::move(test)};
}

std::vector<std::string> manifest_clips(const corpus::Manifest &m) { return m.all_clip_ids(); }

dsp::MfccMatrix load_cached_features(const RunConfig &cfg, const std::string &clip_id) {
  const std::string path = cfg.cache_path(clip_id);
  if (!fs::exists(path))
    throw DataError("missing feature cache for clip '" + clip_id +
                    "': run `attrsv extract` first");
  return dsp::read_feature_cache(path);
}

struct RouteModels {
  std::map<std::string, attrnet::AttrClassifier> by_attribute;
};

RouteModels load_stage1_models(const RunConfig &cfg, const corpus::AttributeSchema &schema,
                               const std::string &route) {
  RouteModels models;
  for (const auto &attr : schema.attributes) {
    const std::string path = cfg.stage1_model_path(route, attr.name);
    if (!fs::exists(path))
      throw DataError("missing stage-1 model " + path + ": run `attrsv train-attr` first");
    attrnet::LoadedClassifier loaded = attrnet::load_classifier(path);
    if (loaded.schema_hash != schema.hash())
      throw DataError("stage-1 model " + path + " was trained against a different schema");
    if (loaded.net.class_count != static_cast<int>(attr.classes.size()))
      throw DataError("stage-1 model " + path + " class count mismatch");
    models.by_attribute[attr.name] = std::move(loaded.net);
  }
  return models;
}

// Per-clip stage-1 outputs for one predicted route over both splits.
std::map<std::string, similarity::AttributeOutputs> predict_route_outputs(
    const RunConfig &cfg, const corpus::AttributeSchema &schema,
    const corpus::Manifest &train, const corpus::Manifest &test, const std::string &route) {
  const RouteModels models = load_stage1_models(cfg, schema, route);

  std::vector<std::string> clips = manifest_clips(train);
  {
    auto t = manifest_clips(test);
    clips.insert(clips.end(), t.begin(), t.end());
  }

  const bool mfcc_route = route == "ac";
  std::map<std::string, Vector> embeddings;
  if (!mfcc_route) {
    const std::string path = cfg.embeddings_path(route);
    if (!fs::exists(path))
      throw DataError("missing embeddings " + path + ": run `attrsv extract` first");
    for (auto &[clip, vec] : attrnet::load_embeddings(path)) embeddings[clip] = vec;
  }

  std::vector<similarity::AttributeOutputs> outputs(clips.size());
  const std::string schema_hash = schema.hash();
  parallel_for(clips.size(), cfg.jobs, [&](std::size_t i) {
    Matrix features;
    if (mfcc_route) {
      features = load_cached_features(cfg, clips[i]).values.transpose();
    } else {
      auto it = embeddings.find(clips[i]);
      if (it == embeddings.end())
        throw DataError("embeddings for route '" + route + "' lack clip '" + clips[i] + "'");
      features = it->second;
    }
    similarity::AttributeOutputs out;
    out.schema_hash = schema_hash;
    for (const auto &attr : schema.attributes) {
      const auto pred = attrnet::predict(models.by_attribute.at(attr.name), features);
      out.classes.push_back(pred.class_index);
      out.probs.push_back(pred.probs);
    }
    outputs[i] = std::move(out);
  });

  std::map<std::string, similarity::AttributeOutputs> by_clip;
  for (std::size_t i = 0; i < clips.size(); ++i) by_clip[clips[i]] = std::move(outputs[i]);
  return by_clip;
}

std::vector<corpus::TrialPair> load_trials_or_hint(const RunConfig &cfg, bool test_split) {
  const std::string path = cfg.trials_path(test_split);
  if (!fs::exists(path))
    throw DataError("missing trials " + path + ": run `attrsv make-trials` first");
  return corpus::load_trials(path);
}

struct PipelineState {
  corpus::Manifest train_manifest, test_manifest;
  metrics::SystemInputs inputs;
};

// Assembles SystemInputs for the requested predicted routes.  The returned
// struct owns the manifests the inputs point into.
std::unique_ptr<PipelineState> build_inputs(const RunConfig &cfg,
                                            const std::vector<std::string> &routes,
                                            bool need_trials = true) {
  auto state = std::make_unique<PipelineState>();
  auto [train, test] = load_both_manifests(cfg);
  state->train_manifest = std::move(train);
  state->test_manifest = std::move(test);
  state->inputs.schema = state->train_manifest.schema;
  state->inputs.train_manifest = &state->train_manifest;
  state->inputs.test_manifest = &state->test_manifest;
  state->inputs.stage2 = cfg.stage2;
  state->inputs.seed = cfg.seed;
  if (need_trials) {
    state->inputs.train_trials = load_trials_or_hint(cfg, false);
    state->inputs.test_trials = load_trials_or_hint(cfg, true);
  }
  for (const auto &route : routes)
    state->inputs.route_outputs[route] = predict_route_outputs(
        cfg, state->inputs.schema, state->train_manifest, state->test_manifest, route);
  return state;
}

metrics::RouteId route_id(const std::string &name) {
  if (name == "groundtruth") return metrics::RouteId::groundtruth();
  if (name == "random") return metrics::RouteId::random();
  return metrics::RouteId::predicted(name);
}

// Grid cells: groundtruth and random have no mode split; predicted routes
// carry both requested modes.
std::vector<std::pair<metrics::RouteId, similarity::Mode>> grid_cells(const RunConfig &cfg) {
  std::vector<std::pair<metrics::RouteId, similarity::Mode>> cells;
  cells.push_back({metrics::RouteId::groundtruth(), similarity::Mode::kHard});
  for (const auto &mode_name : cfg.eval_modes) {
    const auto mode = similarity::mode_from_name(mode_name);
    for (const auto &route : cfg.eval_routes)
      cells.push_back({metrics::RouteId::predicted(route), mode});
  }
  cells.push_back({metrics::RouteId::random(), similarity::Mode::kHard});
  return cells;
}

}  // namespace

Vector synth_embedding(const dsp::MfccMatrix &features, const std::string &tag,
                       const std::string &clip_id, int dim, double noise_std) {
  const Eigen::Index c = features.n_coeffs();
  Vector source(3 * c);
  const double frames = static_cast<double>(features.frames());
  for (Eigen::Index j = 0; j < c; ++j) {
    const auto col = features.values.col(j);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / frames;
    double delta = 0.0;
    for (Eigen::Index t = 1; t < features.frames(); ++t)
      delta += std::abs(col[t] - col[t - 1]);
    source[j] = mean;
    source[c + j] = std::sqrt(std::max(0.0, var));
    source[2 * c + j] = features.frames() > 1 ? delta / (frames - 1.0) : 0.0;
  }

  Rng proj_rng(mix_seed(fnv1a64("emb-proj:" + tag), 7));
  Matrix projection(dim, 3 * c);
  const double scale = 1.0 / std::sqrt(static_cast<double>(3 * c));
  for (Eigen::Index col = 0; col < projection.cols(); ++col)
    for (Eigen::Index row = 0; row < projection.rows(); ++row)
      projection(row, col) = proj_rng.normal() * scale;

  Vector z = projection * source;
  const double norm = z.norm();
  if (norm > 1e-12) z /= norm;

  Rng noise_rng(mix_seed(fnv1a64("emb-noise:" + tag), fnv1a64(clip_id)));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += noise_std * noise_rng.normal();
  return z;
}

void run_init(const std::string &out_path) {
  if (fs::exists(out_path))
    throw ConfigError("init: refusing to overwrite existing " + out_path);
  write_text_file(out_path, default_config_toml());
  std::cout << "wrote " << out_path << "\n";
}

void run_synth(const RunConfig &cfg) {
  std::vector<std::string> artifacts;
  for (bool test_split : {false, true}) {
    const corpus::SynthSpec spec = synth_spec_for(cfg, test_split);
    const std::uint64_t seed = mix_seed(cfg.seed, test_split ? 2 : 1);
    const std::string dir =
        (fs::path(cfg.corpus_dir) / (test_split ? "test" : "train")).string();
    const corpus::SynthResult result = corpus::synthesize_corpus(spec, seed, dir);
    artifacts.push_back(result.manifest_path);
    std::cout << "[synth] " << (test_split ? "test" : "train") << ": "
              << result.manifest.speakers.size() << " speakers, " << result.wav_paths.size()
              << " clips -> " << dir << "\n";
  }
  write_run_record(cfg, "synth", artifacts);
}

void run_extract(const RunConfig &cfg) {
  auto [train, test] = load_both_manifests(cfg);
  fs::create_directories(cfg.cache_dir);

  std::vector<std::pair<std::string, std::string>> clip_files;  // id, wav path
  for (const corpus::Manifest *m : {&train, &test})
    for (const auto &spk : m->speakers)
      for (const auto &cid : spk.clip_ids) clip_files.emplace_back(cid, m->clip_paths.at(cid));

  std::vector<dsp::MfccMatrix> features(clip_files.size());
  std::vector<std::string> artifacts;
  parallel_for(clip_files.size(), cfg.jobs, [&](std::size_t i) {
    const dsp::AudioClip clip = dsp::load_wav(clip_files[i].second);
    const dsp::MfccMatrix mfcc = dsp::compute_mfcc(clip, cfg.mfcc);
    dsp::write_feature_cache(cfg.cache_path(clip_files[i].first), mfcc);
    // embeddings derive from the cached (float32) values so every consumer
    // sees the same numbers
    features[i] = dsp::read_feature_cache(cfg.cache_path(clip_files[i].first));
  });
  for (const auto &[cid, _] : clip_files) artifacts.push_back(cfg.cache_path(cid));
  std::cout << "[extract] cached MFCCs for " << clip_files.size() << " clips\n";

  for (std::size_t t = 0; t < cfg.embedding_tags.size(); ++t) {
    const std::string &tag = cfg.embedding_tags[t];
    if (cfg.embedding_files.count(tag)) {
      std::cout << "[extract] route '" << tag << "' uses external embeddings: "
                << cfg.embedding_files.at(tag) << "\n";
      continue;
    }
    std::vector<std::pair<std::string, Vector>> rows(clip_files.size());
    parallel_for(clip_files.size(), cfg.jobs, [&](std::size_t i) {
      rows[i] = {clip_files[i].first,
                 synth_embedding(features[i], tag, clip_files[i].first,
                                 cfg.embedding_dims[t], cfg.embedding_noise[t])};
    });
    const std::string path = cfg.embeddings_path(tag);
    attrnet::save_embeddings(path, rows);
    artifacts.push_back(path);
    std::cout << "[extract] wrote embeddings '" << tag << "' (dim " << cfg.embedding_dims[t]
              << ", noise " << cfg.embedding_noise[t] << ") -> " << path << "\n";
  }
  write_run_record(cfg, "extract", artifacts);
}

void run_make_trials(const RunConfig &cfg) {
  auto [train, test] = load_both_manifests(cfg);
  fs::create_directories(cfg.out_dir);

  std::vector<std::string> artifacts;
  const corpus::TrialSet train_set =
      corpus::generate_trials(train, cfg.trials_train_pos, cfg.trials_train_neg,
                              mix_seed(cfg.seed, 0x7121));
  corpus::save_trials(cfg.trials_path(false), train_set.trials);
  artifacts.push_back(cfg.trials_path(false));

  const corpus::TrialSet test_set = corpus::generate_trials(
      test, cfg.trials_test_pos, cfg.trials_test_neg, mix_seed(cfg.seed, 0x7e57));
  corpus::save_trials(cfg.trials_path(true), test_set.trials);
  artifacts.push_back(cfg.trials_path(true));

  for (const auto &[name, set] :
       {std::pair<const char *, const corpus::TrialSet &>{"train", train_set},
        std::pair<const char *, const corpus::TrialSet &>{"test", test_set}}) {
    std::cout << "[make-trials] " << name << ": " << set.n_pos << " positive, " << set.n_neg
              << " negative";
    if (set.pos_with_replacement || set.neg_with_replacement)
      std::cout << "  (pool exhausted, sampled with replacement:"
                << (set.pos_with_replacement ? " positives" : "")
                << (set.neg_with_replacement ? " negatives" : "") << ")";
    std::cout << "\n";
  }
  write_run_record(cfg, "make-trials", artifacts);
}

void run_train_attr(const RunConfig &cfg) {
  auto [train, test] = load_both_manifests(cfg);
  const corpus::AttributeSchema &schema = train.schema;
  const std::string schema_hash = schema.hash();
  fs::create_directories(cfg.model_dir);
  std::vector<std::string> artifacts;

  // Test-split examples are only used for the held-out accuracy printout.
  auto collect_mfcc = [&](const corpus::Manifest &m) {
    std::vector<std::pair<std::string, Matrix>> feats;
    for (const auto &spk : m.speakers)
      for (const auto &cid : spk.clip_ids)
        feats.emplace_back(cid, load_cached_features(cfg, cid).values.transpose());
    return feats;
  };

  for (const std::string &route : cfg.eval_routes) {
    const bool mfcc_route = route == "ac";
    std::map<std::string, Vector> embeddings;
    if (!mfcc_route) {
      const std::string path = cfg.embeddings_path(route);
      if (!fs::exists(path))
        throw DataError("missing embeddings " + path + ": run `attrsv extract` first");
      for (auto &[clip, vec] : attrnet::load_embeddings(path)) embeddings[clip] = vec;
    }
    std::vector<std::pair<std::string, Matrix>> train_feats, test_feats;
    if (mfcc_route) {
      train_feats = collect_mfcc(train);
      test_feats = collect_mfcc(test);
    } else {
      auto gather = [&](const corpus::Manifest &m) {
        std::vector<std::pair<std::string, Matrix>> out;
        for (const auto &spk : m.speakers)
          for (const auto &cid : spk.clip_ids) {
            auto it = embeddings.find(cid);
            if (it == embeddings.end())
              throw DataError("embeddings for route '" + route + "' lack clip '" + cid + "'");
            out.emplace_back(cid, it->second);
          }
        return out;
      };
      train_feats = gather(train);
      test_feats = gather(test);
    }

    for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
      const std::string &attr = schema.attributes[a].name;
      const int classes = static_cast<int>(schema.attributes[a].classes.size());

      auto make_examples = [&](const corpus::Manifest &m,
                               const std::vector<std::pair<std::string, Matrix>> &feats) {
        std::vector<attrnet::TrainingExample> ex;
        ex.reserve(feats.size());
        for (const auto &[cid, f] : feats)
          ex.push_back({f, m.owner(cid).labels[a]});
        return ex;
      };
      const auto train_examples = make_examples(train, train_feats);
      const auto test_examples = make_examples(test, test_feats);

      const std::uint64_t net_seed = mix_seed(cfg.seed, fnv1a64("stage1/" + route + "/" + attr));
      attrnet::AttrClassifier net;
      if (mfcc_route) {
        net = attrnet::build_mfcc_tdnn(cfg.mfcc.n_coeffs, classes, cfg.tdnn, net_seed);
      } else {
        net = attrnet::build_embedding_mlp(static_cast<int>(train_feats.front().second.rows()),
                                           classes, cfg.mlp_hidden, net_seed);
      }
      net.attribute = attr;

      attrnet::TrainConfig tc = cfg.stage1_for(attr);
      tc.seed = mix_seed(net_seed, 0x7247);
      net = attrnet::train(std::move(net), train_examples, tc);

      const double train_acc = attrnet::evaluate_accuracy(net, train_examples);
      const double test_acc = attrnet::evaluate_accuracy(net, test_examples);
      const std::string path = cfg.stage1_model_path(route, attr);
      attrnet::save_classifier(path, net, schema_hash);
      artifacts.push_back(path);
      std::cout << "[train-attr] " << route << "/" << attr << ": loss=" << net.meta.final_loss
                << " train_acc=" << train_acc << " heldout_acc=" << test_acc << "\n";
    }
  }
  write_run_record(cfg, "train-attr", artifacts);
}

void run_train_sv(const RunConfig &cfg) {
  auto state = build_inputs(cfg, cfg.eval_routes);
  fs::create_directories(cfg.model_dir);
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> artifacts;

  for (const auto &[route, mode] : grid_cells(cfg)) {
    // One similarity dump per (route, mode); models per stage-2 kind.
    const auto train_set = metrics::similarity_set(state->inputs, route, mode, false);
    std::vector<similarity::DumpRow> rows(train_set.size());
    for (std::size_t i = 0; i < train_set.size(); ++i)
      rows[i] = {state->inputs.train_trials[i].clip_a, state->inputs.train_trials[i].clip_b,
                 train_set[i].target, train_set[i].values};
    const std::string dump_path =
        cfg.similarity_dump_path(route.name(), similarity::mode_name(mode));
    similarity::save_similarity_dump(dump_path, state->inputs.schema.hash(), mode, rows);
    artifacts.push_back(dump_path);

    for (const std::string &kind_name : cfg.eval_models) {
      const auto kind = verifier::kind_from_name(kind_name);
      const auto fit = metrics::fit_stage_two(state->inputs, route, mode, kind);
      const std::string path = cfg.stage2_model_path(
          route.name(), similarity::mode_name(mode), verifier::kind_name(kind));
      verifier::save_model(path, fit.model);
      artifacts.push_back(path);
    }
    std::cout << "[train-sv] " << route.name() << "/" << similarity::mode_name(mode) << ": "
              << cfg.eval_models.size() << " models on " << train_set.size() << " trials\n";
  }
  write_run_record(cfg, "train-sv", artifacts);
}

void run_eval(const RunConfig &cfg, const std::vector<std::string> &attributes_filter) {
  auto state = build_inputs(cfg, cfg.eval_routes);
  const metrics::SystemInputs &inputs = state->inputs;
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> artifacts;

  metrics::Report report;
  report.toolkit_version = kToolkitVersion;
  report.config_fingerprint = cfg.fingerprint();
  report.schema_hash = inputs.schema.hash();
  for (const auto &attr : inputs.schema.attributes)
    report.attribute_names.push_back(attr.name);
  for (const auto &t : inputs.train_trials) (t.target ? report.train_pos : report.train_neg)++;
  for (const auto &t : inputs.test_trials) (t.target ? report.test_pos : report.test_neg)++;

  for (const auto &route : cfg.eval_routes)
    report.accuracy[route] = metrics::route_accuracy(inputs, route);

  if (attributes_filter.empty()) {
    for (const auto &[route, mode] : grid_cells(cfg)) {
      for (const std::string &kind_str : cfg.eval_models) {
        const auto kind = verifier::kind_from_name(kind_str);
        const std::string model_path = cfg.stage2_model_path(
            route.name(), similarity::mode_name(mode), verifier::kind_name(kind));
        if (!fs::exists(model_path))
          throw DataError("missing stage-2 model " + model_path +
                          ": run `attrsv train-sv` first");
        const verifier::StageTwoModel model = verifier::load_model(model_path);
        if (model.schema_hash != inputs.schema.hash())
          throw DataError("stage-2 model " + model_path + " does not match the corpus schema");

        const auto test_set = metrics::similarity_set(inputs, route, mode, true);
        std::vector<double> scores(test_set.size());
        std::vector<int> targets(test_set.size());
        std::vector<std::pair<verifier::TrialScore, int>> dump(test_set.size());
        for (std::size_t i = 0; i < test_set.size(); ++i) {
          scores[i] = verifier::score_values(model, test_set[i].values);
          targets[i] = test_set[i].target;
          dump[i] = {{inputs.test_trials[i], scores[i]}, targets[i]};
        }

        metrics::ReportCell cell;
        cell.route = route.name();
        cell.mode = similarity::mode_name(mode);
        cell.kind = verifier::kind_name(kind);
        cell.eer = metrics::eer_from_scores(scores, targets);
        const std::uint64_t imp_seed =
            mix_seed(mix_seed(cfg.seed, fnv1a64(cell.route + "/" + cell.mode + "/" + cell.kind)),
                     0x1a9);
        const auto imp = verifier::importance(model, test_set, imp_seed);
        cell.importance = imp.weights;
        cell.importance_method = imp.method;
        report.cells.push_back(cell);

        const std::string score_path = cfg.scores_path(cell.route, cell.mode, cell.kind);
        verifier::save_scores(score_path, dump);
        artifacts.push_back(score_path);
        std::cout << "[eval] " << cell.route << "/" << cell.mode << "/" << cell.kind
                  << ": EER=" << cell.eer.eer << "\n";
      }
    }
  }

  // Single-attribute grids (Table 3 shape): groundtruth plus predicted routes
  // under softmax, masked to one attribute at a time.
  std::vector<std::string> single_attrs = attributes_filter;
  if (single_attrs.empty())
    single_attrs = report.attribute_names;
  for (const auto &attr : single_attrs) {
    if (inputs.schema.index_of(attr) < 0)
      throw DataError("eval: unknown attribute '" + attr + "'");
    const auto kind = verifier::kind_from_name(cfg.single_attribute_model);
    {
      metrics::SingleAttrCell cell;
      cell.attribute = attr;
      cell.route = "groundtruth";
      cell.mode = "hard";
      cell.kind = cfg.single_attribute_model;
      cell.eer = metrics::single_attribute_eer(inputs, attr, similarity::Mode::kHard,
                                               metrics::RouteId::groundtruth(), kind);
      report.single_attribute.push_back(cell);
    }
    for (const auto &route : cfg.eval_routes) {
      metrics::SingleAttrCell cell;
      cell.attribute = attr;
      cell.route = route;
      cell.mode = "softmax";
      cell.kind = cfg.single_attribute_model;
      cell.eer = metrics::single_attribute_eer(inputs, attr, similarity::Mode::kSoftmax,
                                               metrics::RouteId::predicted(route), kind);
      report.single_attribute.push_back(cell);
    }
    std::cout << "[eval] single-attribute '" << attr << "' done\n";
  }

  std::string report_path = cfg.report_path();
  if (!attributes_filter.empty()) {
    std::string suffix;
    for (const auto &a : attributes_filter) suffix += "-" + a;
    report_path = (fs::path(cfg.out_dir) / ("report-single" + suffix + ".json")).string();
  }
  write_text_file(report_path, report.to_json_string());
  artifacts.push_back(report_path);
  if (attributes_filter.empty()) {
    write_text_file(cfg.csv_path(), report.to_csv(cfg.eval_routes));
    artifacts.push_back(cfg.csv_path());
  }
  write_run_record(cfg, attributes_filter.empty() ? "eval" : "eval-single", artifacts);
  std::cout << "[eval] report -> " << report_path << "\n";
}

Explanation build_explanation(const RunConfig &cfg, const ExplainRequest &req) {
  const auto route = route_id(req.route);
  const auto mode = similarity::mode_from_name(req.mode);
  const auto kind = verifier::kind_from_name(req.model);
  if (route.kind == metrics::RouteId::kRandom)
    throw ConfigError("explain: the random baseline has no per-trial explanation");

  std::vector<std::string> routes;
  if (route.kind == metrics::RouteId::kPredicted) routes.push_back(route.tag);
  auto state = build_inputs(cfg, routes, /*need_trials=*/false);
  const metrics::SystemInputs &inputs = state->inputs;

  corpus::TrialPair trial{req.clip_a, req.clip_b, false};
  const auto &ma = inputs.test_manifest->speaker_of_clip.count(req.clip_a)
                       ? *inputs.test_manifest
                       : *inputs.train_manifest;
  const auto &mb = inputs.test_manifest->speaker_of_clip.count(req.clip_b)
                       ? *inputs.test_manifest
                       : *inputs.train_manifest;
  trial.target = ma.owner(req.clip_a).speaker_id == mb.owner(req.clip_b).speaker_id;

  const std::string model_path = cfg.stage2_model_path(
      route.name(), similarity::mode_name(mode), verifier::kind_name(kind));
  if (!fs::exists(model_path))
    throw DataError("missing stage-2 model " + model_path + ": run `attrsv train-sv` first");
  const verifier::StageTwoModel model = verifier::load_model(model_path);
  if (model.schema_hash != inputs.schema.hash())
    throw DataError("stage-2 model " + model_path + " does not match the corpus schema");

  if (!fs::exists(cfg.report_path()))
    throw DataError("missing report " + cfg.report_path() + ": run `attrsv eval` first");
  const metrics::Report report =
      metrics::Report::from_json_string(read_text_file(cfg.report_path()));
  if (report.schema_hash != inputs.schema.hash())
    throw DataError("report " + cfg.report_path() + " does not match the corpus schema");

  const metrics::ReportCell *cell = nullptr;
  for (const auto &c : report.cells)
    if (c.route == route.name() && c.mode == similarity::mode_name(mode) &&
        c.kind == verifier::kind_name(kind))
      cell = &c;
  if (!cell)
    throw DataError("report has no cell for " + route.name() + "/" +
                    similarity::mode_name(mode) + "/" + verifier::kind_name(kind) +
                    ": re-run `attrsv eval`");

  const auto sv = metrics::trial_similarity(inputs, route, mode, trial, false, 0);

  Explanation e;
  e.trial = trial;
  e.route = route.name();
  e.mode = similarity::mode_name(mode);
  e.model_kind = verifier::kind_name(kind);
  e.score = verifier::score(model, sv);
  e.threshold = cell->eer.threshold;
  e.decision = e.score >= e.threshold;
  e.linear = kind == verifier::ModelKind::kLinReg || kind == verifier::ModelKind::kLogReg;

  Vector weights;
  if (kind == verifier::ModelKind::kLinReg)
    weights = std::get<verifier::LinRegModel>(model.payload).weights;
  else if (kind == verifier::ModelKind::kLogReg)
    weights = std::get<verifier::LogRegModel>(model.payload).weights;
  if (e.linear) e.intercept = weights[0];
  e.importance_caption =
      e.linear ? "signed contributions sum (plus intercept) to the pre-activation score"
               : "global importance, not per-trial attribution";

  auto class_names = [&](const std::string &clip) {
    std::vector<std::string> names;
    if (route.kind == metrics::RouteId::kGroundtruth) {
      const auto &m = inputs.test_manifest->speaker_of_clip.count(clip)
                          ? *inputs.test_manifest
                          : *inputs.train_manifest;
      const auto &rec = m.owner(clip);
      for (std::size_t a = 0; a < inputs.schema.attributes.size(); ++a)
        names.push_back(inputs.schema.attributes[a].classes[rec.labels[a]]);
    } else {
      const auto &outs = inputs.route_outputs.at(route.tag).at(clip);
      for (std::size_t a = 0; a < inputs.schema.attributes.size(); ++a)
        names.push_back(inputs.schema.attributes[a].classes[outs.classes[a]]);
    }
    return names;
  };
  const auto names_a = class_names(req.clip_a);
  const auto names_b = class_names(req.clip_b);

  for (std::size_t a = 0; a < inputs.schema.attributes.size(); ++a) {
    AttributeExplanation ax;
    ax.name = inputs.schema.attributes[a].name;
    ax.class_a = names_a[a];
    ax.class_b = names_b[a];
    ax.similarity = sv.values[static_cast<Eigen::Index>(a)];
    ax.importance = cell->importance[a];
    if (e.linear) {
      ax.contribution = weights[static_cast<Eigen::Index>(a) + 1] * ax.similarity;
      ax.has_contribution = true;
    }
    e.attributes.push_back(ax);
  }
  return e;
}

std::string render_explanation(const Explanation &e, const std::string &format) {
  if (format == "json") {
    json j;
    j["trial"] = {e.trial.clip_a, e.trial.clip_b};
    j["target"] = e.trial.target ? 1 : 0;
    j["route"] = e.route;
    j["mode"] = e.mode;
    j["model"] = e.model_kind;
    j["score"] = e.score;
    j["threshold"] = e.threshold;
    j["decision"] = e.decision ? "same-speaker" : "different-speaker";
    j["importance_caption"] = e.importance_caption;
    if (e.linear) j["intercept"] = e.intercept;
    json attrs = json::array();
    for (const auto &a : e.attributes) {
      json ja;
      ja["attribute"] = a.name;
      ja["class_a"] = a.class_a;
      ja["class_b"] = a.class_b;
      ja["similarity"] = a.similarity;
      ja["importance"] = a.importance;
      if (a.has_contribution) ja["contribution"] = a.contribution;
      attrs.push_back(ja);
    }
    j["attributes"] = attrs;
    return j.dump(2) + "\n";
  }
  if (format != "text") throw ConfigError("explain: unknown format '" + format + "'");

  std::vector<const AttributeExplanation *> order;
  for (const auto &a : e.attributes) order.push_back(&a);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto *x, const auto *y) { return x->similarity < y->similarity; });

  std::ostringstream o;
  o << "trial " << e.trial.clip_a << " vs " << e.trial.clip_b << "  (" << e.route << ", "
    << e.mode << " labels, " << e.model_kind << ")\n";
  o << "score " << e.score << "  threshold " << e.threshold << "  -> "
    << (e.decision ? "same-speaker" : "different-speaker") << "\n";
  o << "attributes (least similar first):\n";
  for (const auto *a : order) {
    o << "  " << a->name << ": " << a->class_a << " vs " << a->class_b
      << "  similarity=" << a->similarity << "  importance=" << a->importance;
    if (a->has_contribution) o << "  contribution=" << a->contribution;
    o << "\n";
  }
  if (e.linear) o << "intercept " << e.intercept << "\n";
  o << "note: " << e.importance_caption << "\n";
  return o.str();
}

}  // namespace attrsv::cli
