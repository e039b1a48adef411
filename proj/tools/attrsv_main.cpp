// tools/attrsv_main.cpp

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

#include <CLI11.hpp>

#include <iostream>

#include "attrsv/commands.hpp"
#include "attrsv/config.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  long long seed = -1;
  int jobs = 0;
};

void add_common(CLI::App *cmd, CommonOpts &opts) {
  cmd->add_option("-c,--config", opts.config_path, "run configuration (TOML)")
      ->required();
  cmd->add_option("--set", opts.overrides,
                  "override a config key, e.g. --set stage1.iterations=800");
  cmd->add_option("--seed", opts.seed, "override the global seed");
  cmd->add_option("--jobs", opts.jobs, "worker pool size for extraction/scoring");
}

attrsv::cli::RunConfig load(const CommonOpts &opts) {
  std::vector<std::string> overrides = opts.overrides;
  if (opts.seed >= 0) overrides.push_back("seed=" + std::to_string(opts.seed));
  if (opts.jobs > 0) overrides.push_back("jobs=" + std::to_string(opts.jobs));
  return attrsv::cli::load_config(opts.config_path, overrides);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"attrsv: attribute-based explainable speaker verification toolkit"};
  app.require_subcommand(1);

  std::string init_path = "attrsv.toml";
  CLI::App *init = app.add_subcommand("init", "write a config file with every default");
  init->add_option("path", init_path, "where to write the config");

  CommonOpts synth_opts, extract_opts, trials_opts, train_attr_opts, train_sv_opts,
      eval_opts, explain_opts;
  CLI::App *synth = app.add_subcommand("synth", "generate the synthetic corpus");
  add_common(synth, synth_opts);
  CLI::App *extract =
      app.add_subcommand("extract", "compute MFCC caches and synthetic embeddings");
  add_common(extract, extract_opts);
  CLI::App *trials = app.add_subcommand("make-trials", "sample train/test trial lists");
  add_common(trials, trials_opts);
  CLI::App *train_attr =
      app.add_subcommand("train-attr", "train stage-1 attribute classifiers");
  add_common(train_attr, train_attr_opts);
  CLI::App *train_sv = app.add_subcommand("train-sv", "train stage-2 verification models");
  add_common(train_sv, train_sv_opts);

  CLI::App *eval = app.add_subcommand("eval", "evaluate the EER grid and write the report");
  add_common(eval, eval_opts);
  std::vector<std::string> eval_attributes;
  eval->add_option("--attributes", eval_attributes,
                   "restrict to single-attribute grids for these attributes");

  CLI::App *explain = app.add_subcommand("explain", "explain one verification decision");
  add_common(explain, explain_opts);
  attrsv::cli::ExplainRequest req;
  explain->add_option("--clip-a", req.clip_a, "first clip id")->required();
  explain->add_option("--clip-b", req.clip_b, "second clip id")->required();
  explain->add_option("--route", req.route, "stage-1 route (groundtruth or a predicted tag)");
  explain->add_option("--mode", req.mode, "similarity mode: hard | softmax");
  explain->add_option("--model", req.model,
                      "stage-2 kind: linreg | logreg | random-forest | neural-net");
  explain->add_option("--format", req.format, "text | json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) ? kExitConfig : 0;
  }

  try {
    if (init->parsed()) {
      attrsv::cli::run_init(init_path);
    } else if (synth->parsed()) {
      attrsv::cli::run_synth(load(synth_opts));
    } else if (extract->parsed()) {
      attrsv::cli::run_extract(load(extract_opts));
    } else if (trials->parsed()) {
      attrsv::cli::run_make_trials(load(trials_opts));
    } else if (train_attr->parsed()) {
      attrsv::cli::run_train_attr(load(train_attr_opts));
    } else if (train_sv->parsed()) {
      attrsv::cli::run_train_sv(load(train_sv_opts));
    } else if (eval->parsed()) {
      attrsv::cli::run_eval(load(eval_opts), eval_attributes);
    } else if (explain->parsed()) {
      std::cout << attrsv::cli::render_explanation(
          attrsv::cli::build_explanation(load(explain_opts), req), req.format);
    }
  } catch (const attrsv::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const attrsv::DataError &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const attrsv::NumericError &e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
