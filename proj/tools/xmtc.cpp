// Copyright 2026 The xmtc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: one subcommand per pipeline stage.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "xmtc/config.hpp"
#include "xmtc/error.hpp"
#include "xmtc/pipeline.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDependencyError = 3,
  kDataError = 4,
};

using Stage = std::function<void(const xmtc::PipelineConfig&, std::ostream&)>;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-cluster matching pipeline for extreme multi-label text classification"};
  app.require_subcommand(1, 1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "INI configuration file")->required();

  const std::map<std::string, std::pair<Stage, std::string>> stages = {
      {"synth", {xmtc::run_synth, "generate a synthetic dataset into the work dir"}},
      {"ingest", {xmtc::run_ingest, "validate dataset and corpus files and copy them into the work dir"}},
      {"build-label-graph", {xmtc::run_build_label_graph, "label correlation graph and filtered label embeddings"}},
      {"cluster", {xmtc::run_cluster, "mini-batch k-means over the label embeddings"}},
      {"train-matcher", {xmtc::run_train_matcher, "train the bilateral GIN cluster matcher"}},
      {"train-rankers", {xmtc::run_train_rankers, "train per-label logistic classifiers"}},
      {"predict", {xmtc::run_predict, "rank labels for the test corpus"}},
      {"evaluate", {xmtc::run_evaluate, "P@k, nDCG@k, PSP@k and PSnDCG@k of the predictions"}},
      {"stats", {xmtc::run_stats, "dataset statistics and instance histograms"}},
  };
  for (const auto& [name, stage] : stages) app.add_subcommand(name, stage.second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const xmtc::PipelineConfig config = xmtc::load_config(config_path);
    const std::string name = app.get_subcommands().front()->get_name();
    stages.at(name).first(config, std::cout);
    return kOk;
  } catch (const xmtc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const xmtc::DependencyError& e) {
    std::cerr << "dependency error: " << e.what() << '\n';
    return kDependencyError;
  } catch (const xmtc::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
