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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "xmtc/keygraph.hpp"
#include "xmtc/matcher.hpp"
#include "xmtc/rank.hpp"
#include "xmtc/synth.hpp"

namespace xmtc {

struct PathsConfig {
  std::filesystem::path train;         // xmc dataset files, used by ingest and stats
  std::filesystem::path test;
  std::filesystem::path train_corpus;  // tab-separated sentence corpora
  std::filesystem::path test_corpus;
  std::filesystem::path embeddings;    // optional precomputed vectors
  std::filesystem::path work_dir = "work";
};

struct EmbeddingConfig {
  Index dimension = 128;
  std::uint64_t seed = 7;
};

struct LabelGraphConfig {
  double rho = 0.4;
  double tau = 0.2;
  int order = 3;              // filter power k
  Index clusters = 0;         // K; 0 picks max(2, floor(L / 60))
  Index batch_size = 256;     // k-means and sampled-filter batch
  Index sample_size = 0;      // neighbours per hop; 0 filters exactly
  Index iterations = 100;     // k-means mini-batch steps T
  Index restarts = 5;         // k-means seeds tried; lowest inertia kept
  std::uint64_t seed = 0;
};

struct RankerConfig {
  LogisticOptions logistic;
  Index top_b = 5;
  Index top_k = 5;  // labels written per prediction
  ScoreMode mode = ScoreMode::mixture;
};

struct MetricsConfig {
  double a = 0.55;
  double b = 1.5;
};

struct SynthConfig {
  SynthSpec spec;
  double test_fraction = 0.2;
};

struct PipelineConfig {
  PathsConfig paths;
  EmbeddingConfig embedding;
  LabelGraphConfig labelgraph;
  GraphBuildOptions keygraph;
  MatcherConfig matcher;
  RankerConfig ranker;
  MetricsConfig metrics;
  SynthConfig synth;

  /// Range checks for every numeric field; throws ConfigError naming the
  /// offending "section.key".
  void validate() const;
};

/// INI text with [paths], [embedding], [labelgraph], [keygraph], [matcher],
/// [ranker], [metrics] and [synth] sections. Absent keys keep defaults;
/// unknown sections or keys are rejected. Relative paths resolve against
/// `base_dir`.
PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace xmtc
