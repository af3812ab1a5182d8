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

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include "xmtc/config.hpp"
#include "xmtc/corpus.hpp"
#include "xmtc/embed.hpp"
#include "xmtc/labelgraph.hpp"

namespace xmtc {

/// File names inside the work directory.
namespace artifact {
inline constexpr std::string_view train = "train.xmc";
inline constexpr std::string_view test = "test.xmc";
inline constexpr std::string_view train_corpus = "train_corpus.txt";
inline constexpr std::string_view test_corpus = "test_corpus.txt";
inline constexpr std::string_view planted_clusters = "planted_clusters.tsv";
inline constexpr std::string_view label_graph = "label_graph.txt";
inline constexpr std::string_view embeddings = "label_embeddings.txt";
inline constexpr std::string_view clusters = "clusters.tsv";
inline constexpr std::string_view matcher = "matcher.ckpt";
inline constexpr std::string_view rankers = "rankers.txt";
inline constexpr std::string_view predictions = "predictions.txt";
inline constexpr std::string_view report = "report.txt";
inline constexpr std::string_view report_kv = "report.kv";
inline constexpr std::string_view label_histogram = "label_histogram.tsv";
inline constexpr std::string_view cluster_histogram = "cluster_histogram.tsv";
}  // namespace artifact

/// Exclusive claim on a work directory, released on destruction.
class WorkDirLock {
 public:
  explicit WorkDirLock(const std::filesystem::path& work_dir);
  ~WorkDirLock();
  WorkDirLock(const WorkDirLock&) = delete;
  WorkDirLock& operator=(const WorkDirLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Loads a corpus and renames its documents "<prefix>-<line>" so train and
/// test ids stay distinct for precomputed embeddings.
TextCorpus load_corpus(const std::filesystem::path& path, std::string_view prefix);

/// Precomputed vectors when configured, otherwise tf-idf fitted on the
/// training corpus.
std::unique_ptr<EmbeddingProvider> make_embedding(const PipelineConfig& config,
                                                  const TextCorpus& train_corpus);

/// Filtered label embeddings G^k Z, exact or neighbour-sampled.
Eigen::MatrixXd filtered_label_embeddings(const LabelGraph& graph, const Dataset& train,
                                          const Eigen::MatrixXd& instance_embeddings,
                                          const LabelGraphConfig& config);

/// Mini-batch k-means over `restarts` seeds; the lowest inertia wins.
LabelClusters cluster_labels(const Eigen::MatrixXd& label_embeddings,
                             const LabelGraphConfig& config);

// Stages. Each reads its inputs from the work directory, writes its
// outputs there and prints a one-line summary to `log`.
void run_synth(const PipelineConfig& config, std::ostream& log);
void run_ingest(const PipelineConfig& config, std::ostream& log);
void run_build_label_graph(const PipelineConfig& config, std::ostream& log);
void run_cluster(const PipelineConfig& config, std::ostream& log);
void run_train_matcher(const PipelineConfig& config, std::ostream& log);
void run_train_rankers(const PipelineConfig& config, std::ostream& log);
void run_predict(const PipelineConfig& config, std::ostream& log);
void run_evaluate(const PipelineConfig& config, std::ostream& log);
/// Dataset statistics for the configured (or ingested) train/test files,
/// plus label and cluster instance histograms.
void run_stats(const PipelineConfig& config, std::ostream& log);

}  // namespace xmtc
