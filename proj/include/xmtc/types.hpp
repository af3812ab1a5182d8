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
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace xmtc {

using Index = Eigen::Index;
using LabelId = std::int32_t;

/// Sorted, duplicate-free label ids of one instance.
using LabelSet = std::vector<LabelId>;

/// Row-major sparse matrix; one row per instance.
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseMatrixD = Eigen::SparseMatrix<double>;
using FeatureVector = Eigen::SparseVector<double>;

using Counts = Eigen::Matrix<Index, Eigen::Dynamic, 1>;

struct ScoredLabel {
  LabelId label = 0;
  double score = 0.0;
  friend bool operator==(const ScoredLabel&, const ScoredLabel&) = default;
};

struct ScoredCluster {
  Index cluster = 0;
  double score = 0.0;
};

/// Work counters filled during prediction.
struct PredictionCost {
  Index cluster_dot_products = 0;
  Index classifier_evaluations = 0;
};

}  // namespace xmtc
