// Copyright 2026 The Microest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MICROEST_SRC_TREE_H_
#define MICROEST_SRC_TREE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "microest/labeled_example.h"
#include "microest/rng.h"

namespace microest::detail {

// Histogram view of a feature matrix: each value is replaced by the index of
// its quantile bin. Column-major.
class BinnedMatrix {
 public:
  BinnedMatrix(std::span<const LabeledExample> examples, size_t nbins);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  uint16_t bin(size_t row, size_t col) const { return bins_[col * rows_ + row]; }
  size_t bin_count(size_t col) const { return cuts_[col].size() + 1; }
  size_t max_bin_count() const;
  // x <= threshold(col, b) exactly when x falls in a bin <= b.
  double threshold(size_t col, size_t b) const { return cuts_[col][b]; }

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<std::vector<double>> cuts_;
  std::vector<uint16_t> bins_;
};

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int32_t left = -1;
  int32_t right = -1;
  double value = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  nlohmann::json to_json() const;
  static Tree from_json(const nlohmann::json& j);
};

// kGini: stat_a = weight, stat_b = weight * label; leaves hold the weighted
// positive fraction. kNewton: stat_a = gradient, stat_b = hessian; leaves
// hold -G / (H + lambda).
enum class SplitCriterion { kGini, kNewton };

struct TreeParams {
  int max_depth = 10;
  size_t min_rows = 1;
  size_t mtries = 0;  // features drawn per split; 0 = all allowed features
  double newton_lambda = 1.0;
};

// Grows one tree over `rows` (indices into `x`, repeats allowed) using only
// the `features` columns. Adds each split's gain to (*importance)[feature]
// when importance is non-null.
Tree grow_tree(const BinnedMatrix& x, std::vector<uint32_t> rows,
               std::span<const double> stat_a, std::span<const double> stat_b,
               std::span<const uint32_t> features, const TreeParams& params,
               SplitCriterion criterion, Rng& rng, std::vector<double>* importance);

}  // namespace microest::detail

#endif  // MICROEST_SRC_TREE_H_
