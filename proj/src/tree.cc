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

#include "tree.h"

#include <algorithm>

#include "microest/binning.h"
#include "microest/error.h"

namespace microest::detail {

BinnedMatrix::BinnedMatrix(std::span<const LabeledExample> examples, size_t nbins)
    : rows_(examples.size()), cols_(examples.empty() ? 0 : examples[0].features.size()) {
  cuts_.resize(cols_);
  bins_.resize(rows_ * cols_);
  std::vector<double> column(rows_);
  for (size_t c = 0; c < cols_; ++c) {
    for (size_t r = 0; r < rows_; ++r) column[r] = examples[r].features[c];
    cuts_[c] = fit_quantile_binning(column, nbins).cuts;
    const auto& cuts = cuts_[c];
    for (size_t r = 0; r < rows_; ++r) {
      bins_[c * rows_ + r] = static_cast<uint16_t>(
          std::lower_bound(cuts.begin(), cuts.end(), column[r]) - cuts.begin());
    }
  }
}

size_t BinnedMatrix::max_bin_count() const {
  size_t m = 1;
  for (const auto& c : cuts_) m = std::max(m, c.size() + 1);
  return m;
}

double Tree::predict(std::span<const double> x) const {
  int32_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[i].value;
}

nlohmann::json Tree::to_json() const {
  // Parallel arrays keep saved forests compact.
  std::vector<int32_t> feature, left, right;
  std::vector<double> threshold, value;
  for (const auto& n : nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value}};
}

Tree Tree::from_json(const nlohmann::json& j) {
  auto feature = j.at("feature").get<std::vector<int32_t>>();
  auto threshold = j.at("threshold").get<std::vector<double>>();
  auto left = j.at("left").get<std::vector<int32_t>>();
  auto right = j.at("right").get<std::vector<int32_t>>();
  auto value = j.at("value").get<std::vector<double>>();
  const size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
      value.size() != n) {
    throw Error(ErrorCode::kParseError, "malformed tree");
  }
  Tree t;
  t.nodes.resize(n);
  for (size_t i = 0; i < n; ++i) {
    t.nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
    if (feature[i] >= 0 && (left[i] <= static_cast<int32_t>(i) || right[i] <= static_cast<int32_t>(i) ||
                            left[i] >= static_cast<int32_t>(n) || right[i] >= static_cast<int32_t>(n))) {
      throw Error(ErrorCode::kParseError, "malformed tree links");
    }
  }
  return t;
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const BinnedMatrix& x, std::span<const double> a, std::span<const double> b,
             std::span<const uint32_t> features, const TreeParams& params,
             SplitCriterion criterion, Rng& rng, std::vector<double>* importance)
      : x_(x),
        a_(a),
        b_(b),
        features_(features.begin(), features.end()),
        params_(params),
        criterion_(criterion),
        rng_(rng),
        importance_(importance) {
    const size_t m = x.max_bin_count();
    ha_.assign(m, 0.0);
    hb_.assign(m, 0.0);
    hn_.assign(m, 0);
  }

  Tree grow(std::vector<uint32_t> rows) {
    rows_ = std::move(rows);
    tree_.nodes.clear();
    tree_.nodes.emplace_back();
    build(0, 0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    double gain = 0;
    uint32_t feature = 0;
    uint16_t bin = 0;
    bool found = false;
  };

  double node_score(double sa, double sb) const {
    if (criterion_ == SplitCriterion::kGini) {
      // Weighted Gini impurity W * 2p(1-p), negated so larger is better.
      if (sa <= 0) return 0.0;
      return -2.0 * sb * (sa - sb) / sa;
    }
    return sa * sa / (sb + params_.newton_lambda);
  }

  double leaf_value(double sa, double sb) const {
    if (criterion_ == SplitCriterion::kGini) return sa > 0 ? sb / sa : 0.0;
    return -sa / (sb + params_.newton_lambda);
  }

  void build(size_t node, size_t begin, size_t end, int depth) {
    double sa = 0, sb = 0;
    for (size_t i = begin; i < end; ++i) {
      sa += a_[rows_[i]];
      sb += b_[rows_[i]];
    }
    tree_.nodes[node].value = leaf_value(sa, sb);
    const size_t n = end - begin;
    if (depth >= params_.max_depth || n < 2 * params_.min_rows) return;
    if (criterion_ == SplitCriterion::kGini &&
        (sb <= 1e-12 * sa || sa - sb <= 1e-12 * sa)) {
      return;
    }

    Split best = find_split(begin, end, sa, sb);
    if (!best.found) return;

    auto mid = std::partition(rows_.begin() + begin, rows_.begin() + end,
                              [&](uint32_t r) { return x_.bin(r, best.feature) <= best.bin; });
    const size_t split = static_cast<size_t>(mid - rows_.begin());
    if (importance_) (*importance_)[best.feature] += best.gain;

    const int32_t left = static_cast<int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const int32_t right = static_cast<int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    TreeNode& nd = tree_.nodes[node];
    nd.feature = static_cast<int32_t>(best.feature);
    nd.threshold = x_.threshold(best.feature, best.bin);
    nd.left = left;
    nd.right = right;
    build(static_cast<size_t>(left), begin, split, depth + 1);
    build(static_cast<size_t>(right), split, end, depth + 1);
  }

  Split find_split(size_t begin, size_t end, double sa, double sb) {
    std::span<const uint32_t> candidates(features_);
    if (params_.mtries > 0 && params_.mtries < features_.size()) {
      scratch_features_ = features_;
      for (size_t k = 0; k < params_.mtries; ++k) {
        size_t j = k + uniform_index(rng_, scratch_features_.size() - k);
        std::swap(scratch_features_[k], scratch_features_[j]);
      }
      std::sort(scratch_features_.begin(), scratch_features_.begin() + params_.mtries);
      candidates = std::span<const uint32_t>(scratch_features_.data(), params_.mtries);
    }

    const double parent = node_score(sa, sb);
    const size_t n = end - begin;
    Split best;
    for (uint32_t f : candidates) {
      touched_.clear();
      for (size_t i = begin; i < end; ++i) {
        const uint32_t r = rows_[i];
        const uint16_t bin = x_.bin(r, f);
        if (hn_[bin]++ == 0) touched_.push_back(bin);
        ha_[bin] += a_[r];
        hb_[bin] += b_[r];
      }
      if (touched_.size() > 1) {
        std::sort(touched_.begin(), touched_.end());
        double la = 0, lb = 0;
        size_t ln = 0;
        for (size_t k = 0; k + 1 < touched_.size(); ++k) {
          const uint16_t bin = touched_[k];
          la += ha_[bin];
          lb += hb_[bin];
          ln += hn_[bin];
          if (ln < params_.min_rows) continue;
          if (n - ln < params_.min_rows) break;
          const double gain = node_score(la, lb) + node_score(sa - la, sb - lb) - parent;
          const double tol = 1e-12 * (1.0 + std::abs(parent));
          // Gini nodes that are still impure split even at zero gain (XOR roots).
          if (gain > best.gain + tol ||
              (!best.found && criterion_ == SplitCriterion::kGini && gain >= -tol)) {
            best = {gain, f, bin, true};
          }
        }
      }
      for (uint16_t bin : touched_) {
        ha_[bin] = 0;
        hb_[bin] = 0;
        hn_[bin] = 0;
      }
    }
    return best;
  }

  const BinnedMatrix& x_;
  std::span<const double> a_;
  std::span<const double> b_;
  std::vector<uint32_t> features_;
  std::vector<uint32_t> scratch_features_;
  TreeParams params_;
  SplitCriterion criterion_;
  Rng& rng_;
  std::vector<double>* importance_;

  std::vector<uint32_t> rows_;
  Tree tree_;
  std::vector<double> ha_, hb_;
  std::vector<uint32_t> hn_;
  std::vector<uint16_t> touched_;
};

}  // namespace

Tree grow_tree(const BinnedMatrix& x, std::vector<uint32_t> rows,
               std::span<const double> stat_a, std::span<const double> stat_b,
               std::span<const uint32_t> features, const TreeParams& params,
               SplitCriterion criterion, Rng& rng, std::vector<double>* importance) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot grow a tree on no rows");
  TreeGrower grower(x, stat_a, stat_b, features, params, criterion, rng, importance);
  return grower.grow(std::move(rows));
}

}  // namespace microest::detail
