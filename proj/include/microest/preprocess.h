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

#ifndef MICROEST_PREPROCESS_H_
#define MICROEST_PREPROCESS_H_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "microest/binning.h"
#include "microest/dataset.h"
#include "microest/shingle.h"

namespace microest {

// Replaces each missing continuous value with the mean of the non-missing
// values that share its `category_feature` value. Categories without any
// observed value (and rows whose category is itself missing) fall back to the
// column mean.
TabularDataset impute_missing(const TabularDataset& ds,
                              std::string_view category_feature);

// The first categorical feature with role common, or empty if none.
std::string default_impute_category(const TabularDataset& ds);

// Adjusted Fisher-Pearson sample skewness G1 = g1 * sqrt(n(n-1)) / (n-2).
// Zero for n < 3 or zero variance.
double skewness(std::span<const double> values);

struct SkewNormalization {
  TabularDataset data;
  std::vector<std::string> transformed;  // schema order
};

// log1p-transforms every continuous column whose skewness exceeds the
// threshold. Id and label columns are never touched.
SkewNormalization normalize_skewed(const TabularDataset& ds, double skew_threshold);

struct RedundancyReduction {
  TabularDataset data;
  std::vector<std::string> dropped;
};

// Drops zero-variance columns (continuous with one distinct value,
// categorical with at most one level) and, walking the schema in order, any
// continuous column whose absolute Pearson correlation with an already kept
// column exceeds `correlation_threshold`. Id, label and `keep` columns stay.
RedundancyReduction drop_redundant(const TabularDataset& ds,
                                   double correlation_threshold,
                                   const std::vector<std::string>& keep = {});

TabularDataset drop_features(const TabularDataset& ds,
                             const std::vector<std::string>& names);

// Open-domain to support-domain value aliases plus per-feature binning for
// continuous common features.
struct Canonicalization {
  std::map<std::string, std::map<std::string, std::string>> aliases;
  std::map<std::string, Binning> binning;

  void add_alias(const std::string& feature, const std::string& from,
                 const std::string& to) {
    aliases[feature][from] = to;
  }
  std::string canonical(const std::string& feature, const std::string& raw) const;
};

std::vector<FeatureSpec> common_features(const std::vector<FeatureSpec>& schema);

// One `feature=value` token per common feature with a non-missing value.
ShingleSet tokenize_common(const Record& r, std::span<const FeatureSpec> common,
                           const Canonicalization& canon);

// Adds quantile binning (support-side values) for each continuous common
// feature that has no declared binning yet.
void fit_common_binning(Canonicalization& canon, const TabularDataset& support,
                        std::span<const FeatureSpec> common, size_t bins);

}  // namespace microest

#endif  // MICROEST_PREPROCESS_H_
