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

#ifndef MICROEST_MODEL_CONFIG_H_
#define MICROEST_MODEL_CONFIG_H_

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace microest {

enum class ModelKind { kNaiveBayes, kDecisionTree, kRandomForest, kGbt, kGlm };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

// Hyperparameters named after the usual H2O-style knobs. Unset values take
// the per-kind defaults below; setting a parameter the kind does not use is
// an InvalidConfig error.
//
//   naive_bayes    nbins(10)
//   decision_tree  max_depth(10) nbins(32) min_rows(1)
//   random_forest  ntrees(50) max_depth(20) nbins(20) sample_rate(0.632)
//                  col_sample_rate_per_tree(1) min_rows(1)
//   gbt            ntrees(50) max_depth(5) nbins(20) sample_rate(1)
//                  col_sample_rate_per_tree(1) learning_rate(0.1) min_rows(10)
//   glm            alpha(0.5) lambda(chosen by 3-fold cross-validation)
struct ModelConfig {
  ModelKind kind = ModelKind::kGlm;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<int> ntrees;
  std::optional<int> max_depth;
  std::optional<int> nbins;
  std::optional<double> sample_rate;
  std::optional<double> col_sample_rate_per_tree;
  std::optional<double> learning_rate;
  std::optional<int> min_rows;

  void validate() const;

  // Effective values after defaults.
  double alpha_or_default() const { return alpha.value_or(0.5); }
  int ntrees_or_default() const;
  int max_depth_or_default() const;
  int nbins_or_default() const;
  double sample_rate_or_default() const;
  double col_sample_rate_or_default() const { return col_sample_rate_per_tree.value_or(1.0); }
  double learning_rate_or_default() const { return learning_rate.value_or(0.1); }
  int min_rows_or_default() const;

  // Sets a parameter by its name, e.g. "ntrees"; value must be a number.
  void set(std::string_view param, const nlohmann::json& value);
  static bool is_meaningful(ModelKind kind, std::string_view param);

  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace microest

#endif  // MICROEST_MODEL_CONFIG_H_
