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

#ifndef MICROEST_ENSEMBLE_H_
#define MICROEST_ENSEMBLE_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "microest/classifier.h"
#include "microest/labeled_example.h"
#include "microest/metrics.h"
#include "microest/model_config.h"

namespace microest {

enum class EnsembleMethod { kBagging, kBoosting, kStacking };
enum class Combiner { kAverage, kMajorityVote, kWeightedVote };

std::string_view to_string(EnsembleMethod m);
std::string_view to_string(Combiner c);
EnsembleMethod parse_ensemble_method(std::string_view text);
Combiner parse_combiner(std::string_view text);

// bagging: one member per base config, each on its own bootstrap sample.
// boosting: a single gbt base config (an empty list means the gbt defaults).
// stacking: base configs plus a meta learner fit on out-of-fold predictions.
struct EnsembleSpec {
  EnsembleMethod method = EnsembleMethod::kStacking;
  std::vector<ModelConfig> base_configs;
  Combiner combiner = Combiner::kAverage;  // bagging only
  std::optional<ModelConfig> meta_config;  // stacking only
  int n_folds = 5;                         // stacking only

  // InvalidSpec on a malformed combination; InvalidConfig from the configs.
  void validate() const;
  bool operator==(const EnsembleSpec&) const = default;
};

void to_json(nlohmann::json& j, const EnsembleSpec& s);
void from_json(const nlohmann::json& j, EnsembleSpec& s);

// Two random forests, three gbts and an unpenalized-ridge glm under a glm
// meta learner (alpha 0.5).
EnsembleSpec default_stacking_spec();
EnsembleSpec default_spec(EnsembleMethod method);

class EnsembleModel final : public Predictor {
 public:
  EnsembleModel(EnsembleMethod method, Combiner combiner, uint64_t seed,
                std::vector<ModelPtr> members, std::vector<double> weights, ModelPtr meta);

  EnsembleMethod method() const { return method_; }
  Combiner combiner() const { return combiner_; }
  uint64_t seed() const { return seed_; }
  const std::vector<ModelPtr>& members() const { return members_; }
  // Bagging vote weights (1 for the other combiners).
  const std::vector<double>& weights() const { return weights_; }
  const ModelPtr& meta() const { return meta_; }

  std::vector<double> member_probabilities(std::span<const double> x) const;

  size_t feature_count() const override;
  nlohmann::json to_json() const override;
  static std::shared_ptr<const EnsembleModel> from_json(const nlohmann::json& j);

 protected:
  double do_predict(std::span<const double> x) const override;

 private:
  EnsembleMethod method_;
  Combiner combiner_;
  uint64_t seed_;
  std::vector<ModelPtr> members_;
  std::vector<double> weights_;
  ModelPtr meta_;
};

using EnsemblePtr = std::shared_ptr<const EnsembleModel>;

EnsemblePtr train_ensemble(const EnsembleSpec& spec, std::span<const LabeledExample> train,
                           uint64_t seed);

// Row indices drawn with replacement, redrawn until both classes appear.
// Bagging member i uses bootstrap_rows(train, bagging_seed(seed, i, 0)) and
// fits with bagging_seed(seed, i, 1).
std::vector<uint32_t> bootstrap_rows(std::span<const LabeledExample> train, uint64_t seed);
uint64_t bagging_seed(uint64_t seed, size_t member, uint64_t purpose);

// Out-of-fold bookkeeping for stacking.
struct StackingFolds {
  std::vector<int> fold_of;                      // fold of each training row
  std::vector<std::vector<uint32_t>> fit_rows;   // rows each fold's bases were fit on
  std::vector<std::vector<double>> oof;          // [row][base] held-out probability
};

// Stratified assignment: each class is shuffled and dealt round-robin.
StackingFolds stacking_out_of_fold(const EnsembleSpec& spec,
                                   std::span<const LabeledExample> train, uint64_t seed);

// Parameter grid. Keys look like "<target>.<param>" where target is
//   base        every base config that uses the parameter
//   base[i]     the i-th base config
//   <kind>      every base config of that kind, e.g. "gbt.ntrees"
//   meta        the meta learner
//   ensemble    "combiner" or "n_folds"
// Points enumerate with the last axis varying fastest; no axes is one point.
struct ParamGrid {
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;

  size_t size() const;
  // EmptyGrid when some axis has no values.
  std::vector<nlohmann::json> points() const;
};

void to_json(nlohmann::json& j, const ParamGrid& g);
void from_json(const nlohmann::json& j, ParamGrid& g);

EnsembleSpec apply_params(const EnsembleSpec& base, const nlohmann::json& point);

struct MethodGrid {
  EnsembleSpec base;
  ParamGrid grid;
};

struct GridPoint {
  nlohmann::json params;
  EnsembleSpec spec;
  Metrics metrics;
};

struct GridSearchResult {
  EnsembleSpec best;
  size_t best_index = 0;
  std::vector<GridPoint> table;
};

// Trains one ensemble per grid point and keeps the best validation F1;
// ties go to the earliest point.
GridSearchResult grid_search(const MethodGrid& grid, std::span<const LabeledExample> train,
                             std::span<const LabeledExample> valid, uint64_t seed);

struct MethodComparison {
  EnsembleSpec best;
  size_t best_index = 0;
  std::vector<GridSearchResult> per_method;  // in input order

  const Metrics& metrics(size_t i) const {
    return per_method[i].table[per_method[i].best_index].metrics;
  }
};

// Grid-searches every method and keeps the champion with the highest F1;
// ties go to the earlier method.
MethodComparison select_best_method(const std::vector<MethodGrid>& grids,
                                    std::span<const LabeledExample> train,
                                    std::span<const LabeledExample> valid, uint64_t seed);

// model,accuracy,precision,recall,F1-measure
void write_comparison_csv(std::ostream& out, const MethodComparison& cmp);
nlohmann::json comparison_json(const MethodComparison& cmp);

// Loads either a single model or an ensemble.
PredictorPtr load_predictor(const nlohmann::json& j);

inline constexpr const char* kEnsembleFormat = "microest-ensemble";

}  // namespace microest

#endif  // MICROEST_ENSEMBLE_H_
