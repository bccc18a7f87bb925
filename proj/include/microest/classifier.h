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

#ifndef MICROEST_CLASSIFIER_H_
#define MICROEST_CLASSIFIER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "microest/labeled_example.h"
#include "microest/metrics.h"
#include "microest/model_config.h"

namespace microest {

// Anything that maps a feature vector to P(positive). Implementations are
// immutable after construction, so shared instances may be queried from any
// number of threads.
class Predictor {
 public:
  virtual ~Predictor() = default;

  // Throws DimensionMismatch when x has the wrong length.
  double predict_proba(std::span<const double> x) const;
  std::vector<double> predict_proba(std::span<const LabeledExample> examples) const;

  virtual size_t feature_count() const = 0;
  // Self-describing document understood by load_predictor().
  virtual nlohmann::json to_json() const = 0;

 protected:
  virtual double do_predict(std::span<const double> x) const = 0;
};

using PredictorPtr = std::shared_ptr<const Predictor>;

class ClassifierModel : public Predictor {
 public:
  ClassifierModel(ModelKind kind, size_t feature_count, uint64_t seed)
      : kind_(kind), feature_count_(feature_count), seed_(seed) {}

  ModelKind kind() const { return kind_; }
  uint64_t seed() const { return seed_; }
  size_t feature_count() const override { return feature_count_; }

 protected:
  nlohmann::json header() const;

 private:
  ModelKind kind_;
  size_t feature_count_;
  uint64_t seed_;
};

using ModelPtr = std::shared_ptr<const ClassifierModel>;

// Fits one base learner. Examples must be labeled (unlabeled ones are an
// InvalidArgument error) with at least one example of each class.
ModelPtr fit(const ModelConfig& config, std::span<const LabeledExample> train,
             uint64_t seed);

// Logistic model with explicit coefficients; also what fit() returns for glm.
class GlmModel final : public ClassifierModel {
 public:
  GlmModel(std::vector<double> coefficients, double intercept, double alpha,
           double lambda, uint64_t seed = 0);

  const std::vector<double>& coefficients() const { return coefficients_; }
  double intercept() const { return intercept_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  double l1_norm() const;
  nlohmann::json to_json() const override;

 protected:
  double do_predict(std::span<const double> x) const override;

 private:
  std::vector<double> coefficients_;
  double intercept_;
  double alpha_;
  double lambda_;
};

// Elastic-net logistic regression at a fixed penalty strength `lambda`:
// minimizes mean weighted log-loss + lambda * (alpha |b|_1 + (1-alpha)/2 |b|_2^2)
// by coordinate descent on iteratively reweighted least squares.
std::shared_ptr<const GlmModel> fit_glm(std::span<const LabeledExample> train,
                                        double alpha, double lambda, uint64_t seed = 0);

// Candidate strengths tried when a glm config leaves lambda unset.
std::vector<double> glm_lambda_path();

// Mean decrease in Gini impurity per encoded dimension, normalized to sum 1.
// WrongModelKind for anything but a random forest.
std::vector<double> dimension_importance(const ClassifierModel& model);

struct FeatureImportance {
  std::string feature;
  double importance;
};

// Sums dimension importances per source feature (one-hot blocks fold into
// their feature) and sorts descending, ties by name.
std::vector<FeatureImportance> feature_importance(
    const ClassifierModel& model, const std::vector<std::string>& dimension_sources);

Metrics evaluate(const Predictor& model, std::span<const LabeledExample> test,
                 double threshold = 0.5);

// Reconstructs a base learner saved with to_json().
ModelPtr load_model(const nlohmann::json& j);

inline constexpr const char* kModelFormat = "microest-model";
inline constexpr int kModelFormatVersion = 1;

}  // namespace microest

#endif  // MICROEST_CLASSIFIER_H_
