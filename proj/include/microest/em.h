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

#ifndef MICROEST_EM_H_
#define MICROEST_EM_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "microest/classifier.h"
#include "microest/ensemble.h"
#include "microest/labeled_example.h"
#include "microest/metrics.h"

namespace microest {

enum class PseudoLabelMode { kHard, kSoftWeights };

std::string_view to_string(PseudoLabelMode m);
PseudoLabelMode parse_pseudo_label_mode(std::string_view text);

// The loop stops once the fraction of unlabeled points whose pseudo-label
// flipped drops below convergence_tol. Tree ensembles refit from scratch
// have no comparable parameter vector, so label stability is the test.
struct EmConfig {
  int max_iter = 20;
  double convergence_tol = 0.001;
  PseudoLabelMode mode = PseudoLabelMode::kHard;
  // Hard mode: points with probability in (1 - floor, floor) sit out the
  // next fit. 0.5 keeps everything.
  double confidence_floor = 0.5;

  void validate() const;
  bool operator==(const EmConfig&) const = default;
};

void to_json(nlohmann::json& j, const EmConfig& c);
void from_json(const nlohmann::json& j, EmConfig& c);

using Learner = std::variant<ModelConfig, EnsembleSpec>;

PredictorPtr fit_learner(const Learner& learner, std::span<const LabeledExample> train,
                         uint64_t seed);

struct EmIteration {
  int iteration = 0;
  double changed_fraction = 0;  // 1.0 on the first pass: every label is new
  size_t pseudo_labeled = 0;    // unlabeled points that entered this fit
  std::optional<Metrics> valid;
};

struct EmResult {
  PredictorPtr model;
  std::vector<EmIteration> history;
  std::vector<Label> pseudo_labels;  // parallel to the unlabeled input
  std::vector<double> pseudo_proba;
  bool converged = false;
};

// Called with the training set of every fit, before fitting.
using MStepObserver = std::function<void(int iteration, std::span<const LabeledExample>)>;

// Fit on the labeled set, label the unlabeled pool, then alternate
// fit-on-everything / relabel until the labels settle or max_iter fits
// have run. Every fit uses the same seed. With an empty pool the result is
// the plain supervised fit and an empty history.
EmResult em_train(std::span<const LabeledExample> labeled,
                  std::span<const LabeledExample> unlabeled, const Learner& learner,
                  const EmConfig& cfg, std::span<const LabeledExample> valid, uint64_t seed,
                  const MStepObserver& on_m_step = {});

// iteration,changed_fraction,valid_accuracy,valid_precision,valid_recall,valid_f1
void write_em_history_csv(std::ostream& out, const std::vector<EmIteration>& history);
nlohmann::json em_history_json(const std::vector<EmIteration>& history);

struct EmComparison {
  Metrics supervised;
  Metrics em;
};

// Rows "supervised" and "em"; the em row carries signed deltas in parentheses.
void write_em_comparison_csv(std::ostream& out, const EmComparison& cmp);
nlohmann::json em_comparison_json(const EmComparison& cmp);

}  // namespace microest

#endif  // MICROEST_EM_H_
