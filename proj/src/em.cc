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

#include "microest/em.h"

#include <cmath>
#include <cstdio>

#include "microest/csv.h"
#include "microest/error.h"

namespace microest {

std::string_view to_string(PseudoLabelMode m) {
  return m == PseudoLabelMode::kHard ? "hard" : "soft_weights";
}

PseudoLabelMode parse_pseudo_label_mode(std::string_view text) {
  if (text == "hard") return PseudoLabelMode::kHard;
  if (text == "soft_weights") return PseudoLabelMode::kSoftWeights;
  throw Error(ErrorCode::kInvalidConfig, "unknown pseudo-label mode '" + std::string(text) + "'");
}

void EmConfig::validate() const {
  if (max_iter < 1) throw Error(ErrorCode::kInvalidConfig, "em max_iter must be >= 1");
  if (!(convergence_tol >= 0 && convergence_tol < 1)) {
    throw Error(ErrorCode::kInvalidConfig, "em convergence_tol must lie in [0,1)");
  }
  if (!(confidence_floor >= 0.5 && confidence_floor < 1)) {
    throw Error(ErrorCode::kInvalidConfig, "em confidence_floor must lie in [0.5,1)");
  }
}

void to_json(nlohmann::json& j, const EmConfig& c) {
  j = {{"max_iter", c.max_iter},
       {"convergence_tol", c.convergence_tol},
       {"mode", std::string(to_string(c.mode))},
       {"confidence_floor", c.confidence_floor}};
}

void from_json(const nlohmann::json& j, EmConfig& c) {
  c = EmConfig{};
  for (const auto& [key, v] : j.items()) {
    if (key == "max_iter") {
      c.max_iter = v.get<int>();
    } else if (key == "convergence_tol") {
      c.convergence_tol = v.get<double>();
    } else if (key == "mode") {
      c.mode = parse_pseudo_label_mode(v.get<std::string>());
    } else if (key == "confidence_floor") {
      c.confidence_floor = v.get<double>();
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown em key '" + key + "'");
    }
  }
  c.validate();
}

PredictorPtr fit_learner(const Learner& learner, std::span<const LabeledExample> train,
                         uint64_t seed) {
  if (const auto* cfg = std::get_if<ModelConfig>(&learner)) return fit(*cfg, train, seed);
  return train_ensemble(std::get<EnsembleSpec>(learner), train, seed);
}

EmResult em_train(std::span<const LabeledExample> labeled,
                  std::span<const LabeledExample> unlabeled, const Learner& learner,
                  const EmConfig& cfg, std::span<const LabeledExample> valid, uint64_t seed,
                  const MStepObserver& on_m_step) {
  cfg.validate();
  ClassCounts counts = count_classes(labeled);
  if (counts.unlabeled > 0) {
    throw Error(ErrorCode::kInvalidArgument, "labeled set contains unlabeled examples");
  }
  if (counts.positive == 0 || counts.negative == 0) {
    throw Error(ErrorCode::kSingleClassLabeled, "labeled set needs both classes");
  }

  EmResult result;
  std::vector<LabeledExample> train(labeled.begin(), labeled.end());
  if (unlabeled.empty()) {
    if (on_m_step) on_m_step(1, train);
    result.model = fit_learner(learner, train, seed);
    result.converged = true;
    return result;
  }

  const size_t nu = unlabeled.size();
  result.pseudo_labels.assign(nu, Label::kUnlabeled);
  result.pseudo_proba.assign(nu, 0.0);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    // M-step on labeled + current pseudo-labels.
    train.assign(labeled.begin(), labeled.end());
    size_t included = 0;
    if (it > 1) {
      for (size_t i = 0; i < nu; ++i) {
        const double p = result.pseudo_proba[i];
        LabeledExample e = unlabeled[i];
        if (cfg.mode == PseudoLabelMode::kHard) {
          if (p > 1.0 - cfg.confidence_floor && p < cfg.confidence_floor) continue;
          e.label = result.pseudo_labels[i];
          train.push_back(std::move(e));
        } else {
          const double w = e.weight;
          e.label = Label::kPositive;
          e.weight = w * p;
          train.push_back(e);
          e.label = Label::kNegative;
          e.weight = w * (1.0 - p);
          train.push_back(std::move(e));
        }
        ++included;
      }
    }
    if (on_m_step) on_m_step(it, train);
    result.model = fit_learner(learner, train, seed);

    // E-step.
    size_t changed = 0;
    for (size_t i = 0; i < nu; ++i) {
      const double p = result.model->predict_proba(unlabeled[i].features);
      const Label l = p >= 0.5 ? Label::kPositive : Label::kNegative;
      if (l != result.pseudo_labels[i]) ++changed;
      result.pseudo_labels[i] = l;
      result.pseudo_proba[i] = p;
    }
    EmIteration rec;
    rec.iteration = it;
    rec.changed_fraction = static_cast<double>(changed) / static_cast<double>(nu);
    rec.pseudo_labeled = included;
    if (!valid.empty()) rec.valid = evaluate(*result.model, valid);
    result.history.push_back(rec);
    if (rec.changed_fraction < cfg.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

void write_em_history_csv(std::ostream& out, const std::vector<EmIteration>& history) {
  write_csv_row(out, {"iteration", "changed_fraction", "valid_accuracy", "valid_precision",
                      "valid_recall", "valid_f1"});
  for (const auto& h : history) {
    std::vector<std::string> row{std::to_string(h.iteration), format_number(h.changed_fraction)};
    if (h.valid) {
      row.push_back(format_number(h.valid->accuracy));
      row.push_back(format_number(h.valid->precision));
      row.push_back(format_number(h.valid->recall));
      row.push_back(format_number(h.valid->f1));
    } else {
      row.insert(row.end(), 4, "");
    }
    write_csv_row(out, row);
  }
}

nlohmann::json em_history_json(const std::vector<EmIteration>& history) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& h : history) {
    nlohmann::json j = {{"iteration", h.iteration},
                        {"changed_fraction", h.changed_fraction},
                        {"pseudo_labeled", h.pseudo_labeled}};
    if (h.valid) j["valid"] = *h.valid;
    arr.push_back(std::move(j));
  }
  return arr;
}

namespace {

std::string with_delta(double value, double base) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f (%+.4f)", value, value - base);
  return buf;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

void write_em_comparison_csv(std::ostream& out, const EmComparison& cmp) {
  const Metrics& s = cmp.supervised;
  const Metrics& e = cmp.em;
  write_csv_row(out, {"model", "accuracy", "precision", "recall", "F1-measure"});
  write_csv_row(out, {"supervised", fixed4(s.accuracy), fixed4(s.precision), fixed4(s.recall),
                      fixed4(s.f1)});
  write_csv_row(out, {"em", with_delta(e.accuracy, s.accuracy),
                      with_delta(e.precision, s.precision), with_delta(e.recall, s.recall),
                      with_delta(e.f1, s.f1)});
}

nlohmann::json em_comparison_json(const EmComparison& cmp) {
  return {{"supervised", cmp.supervised},
          {"em", cmp.em},
          {"delta",
           {{"accuracy", cmp.em.accuracy - cmp.supervised.accuracy},
            {"precision", cmp.em.precision - cmp.supervised.precision},
            {"recall", cmp.em.recall - cmp.supervised.recall},
            {"f1", cmp.em.f1 - cmp.supervised.f1}}}};
}

}  // namespace microest
