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

#include "microest/model_config.h"

#include <array>
#include <cmath>

#include "microest/error.h"

namespace microest {
namespace {

constexpr std::array<std::string_view, 9> kParams = {
    "alpha",       "lambda",
    "ntrees",      "max_depth",
    "nbins",       "sample_rate",
    "col_sample_rate_per_tree", "learning_rate",
    "min_rows"};

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kNaiveBayes: return "naive_bayes";
    case ModelKind::kDecisionTree: return "decision_tree";
    case ModelKind::kRandomForest: return "random_forest";
    case ModelKind::kGbt: return "gbt";
    case ModelKind::kGlm: return "glm";
  }
  return "glm";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "naive_bayes") return ModelKind::kNaiveBayes;
  if (text == "decision_tree") return ModelKind::kDecisionTree;
  if (text == "random_forest") return ModelKind::kRandomForest;
  if (text == "gbt") return ModelKind::kGbt;
  if (text == "glm") return ModelKind::kGlm;
  throw Error(ErrorCode::kInvalidConfig, "unknown model kind '" + std::string(text) + "'");
}

bool ModelConfig::is_meaningful(ModelKind kind, std::string_view p) {
  switch (kind) {
    case ModelKind::kNaiveBayes:
      return p == "nbins";
    case ModelKind::kDecisionTree:
      return p == "max_depth" || p == "nbins" || p == "min_rows";
    case ModelKind::kRandomForest:
      return p == "ntrees" || p == "max_depth" || p == "nbins" ||
             p == "sample_rate" || p == "col_sample_rate_per_tree" || p == "min_rows";
    case ModelKind::kGbt:
      return p == "ntrees" || p == "max_depth" || p == "nbins" ||
             p == "sample_rate" || p == "col_sample_rate_per_tree" ||
             p == "learning_rate" || p == "min_rows";
    case ModelKind::kGlm:
      return p == "alpha" || p == "lambda";
  }
  return false;
}

void ModelConfig::validate() const {
  auto check = [&](std::string_view name, bool set, bool ok, const char* range) {
    if (!set) return;
    if (!is_meaningful(kind, name)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "parameter '" + std::string(name) + "' does not apply to " +
                      std::string(to_string(kind)));
    }
    if (!ok) {
      throw Error(ErrorCode::kInvalidConfig,
                  "parameter '" + std::string(name) + "' must be " + range);
    }
  };
  auto rate_ok = [](const std::optional<double>& r) {
    return !r || (*r > 0.0 && *r <= 1.0);
  };
  check("alpha", alpha.has_value(), !alpha || (*alpha >= 0 && *alpha <= 1), "in [0,1]");
  check("lambda", lambda.has_value(), !lambda || *lambda >= 0, ">= 0");
  check("ntrees", ntrees.has_value(), !ntrees || *ntrees >= 1, ">= 1");
  check("max_depth", max_depth.has_value(), !max_depth || *max_depth >= 1, ">= 1");
  check("nbins", nbins.has_value(), !nbins || (*nbins >= 2 && *nbins <= 65535),
        "in [2, 65535]");
  check("sample_rate", sample_rate.has_value(), rate_ok(sample_rate), "in (0,1]");
  check("col_sample_rate_per_tree", col_sample_rate_per_tree.has_value(),
        rate_ok(col_sample_rate_per_tree), "in (0,1]");
  check("learning_rate", learning_rate.has_value(), rate_ok(learning_rate), "in (0,1]");
  check("min_rows", min_rows.has_value(), !min_rows || *min_rows >= 1, ">= 1");
}

int ModelConfig::ntrees_or_default() const { return ntrees.value_or(50); }

int ModelConfig::max_depth_or_default() const {
  if (max_depth) return *max_depth;
  switch (kind) {
    case ModelKind::kDecisionTree: return 10;
    case ModelKind::kRandomForest: return 20;
    default: return 5;
  }
}

int ModelConfig::nbins_or_default() const {
  if (nbins) return *nbins;
  switch (kind) {
    case ModelKind::kNaiveBayes: return 10;
    case ModelKind::kDecisionTree: return 32;
    default: return 20;
  }
}

double ModelConfig::sample_rate_or_default() const {
  if (sample_rate) return *sample_rate;
  return kind == ModelKind::kRandomForest ? 0.632 : 1.0;
}

int ModelConfig::min_rows_or_default() const {
  if (min_rows) return *min_rows;
  return kind == ModelKind::kGbt ? 10 : 1;
}

void ModelConfig::set(std::string_view param, const nlohmann::json& value) {
  if (!value.is_number()) {
    throw Error(ErrorCode::kInvalidConfig,
                "parameter '" + std::string(param) + "' needs a numeric value");
  }
  const double d = value.get<double>();
  auto as_int = [&]() {
    if (d != std::floor(d)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "parameter '" + std::string(param) + "' must be an integer");
    }
    return static_cast<int>(d);
  };
  if (param == "alpha") alpha = d;
  else if (param == "lambda") lambda = d;
  else if (param == "ntrees") ntrees = as_int();
  else if (param == "max_depth") max_depth = as_int();
  else if (param == "nbins") nbins = as_int();
  else if (param == "sample_rate") sample_rate = d;
  else if (param == "col_sample_rate_per_tree") col_sample_rate_per_tree = d;
  else if (param == "learning_rate") learning_rate = d;
  else if (param == "min_rows") min_rows = as_int();
  else {
    throw Error(ErrorCode::kInvalidConfig,
                "unknown model parameter '" + std::string(param) + "'");
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"kind", std::string(to_string(c.kind))}};
  if (c.alpha) j["alpha"] = *c.alpha;
  if (c.lambda) j["lambda"] = *c.lambda;
  if (c.ntrees) j["ntrees"] = *c.ntrees;
  if (c.max_depth) j["max_depth"] = *c.max_depth;
  if (c.nbins) j["nbins"] = *c.nbins;
  if (c.sample_rate) j["sample_rate"] = *c.sample_rate;
  if (c.col_sample_rate_per_tree) j["col_sample_rate_per_tree"] = *c.col_sample_rate_per_tree;
  if (c.learning_rate) j["learning_rate"] = *c.learning_rate;
  if (c.min_rows) j["min_rows"] = *c.min_rows;
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c = ModelConfig{};
  c.kind = parse_model_kind(j.at("kind").get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    bool known = false;
    for (auto p : kParams) known = known || p == key;
    if (!known) {
      throw Error(ErrorCode::kInvalidConfig, "unknown model parameter '" + key + "'");
    }
    c.set(key, value);
  }
  c.validate();
}

}  // namespace microest
