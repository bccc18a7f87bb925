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

#include "microest/ensemble.h"

#include <algorithm>
#include <cmath>

#include "microest/csv.h"
#include "microest/error.h"
#include "microest/rng.h"

namespace microest {
namespace {

ModelConfig make_config(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  return c;
}

ModelConfig forest(int ntrees, int depth, int nbins, double sample, double cols) {
  ModelConfig c = make_config(ModelKind::kRandomForest);
  c.ntrees = ntrees;
  c.max_depth = depth;
  c.nbins = nbins;
  c.sample_rate = sample;
  c.col_sample_rate_per_tree = cols;
  return c;
}

ModelConfig boosted(int ntrees, int depth, int nbins, double sample, double cols) {
  ModelConfig c = make_config(ModelKind::kGbt);
  c.ntrees = ntrees;
  c.max_depth = depth;
  c.nbins = nbins;
  c.sample_rate = sample;
  c.col_sample_rate_per_tree = cols;
  return c;
}

std::vector<LabeledExample> gather(std::span<const LabeledExample> train,
                                   std::span<const uint32_t> rows) {
  std::vector<LabeledExample> out;
  out.reserve(rows.size());
  for (uint32_t r : rows) out.push_back(train[r]);
  return out;
}

void require_both_classes(std::span<const LabeledExample> train) {
  if (train.empty()) throw Error(ErrorCode::kSingleClass, "empty training set");
  ClassCounts c = count_classes(train);
  if (c.unlabeled > 0) {
    throw Error(ErrorCode::kInvalidArgument, "training set contains unlabeled examples");
  }
  if (c.positive == 0 || c.negative == 0) {
    throw Error(ErrorCode::kSingleClass, "ensemble training needs both classes");
  }
}

EnsemblePtr train_bagging(const EnsembleSpec& spec, std::span<const LabeledExample> train,
                          uint64_t seed) {
  std::vector<ModelPtr> members;
  std::vector<double> weights;
  for (size_t i = 0; i < spec.base_configs.size(); ++i) {
    std::vector<uint32_t> rows = bootstrap_rows(train, bagging_seed(seed, i, 0));
    std::vector<LabeledExample> sample = gather(train, rows);
    ModelPtr m = fit(spec.base_configs[i], sample, bagging_seed(seed, i, 1));
    double w = 1.0;
    if (spec.combiner == Combiner::kWeightedVote) {
      // Out-of-bag accuracy stands in for a held-out validation score.
      std::vector<char> in_bag(train.size(), 0);
      for (uint32_t r : rows) in_bag[r] = 1;
      size_t seen = 0, right = 0;
      for (size_t r = 0; r < train.size(); ++r) {
        if (in_bag[r]) continue;
        ++seen;
        if ((m->predict_proba(train[r].features) >= 0.5) == train[r].positive()) ++right;
      }
      w = seen > 0 ? static_cast<double>(right) / static_cast<double>(seen) : 1.0;
    }
    members.push_back(std::move(m));
    weights.push_back(w);
  }
  return std::make_shared<EnsembleModel>(EnsembleMethod::kBagging, spec.combiner, seed,
                                         std::move(members), std::move(weights), nullptr);
}

EnsemblePtr train_boosting(const EnsembleSpec& spec, std::span<const LabeledExample> train,
                           uint64_t seed) {
  ModelConfig cfg = spec.base_configs.empty() ? make_config(ModelKind::kGbt)
                                              : spec.base_configs.front();
  std::vector<ModelPtr> members{fit(cfg, train, derive_seed(seed, {2}))};
  return std::make_shared<EnsembleModel>(EnsembleMethod::kBoosting, Combiner::kAverage, seed,
                                         std::move(members), std::vector<double>{1.0},
                                         nullptr);
}

uint64_t stacking_seed(uint64_t seed, int fold, size_t base) {
  return derive_seed(seed, {3, static_cast<uint64_t>(fold + 1), base});
}

EnsemblePtr train_stacking(const EnsembleSpec& spec, std::span<const LabeledExample> train,
                           uint64_t seed) {
  StackingFolds folds = stacking_out_of_fold(spec, train, seed);
  std::vector<LabeledExample> meta_rows(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    meta_rows[i].features = std::move(folds.oof[i]);
    meta_rows[i].label = train[i].label;
    meta_rows[i].weight = train[i].weight;
    meta_rows[i].source_id = train[i].source_id;
  }
  ModelPtr meta;
  try {
    meta = fit(*spec.meta_config, meta_rows, derive_seed(seed, {4}));
  } catch (const Error& e) {
    // Every base constant out of fold: the meta learner has nothing to use.
    if (e.code() != ErrorCode::kDegenerateData) throw;
    std::vector<double> zero(spec.base_configs.size(), 0.0);
    double pos = 0, tot = 0;
    for (const auto& r : meta_rows) {
      tot += r.weight;
      if (r.positive()) pos += r.weight;
    }
    const double p = std::clamp(pos / tot, 1e-6, 1.0 - 1e-6);
    meta = std::make_shared<GlmModel>(zero, std::log(p / (1.0 - p)), 0.5, 0.0);
  }
  std::vector<ModelPtr> members;
  for (size_t b = 0; b < spec.base_configs.size(); ++b) {
    members.push_back(fit(spec.base_configs[b], train, stacking_seed(seed, -1, b)));
  }
  std::vector<double> weights(members.size(), 1.0);
  return std::make_shared<EnsembleModel>(EnsembleMethod::kStacking, Combiner::kAverage, seed,
                                         std::move(members), std::move(weights),
                                         std::move(meta));
}

}  // namespace

std::string_view to_string(EnsembleMethod m) {
  switch (m) {
    case EnsembleMethod::kBagging: return "bagging";
    case EnsembleMethod::kBoosting: return "boosting";
    case EnsembleMethod::kStacking: return "stacking";
  }
  return "stacking";
}

std::string_view to_string(Combiner c) {
  switch (c) {
    case Combiner::kAverage: return "average";
    case Combiner::kMajorityVote: return "majority_vote";
    case Combiner::kWeightedVote: return "weighted_vote";
  }
  return "average";
}

EnsembleMethod parse_ensemble_method(std::string_view text) {
  if (text == "bagging") return EnsembleMethod::kBagging;
  if (text == "boosting") return EnsembleMethod::kBoosting;
  if (text == "stacking") return EnsembleMethod::kStacking;
  throw Error(ErrorCode::kInvalidSpec, "unknown ensemble method '" + std::string(text) + "'");
}

Combiner parse_combiner(std::string_view text) {
  if (text == "average") return Combiner::kAverage;
  if (text == "majority_vote") return Combiner::kMajorityVote;
  if (text == "weighted_vote") return Combiner::kWeightedVote;
  throw Error(ErrorCode::kInvalidSpec, "unknown combiner '" + std::string(text) + "'");
}

void EnsembleSpec::validate() const {
  for (const auto& c : base_configs) c.validate();
  switch (method) {
    case EnsembleMethod::kBagging:
      if (base_configs.empty()) {
        throw Error(ErrorCode::kInvalidSpec, "bagging needs at least one base config");
      }
      break;
    case EnsembleMethod::kBoosting:
      if (base_configs.size() > 1 ||
          (base_configs.size() == 1 && base_configs[0].kind != ModelKind::kGbt)) {
        throw Error(ErrorCode::kInvalidSpec, "boosting takes exactly one gbt base config");
      }
      break;
    case EnsembleMethod::kStacking:
      if (base_configs.empty()) {
        throw Error(ErrorCode::kInvalidSpec, "stacking needs at least one base config");
      }
      if (!meta_config) throw Error(ErrorCode::kInvalidSpec, "stacking needs a meta config");
      meta_config->validate();
      if (n_folds < 2) throw Error(ErrorCode::kInvalidSpec, "stacking needs n_folds >= 2");
      break;
  }
}

void to_json(nlohmann::json& j, const EnsembleSpec& s) {
  j = nlohmann::json::object();
  j["method"] = std::string(to_string(s.method));
  j["base"] = s.base_configs;
  if (s.method == EnsembleMethod::kBagging) j["combiner"] = std::string(to_string(s.combiner));
  if (s.method == EnsembleMethod::kStacking) {
    if (s.meta_config) j["meta"] = *s.meta_config;
    j["n_folds"] = s.n_folds;
  }
}

void from_json(const nlohmann::json& j, EnsembleSpec& s) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidSpec, "ensemble spec must be an object");
  s = EnsembleSpec{};
  s.method = parse_ensemble_method(j.at("method").get<std::string>());
  if (j.contains("base")) s.base_configs = j.at("base").get<std::vector<ModelConfig>>();
  if (j.contains("combiner")) s.combiner = parse_combiner(j.at("combiner").get<std::string>());
  if (j.contains("meta")) s.meta_config = j.at("meta").get<ModelConfig>();
  if (j.contains("n_folds")) s.n_folds = j.at("n_folds").get<int>();
  for (const auto& [key, value] : j.items()) {
    if (key != "method" && key != "base" && key != "combiner" && key != "meta" &&
        key != "n_folds") {
      throw Error(ErrorCode::kInvalidSpec, "unknown ensemble key '" + key + "'");
    }
  }
}

EnsembleSpec default_stacking_spec() {
  EnsembleSpec s;
  s.method = EnsembleMethod::kStacking;
  s.base_configs = {
      forest(110, 14, 512, 0.76, 0.83),  forest(100, 18, 16, 0.86, 0.38),
      boosted(100, 20, 256, 0.76, 0.81), boosted(110, 20, 512, 0.64, 0.65),
      boosted(110, 21, 512, 0.46, 0.88),
  };
  ModelConfig glm = make_config(ModelKind::kGlm);
  glm.alpha = 0.0;
  s.base_configs.push_back(glm);
  ModelConfig meta = make_config(ModelKind::kGlm);
  meta.alpha = 0.5;
  s.meta_config = meta;
  s.n_folds = 5;
  return s;
}

EnsembleSpec default_spec(EnsembleMethod method) {
  EnsembleSpec s;
  s.method = method;
  switch (method) {
    case EnsembleMethod::kBagging:
      s.base_configs.assign(5, make_config(ModelKind::kDecisionTree));
      s.combiner = Combiner::kAverage;
      break;
    case EnsembleMethod::kBoosting:
      s.base_configs = {make_config(ModelKind::kGbt)};
      break;
    case EnsembleMethod::kStacking:
      s = default_stacking_spec();
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------

EnsembleModel::EnsembleModel(EnsembleMethod method, Combiner combiner, uint64_t seed,
                             std::vector<ModelPtr> members, std::vector<double> weights,
                             ModelPtr meta)
    : method_(method),
      combiner_(combiner),
      seed_(seed),
      members_(std::move(members)),
      weights_(std::move(weights)),
      meta_(std::move(meta)) {
  if (members_.empty()) throw Error(ErrorCode::kInvalidSpec, "ensemble without members");
  if (weights_.size() != members_.size()) {
    throw Error(ErrorCode::kInvalidSpec, "one weight per member expected");
  }
  for (const auto& m : members_) {
    if (m->feature_count() != members_.front()->feature_count()) {
      throw Error(ErrorCode::kDimensionMismatch, "ensemble members disagree on feature count");
    }
  }
  if (method_ == EnsembleMethod::kStacking &&
      (!meta_ || meta_->feature_count() != members_.size())) {
    throw Error(ErrorCode::kInvalidSpec, "stacking meta learner must take one input per base");
  }
}

size_t EnsembleModel::feature_count() const { return members_.front()->feature_count(); }

std::vector<double> EnsembleModel::member_probabilities(std::span<const double> x) const {
  std::vector<double> p;
  p.reserve(members_.size());
  for (const auto& m : members_) p.push_back(m->predict_proba(x));
  return p;
}

double EnsembleModel::do_predict(std::span<const double> x) const {
  std::vector<double> p = member_probabilities(x);
  if (method_ == EnsembleMethod::kStacking) return meta_->predict_proba(p);
  if (method_ == EnsembleMethod::kBoosting) return p.front();
  switch (combiner_) {
    case Combiner::kAverage: {
      double s = 0;
      for (double v : p) s += v;
      return std::clamp(s / static_cast<double>(p.size()), 0.0, 1.0);
    }
    case Combiner::kMajorityVote:
    case Combiner::kWeightedVote: {
      double votes = 0, total = 0;
      for (size_t i = 0; i < p.size(); ++i) {
        const double w = combiner_ == Combiner::kWeightedVote ? weights_[i] : 1.0;
        total += w;
        if (p[i] >= 0.5) votes += w;
      }
      if (total <= 0) {
        // All weights zero: fall back to an unweighted vote.
        votes = 0;
        for (double v : p) votes += v >= 0.5 ? 1.0 : 0.0;
        total = static_cast<double>(p.size());
      }
      return votes / total;
    }
  }
  return 0.0;
}

nlohmann::json EnsembleModel::to_json() const {
  nlohmann::json j;
  j["format"] = kEnsembleFormat;
  j["version"] = 1;
  j["method"] = std::string(to_string(method_));
  j["combiner"] = std::string(to_string(combiner_));
  j["seed"] = seed_;
  j["weights"] = weights_;
  j["members"] = nlohmann::json::array();
  for (const auto& m : members_) j["members"].push_back(m->to_json());
  if (meta_) j["meta"] = meta_->to_json();
  return j;
}

EnsemblePtr EnsembleModel::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != kEnsembleFormat || j.value("version", 0) != 1) {
    throw Error(ErrorCode::kParseError, "not a microest ensemble document");
  }
  std::vector<ModelPtr> members;
  for (const auto& m : j.at("members")) members.push_back(load_model(m));
  ModelPtr meta = j.contains("meta") ? load_model(j.at("meta")) : nullptr;
  return std::make_shared<EnsembleModel>(
      parse_ensemble_method(j.at("method").get<std::string>()),
      parse_combiner(j.at("combiner").get<std::string>()), j.at("seed").get<uint64_t>(),
      std::move(members), j.at("weights").get<std::vector<double>>(), std::move(meta));
}

PredictorPtr load_predictor(const nlohmann::json& j) {
  const std::string format = j.value("format", std::string{});
  if (format == kEnsembleFormat) return EnsembleModel::from_json(j);
  return load_model(j);
}

// ---------------------------------------------------------------------------

uint64_t bagging_seed(uint64_t seed, size_t member, uint64_t purpose) {
  return derive_seed(seed, {1, member, purpose});
}

std::vector<uint32_t> bootstrap_rows(std::span<const LabeledExample> train, uint64_t seed) {
  const size_t n = train.size();
  std::vector<uint32_t> rows(n);
  for (uint64_t attempt = 0; attempt < 1000; ++attempt) {
    Rng rng(derive_seed(seed, {attempt}));
    bool pos = false, neg = false;
    for (auto& r : rows) {
      r = static_cast<uint32_t>(uniform_index(rng, n));
      (train[r].positive() ? pos : neg) = true;
    }
    if (pos && neg) return rows;
  }
  throw Error(ErrorCode::kSingleClass, "bootstrap keeps drawing a single class");
}

StackingFolds stacking_out_of_fold(const EnsembleSpec& spec,
                                   std::span<const LabeledExample> train, uint64_t seed) {
  spec.validate();
  require_both_classes(train);
  const int k = spec.n_folds;
  StackingFolds out;
  out.fold_of.assign(train.size(), 0);
  std::vector<uint32_t> pos, neg;
  for (size_t i = 0; i < train.size(); ++i) {
    (train[i].positive() ? pos : neg).push_back(static_cast<uint32_t>(i));
  }
  if (pos.size() < static_cast<size_t>(k) || neg.size() < static_cast<size_t>(k)) {
    throw Error(ErrorCode::kInvalidSpec, "each class needs at least n_folds examples");
  }
  Rng rng(derive_seed(seed, {5}));
  shuffle_in_place(pos, rng);
  shuffle_in_place(neg, rng);
  for (size_t i = 0; i < pos.size(); ++i) out.fold_of[pos[i]] = static_cast<int>(i % k);
  for (size_t i = 0; i < neg.size(); ++i) out.fold_of[neg[i]] = static_cast<int>(i % k);

  const size_t nb = spec.base_configs.size();
  out.oof.assign(train.size(), std::vector<double>(nb, 0.0));
  out.fit_rows.resize(k);
  for (int f = 0; f < k; ++f) {
    std::vector<uint32_t> held;
    for (size_t i = 0; i < train.size(); ++i) {
      (out.fold_of[i] == f ? held : out.fit_rows[f]).push_back(static_cast<uint32_t>(i));
    }
    std::vector<LabeledExample> fit_set = gather(train, out.fit_rows[f]);
    for (size_t b = 0; b < nb; ++b) {
      ModelPtr m = fit(spec.base_configs[b], fit_set, stacking_seed(seed, f, b));
      for (uint32_t r : held) out.oof[r][b] = m->predict_proba(train[r].features);
    }
  }
  return out;
}

EnsemblePtr train_ensemble(const EnsembleSpec& spec, std::span<const LabeledExample> train,
                           uint64_t seed) {
  spec.validate();
  require_both_classes(train);
  switch (spec.method) {
    case EnsembleMethod::kBagging: return train_bagging(spec, train, seed);
    case EnsembleMethod::kBoosting: return train_boosting(spec, train, seed);
    case EnsembleMethod::kStacking: return train_stacking(spec, train, seed);
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown ensemble method");
}

// ---------------------------------------------------------------------------

size_t ParamGrid::size() const {
  size_t n = 1;
  for (const auto& [key, values] : axes) n *= values.size();
  return n;
}

std::vector<nlohmann::json> ParamGrid::points() const {
  for (const auto& [key, values] : axes) {
    if (values.empty()) throw Error(ErrorCode::kEmptyGrid, "grid axis '" + key + "' is empty");
  }
  std::vector<nlohmann::json> out;
  std::vector<size_t> idx(axes.size(), 0);
  while (true) {
    nlohmann::json p = nlohmann::json::object();
    for (size_t a = 0; a < axes.size(); ++a) p[axes[a].first] = axes[a].second[idx[a]];
    out.push_back(std::move(p));
    size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

void to_json(nlohmann::json& j, const ParamGrid& g) {
  j = nlohmann::json::array();
  for (const auto& [key, values] : g.axes) j.push_back({{"param", key}, {"values", values}});
}

void from_json(const nlohmann::json& j, ParamGrid& g) {
  g.axes.clear();
  auto add = [&](const std::string& key, const nlohmann::json& values) {
    if (!values.is_array()) {
      throw Error(ErrorCode::kInvalidSpec, "grid values for '" + key + "' must be a list");
    }
    g.axes.emplace_back(key, values.get<std::vector<nlohmann::json>>());
  };
  if (j.is_object()) {
    for (const auto& [key, values] : j.items()) add(key, values);
  } else if (j.is_array()) {
    for (const auto& axis : j) add(axis.at("param").get<std::string>(), axis.at("values"));
  } else {
    throw Error(ErrorCode::kInvalidSpec, "grid must be an object or a list of axes");
  }
}

EnsembleSpec apply_params(const EnsembleSpec& base, const nlohmann::json& point) {
  EnsembleSpec s = base;
  for (const auto& [key, value] : point.items()) {
    const size_t dot = key.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
      throw Error(ErrorCode::kInvalidSpec, "grid key '" + key + "' is not <target>.<param>");
    }
    const std::string target = key.substr(0, dot);
    const std::string param = key.substr(dot + 1);
    if (target == "ensemble") {
      if (param == "combiner") {
        s.combiner = parse_combiner(value.get<std::string>());
      } else if (param == "n_folds") {
        s.n_folds = value.get<int>();
      } else {
        throw Error(ErrorCode::kInvalidSpec, "unknown ensemble parameter '" + param + "'");
      }
    } else if (target == "meta") {
      if (!s.meta_config) throw Error(ErrorCode::kInvalidSpec, "grid sets meta without a meta");
      s.meta_config->set(param, value);
    } else if (target.starts_with("base[") && target.ends_with("]")) {
      size_t i = 0;
      try {
        i = std::stoul(target.substr(5, target.size() - 6));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidSpec, "bad base index in '" + key + "'");
      }
      if (i >= s.base_configs.size()) {
        throw Error(ErrorCode::kInvalidSpec, "base index out of range in '" + key + "'");
      }
      s.base_configs[i].set(param, value);
    } else {
      const bool all = target == "base";
      std::optional<ModelKind> kind;
      if (!all) kind = parse_model_kind(target);
      bool applied = false;
      for (auto& c : s.base_configs) {
        if (kind && c.kind != *kind) continue;
        if (all && !ModelConfig::is_meaningful(c.kind, param)) continue;
        c.set(param, value);
        applied = true;
      }
      if (!applied) {
        throw Error(ErrorCode::kInvalidSpec, "grid key '" + key + "' matches no base config");
      }
    }
  }
  s.validate();
  return s;
}

GridSearchResult grid_search(const MethodGrid& grid, std::span<const LabeledExample> train,
                             std::span<const LabeledExample> valid, uint64_t seed) {
  std::vector<nlohmann::json> points = grid.grid.points();
  GridSearchResult result;
  for (size_t i = 0; i < points.size(); ++i) {
    GridPoint gp;
    gp.params = points[i];
    gp.spec = apply_params(grid.base, points[i]);
    EnsemblePtr model = train_ensemble(gp.spec, train, seed);
    gp.metrics = evaluate(*model, valid);
    if (i == 0 || gp.metrics.f1 > result.table[result.best_index].metrics.f1) {
      result.best_index = i;
    }
    result.table.push_back(std::move(gp));
  }
  result.best = result.table[result.best_index].spec;
  return result;
}

MethodComparison select_best_method(const std::vector<MethodGrid>& grids,
                                    std::span<const LabeledExample> train,
                                    std::span<const LabeledExample> valid, uint64_t seed) {
  if (grids.empty()) throw Error(ErrorCode::kEmptyGrid, "no ensemble methods to compare");
  MethodComparison cmp;
  for (size_t i = 0; i < grids.size(); ++i) {
    cmp.per_method.push_back(grid_search(grids[i], train, valid, seed));
    if (i > 0 && cmp.metrics(i).f1 > cmp.metrics(cmp.best_index).f1) cmp.best_index = i;
  }
  cmp.best = cmp.per_method[cmp.best_index].best;
  return cmp;
}

void write_comparison_csv(std::ostream& out, const MethodComparison& cmp) {
  write_csv_row(out, {"model", "accuracy", "precision", "recall", "F1-measure"});
  for (size_t i = 0; i < cmp.per_method.size(); ++i) {
    const Metrics& m = cmp.metrics(i);
    write_csv_row(out, {std::string(to_string(cmp.per_method[i].best.method)),
                        format_number(m.accuracy), format_number(m.precision),
                        format_number(m.recall), format_number(m.f1)});
  }
}

nlohmann::json comparison_json(const MethodComparison& cmp) {
  nlohmann::json rows = nlohmann::json::array();
  for (size_t i = 0; i < cmp.per_method.size(); ++i) {
    const auto& r = cmp.per_method[i];
    nlohmann::json table = nlohmann::json::array();
    for (const auto& gp : r.table) {
      table.push_back({{"params", gp.params}, {"metrics", gp.metrics}});
    }
    rows.push_back({{"method", std::string(to_string(r.best.method))},
                    {"metrics", cmp.metrics(i)},
                    {"best_spec", r.best},
                    {"best_index", r.best_index},
                    {"grid", std::move(table)}});
  }
  return {{"methods", std::move(rows)},
          {"selected", std::string(to_string(cmp.best.method))},
          {"selected_spec", cmp.best}};
}

}  // namespace microest
