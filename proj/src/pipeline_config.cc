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

#include <filesystem>
#include <fstream>
#include <set>

#include "microest/error.h"
#include "microest/pipeline.h"

namespace microest {
namespace {

using nlohmann::json;

Error config_error(const std::string& m) { return Error(ErrorCode::kInvalidConfig, m); }

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw config_error(where + " must be an object");
  for (const auto& [key, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw config_error("unknown key '" + key + "' in " + where);
  }
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

std::string_view to_string(FilterFallback f) {
  return f == FilterFallback::kKeepAll ? "all" : "none";
}

FilterFallback parse_fallback(std::string_view s) {
  if (s == "all") return FilterFallback::kKeepAll;
  if (s == "none") return FilterFallback::kDropAll;
  throw config_error("training.fallback must be 'all' or 'none'");
}

MethodGrid method_grid(EnsembleSpec spec, std::vector<std::pair<std::string, std::vector<json>>> axes) {
  MethodGrid g;
  g.base = std::move(spec);
  g.grid.axes = std::move(axes);
  return g;
}

}  // namespace

PipelineConfig default_pipeline_config() {
  PipelineConfig c;
  c.data.synthetic = SyntheticParams{};

  EnsembleSpec bagging = default_spec(EnsembleMethod::kBagging);
  for (auto& b : bagging.base_configs) b.max_depth = 8;
  EnsembleSpec boosting = default_spec(EnsembleMethod::kBoosting);
  c.methods.push_back(
      method_grid(bagging, {{"ensemble.combiner", {"average", "weighted_vote"}},
                            {"decision_tree.max_depth", {6, 10}}}));
  c.methods.push_back(
      method_grid(boosting, {{"gbt.ntrees", {50, 100}}, {"gbt.max_depth", {3, 5}}}));
  c.methods.push_back(method_grid(default_stacking_spec(), {}));
  return c;
}

void PipelineConfig::validate() const {
  if (!data.synthetic) {
    if (data.support_path.empty() || data.open_path.empty() || data.truth_path.empty()) {
      throw config_error("data needs either synthetic parameters or support/open/truth paths");
    }
    if (support_features.empty() || open_features.empty()) {
      throw config_error("CSV data needs a features list");
    }
  } else {
    data.synthetic->validate();
  }
  auto unit_open = [](double v, const char* name) {
    if (!(v > 0 && v < 1)) throw config_error(std::string(name) + " must lie in (0,1)");
  };
  unit_open(training.test_fraction, "training.test_fraction");
  unit_open(training.valid_fraction, "training.valid_fraction");
  unit_open(training.threshold, "training.threshold");
  if (!(training.negative_ratio > 0)) throw config_error("training.negative_ratio must be > 0");
  if (!(training.resample_ratio > 0 && training.resample_ratio <= 1)) {
    throw config_error("training.resample_ratio must lie in (0,1]");
  }
  if (training.top_features < 1) throw config_error("training.top_features must be >= 1");
  if (preprocess.bins < 1) throw config_error("bins must be >= 1");
  if (!(preprocess.correlation_threshold > 0 && preprocess.correlation_threshold <= 1)) {
    throw config_error("correlation_threshold must lie in (0,1]");
  }
  validate_schedule(lsh.schedule, lsh.n_hashes);
  if (!(lsh.min_score >= 0 && lsh.min_score <= 1)) {
    throw config_error("lsh.min_score must lie in [0,1]");
  }
  if (methods.empty()) throw config_error("ensemble needs at least one method");
  for (const auto& m : methods) {
    m.base.validate();
    for (const auto& p : m.grid.points()) apply_params(m.base, p);
  }
  em.validate();
  if (!(ranking.smoothing > 0)) throw config_error("ranking.smoothing must be > 0");
  if (ranking.y_bins < 1 || ranking.x_bins < 1) throw config_error("ranking bins must be >= 1");
  if (ranking.y_feature.empty()) throw config_error("ranking.y_feature is required");
  if (n_runs < 1) throw config_error("n_runs must be >= 1");
  if (top_n < 1) throw config_error("top_n must be >= 1");
}

nlohmann::json to_json(const PipelineConfig& c) {
  json j;
  if (c.data.synthetic) {
    j["data"] = {{"synthetic", *c.data.synthetic}};
  } else {
    j["data"] = {{"support", c.data.support_path},
                 {"open", c.data.open_path},
                 {"truth", c.data.truth_path}};
  }
  json features = json::array();
  std::set<std::string> common_done;
  auto emit = [&](const FeatureSpec& f, const char* dataset) {
    json fj = f;
    if (f.role == FeatureRole::kCommon) {
      if (!common_done.insert(f.name).second) return;
    } else {
      fj["dataset"] = dataset;
    }
    features.push_back(std::move(fj));
  };
  for (const auto& f : c.support_features) emit(f, "support");
  for (const auto& f : c.open_features) emit(f, "open");
  j["features"] = std::move(features);
  json canon = json::array();
  for (const auto& a : c.canon) canon.push_back({{"feature", a[0]}, {"from", a[1]}, {"to", a[2]}});
  j["canon"] = std::move(canon);
  j["impute"] = json::object();
  if (c.preprocess.impute_category) j["impute"]["category"] = *c.preprocess.impute_category;
  j["skew"] = {{"threshold", c.preprocess.skew_threshold}};
  j["correlation_threshold"] = c.preprocess.correlation_threshold;
  j["bins"] = c.preprocess.bins;
  json binning = json::array();
  for (const auto& [name, b] : c.preprocess.binning) {
    json bj = b;
    bj["feature"] = name;
    binning.push_back(std::move(bj));
  }
  j["binning"] = std::move(binning);
  json schedule = json::array();
  for (const auto& s : c.lsh.schedule) schedule.push_back({s.bands, s.rows});
  j["lsh"] = {{"seed", c.lsh.seed},
              {"schedule", std::move(schedule)},
              {"n_hashes", c.lsh.n_hashes},
              {"min_score", c.lsh.min_score}};
  const TrainingConfig& t = c.training;
  j["training"] = {{"test_fraction", t.test_fraction},
                   {"negative_ratio", t.negative_ratio},
                   {"valid_fraction", t.valid_fraction},
                   {"resample", t.resample ? json(std::string(to_string(*t.resample))) : json()},
                   {"resample_ratio", t.resample_ratio},
                   {"top_features", t.top_features},
                   {"threshold", t.threshold},
                   {"fallback", std::string(to_string(t.fallback))}};
  json methods = json::array();
  for (const auto& m : c.methods) methods.push_back({{"spec", m.base}, {"grid", m.grid}});
  j["ensemble"] = std::move(methods);
  j["em"] = c.em;
  j["ranking"] = {{"y_feature", c.ranking.y_feature},
                  {"x_features", c.ranking.x_features},
                  {"smoothing", c.ranking.smoothing},
                  {"y_bins", c.ranking.y_bins},
                  {"x_bins", c.ranking.x_bins}};
  j["n_runs"] = c.n_runs;
  j["top_n"] = c.top_n;
  j["seed"] = c.seed;
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::string& base_dir) {
  try {
    check_keys(j,
               {"data", "features", "canon", "impute", "skew", "correlation_threshold", "bins",
                "binning", "lsh", "training", "ensemble", "em", "ranking", "n_runs", "top_n",
                "seed"},
               "config");
    PipelineConfig c;
    const PipelineConfig defaults = default_pipeline_config();
    c.methods = defaults.methods;
    if (j.contains("data")) {
      const json& d = j.at("data");
      check_keys(d, {"synthetic", "support", "open", "truth"}, "data");
      c.data = DataSource{};
      if (d.contains("synthetic")) {
        c.data.synthetic = d.at("synthetic").get<SyntheticParams>();
      } else {
        c.data.support_path = resolve(d.value("support", std::string{}), base_dir);
        c.data.open_path = resolve(d.value("open", std::string{}), base_dir);
        c.data.truth_path = resolve(d.value("truth", std::string{}), base_dir);
      }
    } else {
      c.data.synthetic = SyntheticParams{};
    }
    if (j.contains("features")) {
      for (const auto& fj : j.at("features")) {
        check_keys(fj, {"name", "kind", "role", "dataset"}, "features[]");
        FeatureSpec f = fj.get<FeatureSpec>();
        std::string dataset = fj.value("dataset", std::string{});
        if (f.role == FeatureRole::kCommon) {
          if (!dataset.empty()) throw config_error("common feature '" + f.name + "' names a dataset");
          c.support_features.push_back(f);
          c.open_features.push_back(f);
          continue;
        }
        if (dataset.empty()) {
          if (f.role == FeatureRole::kOpenOnly) dataset = "open";
          if (f.role == FeatureRole::kSupportOnly || f.role == FeatureRole::kLabel) {
            dataset = "support";
          }
        }
        if (dataset == "open") {
          c.open_features.push_back(f);
        } else if (dataset == "support") {
          c.support_features.push_back(f);
        } else {
          throw config_error("feature '" + f.name + "' needs dataset 'open' or 'support'");
        }
      }
    }
    if (j.contains("canon")) {
      for (const auto& a : j.at("canon")) {
        check_keys(a, {"feature", "from", "to"}, "canon[]");
        c.canon.push_back({a.at("feature").get<std::string>(), a.at("from").get<std::string>(),
                           a.at("to").get<std::string>()});
      }
    }
    if (j.contains("impute")) {
      check_keys(j.at("impute"), {"category"}, "impute");
      if (j.at("impute").contains("category")) {
        c.preprocess.impute_category = j.at("impute").at("category").get<std::string>();
      }
    }
    if (j.contains("skew")) {
      check_keys(j.at("skew"), {"threshold"}, "skew");
      c.preprocess.skew_threshold = j.at("skew").value("threshold", 1.0);
    }
    if (j.contains("correlation_threshold")) {
      c.preprocess.correlation_threshold = j.at("correlation_threshold").get<double>();
    }
    if (j.contains("bins")) c.preprocess.bins = j.at("bins").get<size_t>();
    if (j.contains("binning")) {
      for (const auto& bj : j.at("binning")) {
        check_keys(bj, {"feature", "cuts", "labels"}, "binning[]");
        c.preprocess.binning[bj.at("feature").get<std::string>()] = bj.get<Binning>();
      }
    }
    if (j.contains("lsh")) {
      const json& l = j.at("lsh");
      check_keys(l, {"seed", "schedule", "n_hashes", "min_score"}, "lsh");
      c.lsh.seed = l.value("seed", c.lsh.seed);
      c.lsh.n_hashes = l.value("n_hashes", c.lsh.n_hashes);
      c.lsh.min_score = l.value("min_score", c.lsh.min_score);
      if (l.contains("schedule")) {
        c.lsh.schedule.clear();
        for (const auto& s : l.at("schedule")) {
          if (!s.is_array() || s.size() != 2) {
            throw config_error("lsh.schedule entries are [bands, rows] pairs");
          }
          c.lsh.schedule.push_back({s[0].get<size_t>(), s[1].get<size_t>()});
        }
      }
    }
    if (j.contains("training")) {
      const json& t = j.at("training");
      check_keys(t,
                 {"test_fraction", "negative_ratio", "valid_fraction", "resample",
                  "resample_ratio", "top_features", "threshold", "fallback"},
                 "training");
      TrainingConfig& tc = c.training;
      tc.test_fraction = t.value("test_fraction", tc.test_fraction);
      tc.negative_ratio = t.value("negative_ratio", tc.negative_ratio);
      tc.valid_fraction = t.value("valid_fraction", tc.valid_fraction);
      if (t.contains("resample")) {
        if (t.at("resample").is_null()) {
          tc.resample.reset();
        } else {
          tc.resample = parse_resample_strategy(t.at("resample").get<std::string>());
        }
      }
      tc.resample_ratio = t.value("resample_ratio", tc.resample_ratio);
      tc.top_features = t.value("top_features", tc.top_features);
      tc.threshold = t.value("threshold", tc.threshold);
      if (t.contains("fallback")) tc.fallback = parse_fallback(t.at("fallback").get<std::string>());
    }
    if (j.contains("ensemble")) {
      c.methods.clear();
      for (const auto& m : j.at("ensemble")) {
        check_keys(m, {"spec", "grid"}, "ensemble[]");
        MethodGrid g;
        g.base = m.at("spec").get<EnsembleSpec>();
        if (m.contains("grid")) g.grid = m.at("grid").get<ParamGrid>();
        c.methods.push_back(std::move(g));
      }
    }
    if (j.contains("em")) c.em = j.at("em").get<EmConfig>();
    if (j.contains("ranking")) {
      const json& r = j.at("ranking");
      check_keys(r, {"y_feature", "x_features", "smoothing", "y_bins", "x_bins"}, "ranking");
      c.ranking.y_feature = r.value("y_feature", c.ranking.y_feature);
      c.ranking.x_features = r.value("x_features", c.ranking.x_features);
      c.ranking.smoothing = r.value("smoothing", c.ranking.smoothing);
      c.ranking.y_bins = r.value("y_bins", c.ranking.y_bins);
      c.ranking.x_bins = r.value("x_bins", c.ranking.x_bins);
    }
    c.n_runs = j.value("n_runs", c.n_runs);
    c.top_n = j.value("top_n", c.top_n);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("malformed config: ") + e.what());
  }
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, "config '" + path + "': " + e.what());
  }
  return pipeline_config_from_json(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace microest
