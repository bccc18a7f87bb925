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

#include "microest/ranking.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "microest/csv.h"
#include "microest/error.h"

namespace microest {

std::optional<size_t> ConditionalProbabilityModel::Feature::level(const Value& v) const {
  if (is_missing(v)) return std::nullopt;
  if (continuous) {
    if (!is_number(v)) return std::nullopt;
    return binning.bin(std::get<double>(v));
  }
  const std::string text = value_text(v);
  auto it = std::lower_bound(levels.begin(), levels.end(), text);
  if (it == levels.end() || *it != text) return std::nullopt;
  return static_cast<size_t>(it - levels.begin());
}

size_t ConditionalProbabilityModel::y_level(const Value& y) const {
  if (!fitted()) throw Error(ErrorCode::kUnfittedModel, "ranking model is not fitted");
  if (is_missing(y)) throw Error(ErrorCode::kInvalidArgument, "target value is missing");
  if (y_continuous_) {
    if (!is_number(y)) {
      throw Error(ErrorCode::kInvalidArgument, "continuous target needs a numeric value");
    }
    return y_binning_.bin(std::get<double>(y));
  }
  const std::string text = value_text(y);
  auto it = std::lower_bound(y_levels_.begin(), y_levels_.end(), text);
  if (it == y_levels_.end() || *it != text) {
    throw Error(ErrorCode::kInvalidArgument, "target value '" + text + "' never seen in training");
  }
  return static_cast<size_t>(it - y_levels_.begin());
}

double ConditionalProbabilityModel::score(const Value& y, const Record& candidate) const {
  const size_t k = y_level(y);
  double s = std::log(priors_[k]);
  for (const auto& f : features_) {
    auto it = candidate.values.find(f.name);
    if (it == candidate.values.end()) continue;
    std::optional<size_t> v = f.level(it->second);
    if (!v) continue;
    s += std::log(f.likelihood[k][*v]) - std::log(f.evidence[*v]);
  }
  return s;
}

nlohmann::json ConditionalProbabilityModel::to_json() const {
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& f : features_) {
    nlohmann::json j = {{"name", f.name}, {"continuous", f.continuous},
                        {"likelihood", f.likelihood}, {"evidence", f.evidence}};
    if (f.continuous) {
      j["binning"] = f.binning;
    } else {
      j["levels"] = f.levels;
    }
    feats.push_back(std::move(j));
  }
  nlohmann::json j = {{"y_feature", y_feature_}, {"y_levels", y_levels_},
                      {"priors", priors_},       {"smoothing", smoothing_},
                      {"features", std::move(feats)}};
  if (y_continuous_) j["y_binning"] = y_binning_;
  return j;
}

ConditionalProbabilityModel fit_cond_prob(const TabularDataset& train,
                                          std::string_view y_feature,
                                          const std::vector<std::string>& x_features,
                                          const RankingOptions& options) {
  if (!(options.smoothing > 0) || !std::isfinite(options.smoothing)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be > 0");
  }
  if (options.y_bins < 1 || options.x_bins < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bin counts must be >= 1");
  }
  const FeatureSpec* yspec = train.find(y_feature);
  if (yspec == nullptr) {
    throw Error(ErrorCode::kMissingColumn, "target feature '" + std::string(y_feature) + "' absent");
  }
  const double s = options.smoothing;

  ConditionalProbabilityModel m;
  m.y_feature_ = std::string(y_feature);
  m.y_continuous_ = yspec->is_continuous();
  m.smoothing_ = s;

  std::vector<const Record*> rows;
  for (const auto& r : train.rows()) {
    if (!is_missing(r.at(y_feature))) rows.push_back(&r);
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyTraining, "no training row has a target value");

  if (m.y_continuous_) {
    auto declared = options.binning.find(m.y_feature_);
    if (declared != options.binning.end()) {
      m.y_binning_ = declared->second;
    } else {
      std::vector<double> ys;
      for (const Record* r : rows) ys.push_back(std::get<double>(r->at(y_feature)));
      m.y_binning_ = fit_quantile_binning(ys, options.y_bins);
    }
    for (size_t b = 0; b < m.y_binning_.bin_count(); ++b) {
      m.y_levels_.push_back(m.y_binning_.label(b));
    }
  } else {
    std::set<std::string> levels;
    for (const Record* r : rows) levels.insert(value_text(r->at(y_feature)));
    m.y_levels_.assign(levels.begin(), levels.end());
  }
  const size_t K = m.y_levels_.size();

  // y_level() requires priors to be set, so bin the rows directly.
  std::vector<size_t> ylev(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const Value& y = rows[i]->at(y_feature);
    if (m.y_continuous_) {
      ylev[i] = m.y_binning_.bin(std::get<double>(y));
    } else {
      ylev[i] = static_cast<size_t>(
          std::lower_bound(m.y_levels_.begin(), m.y_levels_.end(), value_text(y)) -
          m.y_levels_.begin());
    }
  }

  std::vector<double> nk(K, 0.0);
  for (size_t l : ylev) nk[l] += 1;
  const double N = static_cast<double>(rows.size());
  m.priors_.resize(K);
  for (size_t k = 0; k < K; ++k) m.priors_[k] = (nk[k] + s) / (N + s * K);

  for (const auto& name : x_features) {
    const FeatureSpec* spec = train.find(name);
    if (spec == nullptr) {
      throw Error(ErrorCode::kMissingColumn, "ranking feature '" + name + "' absent");
    }
    if (name == y_feature) {
      throw Error(ErrorCode::kInvalidArgument, "target cannot also be an x feature");
    }
    ConditionalProbabilityModel::Feature f;
    f.name = name;
    f.continuous = spec->is_continuous();
    if (f.continuous) {
      auto declared = options.binning.find(name);
      if (declared != options.binning.end()) {
        f.binning = declared->second;
      } else {
        std::vector<double> xs;
        for (const Record* r : rows) {
          const Value& v = r->at(name);
          if (is_number(v)) xs.push_back(std::get<double>(v));
        }
        f.binning = fit_quantile_binning(xs, options.x_bins);
      }
    } else {
      std::set<std::string> levels;
      for (const Record* r : rows) {
        const Value& v = r->at(name);
        if (!is_missing(v)) levels.insert(value_text(v));
      }
      f.levels.assign(levels.begin(), levels.end());
    }
    const size_t V = f.level_count();
    std::vector<std::vector<double>> nvk(K, std::vector<double>(V, 0.0));
    for (size_t i = 0; i < rows.size(); ++i) {
      std::optional<size_t> v = f.level(rows[i]->at(name));
      if (v) nvk[ylev[i]][*v] += 1;
    }
    f.likelihood.assign(K, std::vector<double>(V, 0.0));
    f.evidence.assign(V, 0.0);
    std::vector<double> nv(V, 0.0);
    double Ni = 0;
    for (size_t k = 0; k < K; ++k) {
      double nki = 0;
      for (size_t v = 0; v < V; ++v) nki += nvk[k][v];
      for (size_t v = 0; v < V; ++v) {
        f.likelihood[k][v] = (nvk[k][v] + s) / (nki + s * V);
        nv[v] += nvk[k][v];
      }
      Ni += nki;
    }
    for (size_t v = 0; v < V; ++v) f.evidence[v] = (nv[v] + s) / (Ni + s * V);
    m.features_.push_back(std::move(f));
  }
  return m;
}

std::vector<RankedCandidate> rank_candidates(const ConditionalProbabilityModel& model,
                                             const Value& y,
                                             std::span<const Record> candidates, size_t n) {
  if (candidates.empty()) throw Error(ErrorCode::kNoCandidates, "nothing to rank");
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "top-n must be >= 1");
  std::vector<RankedCandidate> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    RankedCandidate r;
    r.support_id = c.id;
    r.log_score = model.score(y, c);
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    return a.support_id < b.support_id;
  });
  const double top = out.front().log_score;
  double z = 0;
  for (const auto& r : out) z += std::exp(r.log_score - top);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].normalized_score = std::exp(out[i].log_score - top) / z;
    out[i].rank = i + 1;
  }
  if (out.size() > n) out.resize(n);
  return out;
}

void write_rankings_csv(std::ostream& out, std::span<const EventRanking> rankings) {
  write_csv_row(out, {"open_id", "support_id", "rank", "log_score", "normalized_score"});
  for (const auto& e : rankings) {
    if (e.ranked.empty()) {
      write_csv_row(out, {e.open_id, "", "", "", ""});
      continue;
    }
    for (const auto& r : e.ranked) {
      write_csv_row(out, {e.open_id, r.support_id, std::to_string(r.rank),
                          format_number(r.log_score), format_number(r.normalized_score)});
    }
  }
}

std::vector<EventRanking> read_rankings_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw Error(ErrorCode::kEmptyFile, "rankings file is empty");
  const std::vector<std::string> header{"open_id", "support_id", "rank", "log_score",
                                        "normalized_score"};
  if (row != header) throw Error(ErrorCode::kParseError, "unexpected rankings header");
  std::vector<EventRanking> out;
  auto bad = [&](const std::string& what) {
    return Error(ErrorCode::kParseError,
                 "rankings line " + std::to_string(reader.line()) + ": " + what);
  };
  while (reader.next(row)) {
    if (row.size() != header.size()) throw bad("expected 5 fields");
    if (out.empty() || out.back().open_id != row[0]) out.push_back({row[0], {}});
    if (row[1].empty()) continue;
    RankedCandidate r;
    r.support_id = row[1];
    auto rank = parse_number(row[2]);
    auto ls = parse_number(row[3]);
    auto ns = parse_number(row[4]);
    if (!rank || !ls || !ns || *rank < 1 || *rank != std::floor(*rank)) throw bad("bad number");
    r.rank = static_cast<size_t>(*rank);
    r.log_score = *ls;
    r.normalized_score = *ns;
    out.back().ranked.push_back(std::move(r));
  }
  return out;
}

}  // namespace microest
