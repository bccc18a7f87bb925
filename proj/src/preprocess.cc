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

#include "microest/preprocess.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "microest/csv.h"
#include "microest/error.h"

namespace microest {
namespace {

bool is_target_column(const FeatureSpec& f) {
  return f.is_continuous() && f.role != FeatureRole::kId &&
         f.role != FeatureRole::kLabel;
}

double mean_of(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TabularDataset impute_missing(const TabularDataset& ds,
                              std::string_view category_feature) {
  const FeatureSpec& cat = ds.feature(category_feature);
  if (!cat.is_categorical()) {
    throw Error(ErrorCode::kInvalidArgument,
                "imputation category '" + cat.name + "' is not categorical");
  }
  std::vector<Record> rows = ds.rows();
  for (const auto& f : ds.schema()) {
    if (!is_target_column(f)) continue;
    std::map<std::string, std::pair<double, size_t>> by_category;
    double total = 0;
    size_t count = 0;
    for (const auto& r : ds.rows()) {
      const Value& v = r.at(f.name);
      if (!is_number(v)) continue;
      double d = std::get<double>(v);
      total += d;
      ++count;
      const Value& c = r.at(cat.name);
      if (is_category(c)) {
        auto& slot = by_category[std::get<std::string>(c)];
        slot.first += d;
        ++slot.second;
      }
    }
    if (count == 0) {
      throw Error(ErrorCode::kAllMissingColumn,
                  "column '" + f.name + "' has no observed values to impute from");
    }
    const double global = total / static_cast<double>(count);
    for (auto& r : rows) {
      Value& v = r.values.at(f.name);
      if (!is_missing(v)) continue;
      const Value& c = r.at(cat.name);
      double fill = global;
      if (is_category(c)) {
        auto it = by_category.find(std::get<std::string>(c));
        if (it != by_category.end()) {
          fill = it->second.first / static_cast<double>(it->second.second);
        }
      }
      v = fill;
    }
  }
  return TabularDataset(ds.schema(), std::move(rows));
}

std::string default_impute_category(const TabularDataset& ds) {
  for (const auto& f : ds.schema()) {
    if (f.role == FeatureRole::kCommon && f.kind == FeatureKind::kCategorical) {
      return f.name;
    }
  }
  return {};
}

double skewness(std::span<const double> values) {
  const size_t n = values.size();
  if (n < 3) return 0.0;
  const double mean = mean_of(values);
  double m2 = 0, m3 = 0;
  for (double x : values) {
    double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  if (!(m2 > 0)) return 0.0;
  // Rounding can leave a tiny nonzero m2 for constant columns.
  if (m2 <= 1e-24 * std::max(1.0, mean * mean)) return 0.0;
  const double g1 = m3 / std::pow(m2, 1.5);
  const double nd = static_cast<double>(n);
  return g1 * std::sqrt(nd * (nd - 1)) / (nd - 2);
}

SkewNormalization normalize_skewed(const TabularDataset& ds, double skew_threshold) {
  if (!(skew_threshold > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "skew threshold must be > 0");
  }
  SkewNormalization out{ds, {}};
  std::vector<Record> rows = ds.rows();
  for (const auto& f : ds.schema()) {
    if (!is_target_column(f)) continue;
    std::vector<double> col = ds.numbers(f.name);
    if (skewness(col) <= skew_threshold) continue;
    for (double v : col) {
      if (v < 0) {
        throw Error(ErrorCode::kNegativeValue,
                    "column '" + f.name + "' is skewed but holds negative value " +
                        format_number(v));
      }
    }
    for (auto& r : rows) {
      Value& v = r.values.at(f.name);
      if (is_number(v)) v = std::log1p(std::get<double>(v));
    }
    out.transformed.push_back(f.name);
  }
  out.data = TabularDataset(ds.schema(), std::move(rows));
  return out;
}

TabularDataset drop_features(const TabularDataset& ds,
                             const std::vector<std::string>& names) {
  std::set<std::string, std::less<>> drop(names.begin(), names.end());
  std::vector<FeatureSpec> schema;
  for (const auto& f : ds.schema()) {
    if (!drop.count(f.name)) schema.push_back(f);
  }
  std::vector<Record> rows = ds.rows();
  for (auto& r : rows) {
    for (const auto& n : drop) r.values.erase(n);
  }
  return TabularDataset(std::move(schema), std::move(rows));
}

RedundancyReduction drop_redundant(const TabularDataset& ds,
                                   double correlation_threshold,
                                   const std::vector<std::string>& keep) {
  std::set<std::string, std::less<>> pinned(keep.begin(), keep.end());
  std::vector<std::string> dropped;
  std::vector<std::string> kept_continuous;

  auto pair_correlation = [&](const std::string& a, const std::string& b) {
    std::vector<double> xs, ys;
    for (const auto& r : ds.rows()) {
      const Value& va = r.at(a);
      const Value& vb = r.at(b);
      if (is_number(va) && is_number(vb)) {
        xs.push_back(std::get<double>(va));
        ys.push_back(std::get<double>(vb));
      }
    }
    if (xs.size() < 2) return 0.0;
    double mx = mean_of(xs), my = mean_of(ys);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0 || syy <= 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
  };

  for (const auto& f : ds.schema()) {
    if (f.role == FeatureRole::kId || f.role == FeatureRole::kLabel ||
        pinned.count(f.name)) {
      continue;
    }
    if (f.is_continuous()) {
      std::vector<double> col = ds.numbers(f.name);
      bool constant = col.empty() ||
                      std::all_of(col.begin(), col.end(),
                                  [&](double v) { return v == col.front(); });
      if (constant) {
        dropped.push_back(f.name);
        continue;
      }
      bool redundant = false;
      for (const auto& k : kept_continuous) {
        if (std::abs(pair_correlation(k, f.name)) > correlation_threshold) {
          redundant = true;
          break;
        }
      }
      if (redundant) {
        dropped.push_back(f.name);
      } else {
        kept_continuous.push_back(f.name);
      }
    } else {
      std::set<std::string> levels;
      for (const auto& r : ds.rows()) {
        const Value& v = r.at(f.name);
        if (is_category(v)) levels.insert(std::get<std::string>(v));
      }
      if (levels.size() <= 1) dropped.push_back(f.name);
    }
  }
  return {drop_features(ds, dropped), dropped};
}

std::string Canonicalization::canonical(const std::string& feature,
                                        const std::string& raw) const {
  auto f = aliases.find(feature);
  if (f == aliases.end()) return raw;
  auto v = f->second.find(raw);
  return v == f->second.end() ? raw : v->second;
}

std::vector<FeatureSpec> common_features(const std::vector<FeatureSpec>& schema) {
  std::vector<FeatureSpec> out;
  for (const auto& f : schema) {
    if (f.role == FeatureRole::kCommon) out.push_back(f);
  }
  return out;
}

ShingleSet tokenize_common(const Record& r, std::span<const FeatureSpec> common,
                           const Canonicalization& canon) {
  std::vector<std::string> tokens;
  tokens.reserve(common.size());
  for (const auto& f : common) {
    auto it = r.values.find(f.name);
    if (it == r.values.end() || is_missing(it->second)) continue;
    std::string value;
    if (const auto* d = std::get_if<double>(&it->second)) {
      auto b = canon.binning.find(f.name);
      value = b == canon.binning.end() ? format_number(*d)
                                       : b->second.label(b->second.bin(*d));
    } else {
      value = canon.canonical(f.name, std::get<std::string>(it->second));
    }
    tokens.push_back(f.name + "=" + value);
  }
  return ShingleSet(std::move(tokens));
}

void fit_common_binning(Canonicalization& canon, const TabularDataset& support,
                        std::span<const FeatureSpec> common, size_t bins) {
  for (const auto& f : common) {
    if (!f.is_continuous() || canon.binning.count(f.name)) continue;
    std::vector<double> col = support.numbers(f.name);
    canon.binning[f.name] = fit_quantile_binning(col, bins);
  }
}

}  // namespace microest
