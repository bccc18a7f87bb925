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

#include "microest/encoder.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "microest/error.h"

namespace microest {

Label parse_label(const Value& v) {
  if (is_missing(v)) return Label::kUnlabeled;
  if (const auto* d = std::get_if<double>(&v)) {
    if (*d == 1.0) return Label::kPositive;
    if (*d == 0.0) return Label::kNegative;
  } else {
    std::string s = std::get<std::string>(v);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "1" || s == "true" || s == "yes" || s == "positive") return Label::kPositive;
    if (s == "0" || s == "false" || s == "no" || s == "negative") return Label::kNegative;
  }
  throw Error(ErrorCode::kUnknownLabelValue, "unrecognized label value '" +
                                                 value_text(v) + "'");
}

Encoder Encoder::fit(const TabularDataset& ds, std::string_view label_feature,
                     std::vector<std::string> features) {
  Encoder enc;
  enc.label_feature_ = std::string(label_feature);
  if (!label_feature.empty()) ds.feature(label_feature);
  if (features.empty()) {
    for (const auto& f : ds.schema()) {
      if (f.role == FeatureRole::kId || f.role == FeatureRole::kLabel ||
          f.name == label_feature) {
        continue;
      }
      features.push_back(f.name);
    }
  }
  for (const auto& name : features) {
    const FeatureSpec& f = ds.feature(name);
    Column col;
    col.name = f.name;
    col.continuous = f.is_continuous();
    if (col.continuous) {
      std::vector<double> v = ds.numbers(f.name);
      if (!v.empty()) {
        double s = 0;
        for (double x : v) s += x;
        col.mean = s / static_cast<double>(v.size());
        double ss = 0;
        for (double x : v) ss += (x - col.mean) * (x - col.mean);
        double sd = std::sqrt(ss / static_cast<double>(v.size()));
        col.scale = sd > 0 ? sd : 1.0;
      }
    } else {
      std::set<std::string> levels;
      for (const auto& r : ds.rows()) {
        const Value& v = r.at(f.name);
        if (is_category(v)) levels.insert(std::get<std::string>(v));
      }
      col.levels.assign(levels.begin(), levels.end());
    }
    enc.columns_.push_back(std::move(col));
  }
  enc.index_dimensions();
  return enc;
}

void Encoder::index_dimensions() {
  feature_names_.clear();
  dimension_sources_.clear();
  dimension_names_.clear();
  for (const auto& c : columns_) {
    feature_names_.push_back(c.name);
    if (c.continuous) {
      dimension_sources_.push_back(c.name);
      dimension_names_.push_back(c.name);
    } else {
      for (const auto& level : c.levels) {
        dimension_sources_.push_back(c.name);
        dimension_names_.push_back(c.name + "=" + level);
      }
    }
  }
}

const std::vector<std::string>& Encoder::features() const { return feature_names_; }

LabeledExample Encoder::apply(const Record& r) const {
  LabeledExample ex;
  ex.source_id = r.id;
  ex.features.reserve(dimension());
  for (const auto& c : columns_) {
    const Value& v = r.at(c.name);
    if (c.continuous) {
      const auto* d = std::get_if<double>(&v);
      ex.features.push_back(d ? (*d - c.mean) / c.scale : 0.0);
    } else {
      const auto* s = std::get_if<std::string>(&v);
      for (const auto& level : c.levels) {
        ex.features.push_back(s != nullptr && *s == level ? 1.0 : 0.0);
      }
    }
  }
  if (!label_feature_.empty()) {
    auto it = r.values.find(label_feature_);
    if (it != r.values.end()) ex.label = parse_label(it->second);
  }
  return ex;
}

std::vector<LabeledExample> Encoder::apply(const TabularDataset& ds) const {
  std::vector<LabeledExample> out;
  out.reserve(ds.size());
  for (const auto& r : ds.rows()) out.push_back(apply(r));
  return out;
}

nlohmann::json Encoder::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns_) {
    nlohmann::json j{{"name", c.name}, {"continuous", c.continuous}};
    if (c.continuous) {
      j["mean"] = c.mean;
      j["scale"] = c.scale;
    } else {
      j["levels"] = c.levels;
    }
    cols.push_back(std::move(j));
  }
  return {{"label_feature", label_feature_}, {"columns", cols}};
}

Encoder Encoder::from_json(const nlohmann::json& j) {
  Encoder enc;
  enc.label_feature_ = j.at("label_feature").get<std::string>();
  for (const auto& cj : j.at("columns")) {
    Column c;
    c.name = cj.at("name").get<std::string>();
    c.continuous = cj.at("continuous").get<bool>();
    if (c.continuous) {
      c.mean = cj.at("mean").get<double>();
      c.scale = cj.at("scale").get<double>();
    } else {
      c.levels = cj.at("levels").get<std::vector<std::string>>();
    }
    enc.columns_.push_back(std::move(c));
  }
  enc.index_dimensions();
  return enc;
}

std::pair<std::vector<LabeledExample>, Encoder> encode(const TabularDataset& ds,
                                                       std::string_view label_feature) {
  Encoder enc = Encoder::fit(ds, label_feature);
  auto examples = enc.apply(ds);
  return {std::move(examples), std::move(enc)};
}

}  // namespace microest
