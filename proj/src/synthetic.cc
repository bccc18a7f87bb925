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

#include "microest/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "microest/binning.h"
#include "microest/csv.h"
#include "microest/error.h"
#include "microest/rng.h"

namespace microest {
namespace {

struct Domain {
  const char* feature;
  std::vector<std::string> values;
  std::vector<double> weights;
};

const std::vector<Domain>& categorical_domains() {
  static const std::vector<Domain> d = [] {
    std::vector<Domain> out;
    out.push_back({"structure",
                   {"reinforced_concrete", "steel", "wood", "brick", "block",
                    "steel_reinforced_concrete"},
                   {35, 15, 15, 15, 12, 8}});
    out.push_back({"purpose",
                   {"residential", "commercial", "office", "factory", "warehouse", "school",
                    "hospital", "religious"},
                   {40, 18, 10, 10, 8, 5, 4, 5}});
    out.push_back({"roof", {"flat", "gable", "hip", "shed", "mansard"}, {40, 25, 15, 12, 8}});
    Domain district{"district", {}, {}};
    for (int i = 1; i <= 25; ++i) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "d%02d", i);
      district.values.push_back(buf);
      district.weights.push_back(1);
    }
    out.push_back(std::move(district));
    out.push_back({"use_zone",
                   {"res1", "res2", "res3", "semi_res", "commercial_general",
                    "commercial_neighborhood", "industrial_general", "industrial_semi", "green",
                    "mixed"},
                   {18, 16, 10, 10, 9, 8, 8, 7, 7, 7}});
    out.push_back({"heating", {"gas", "electric", "oil", "district_heat"}, {50, 20, 15, 15}});
    out.push_back({"parking", {"none", "surface", "underground"}, {40, 35, 25}});
    return out;
  }();
  return d;
}

const std::vector<std::string>& continuous_common() {
  static const std::vector<std::string> c{"floors", "ground_area", "permission_year",
                                          "households"};
  return c;
}

const std::vector<std::array<std::string, 3>>& structure_codes() {
  static const std::vector<std::array<std::string, 3>> a{
      {"structure", "RC", "reinforced_concrete"}, {"structure", "S", "steel"},
      {"structure", "W", "wood"},                 {"structure", "BR", "brick"},
      {"structure", "BL", "block"},               {"structure", "SRC", "steel_reinforced_concrete"}};
  return a;
}

const Domain& domain(std::string_view feature) {
  for (const auto& d : categorical_domains()) {
    if (feature == d.feature) return d;
  }
  throw Error(ErrorCode::kInvalidArgument, "no domain for " + std::string(feature));
}

size_t weighted_index(Rng& rng, const std::vector<double>& w) {
  double total = 0;
  for (double x : w) total += x;
  double u = uniform01(rng) * total;
  for (size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

std::string draw(Rng& rng, std::string_view feature) {
  const Domain& d = domain(feature);
  return d.values[weighted_index(rng, d.weights)];
}

// A value of the domain other than `current`, uniformly.
std::string draw_other(Rng& rng, std::string_view feature, const Value& current) {
  const Domain& d = domain(feature);
  std::vector<const std::string*> options;
  for (const auto& v : d.values) {
    if (!is_category(current) || std::get<std::string>(current) != v) options.push_back(&v);
  }
  return *options[uniform_index(rng, options.size())];
}

// Rounds to `decimals` places; dividing by a power of ten keeps the result
// the nearest double to the decimal value.
double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

const std::string& text(const Record& r, std::string_view f) {
  static const std::string empty;
  const Value& v = r.at(f);
  return is_category(v) ? std::get<std::string>(v) : empty;
}

double number_or(const Record& r, std::string_view f, double fallback) {
  const Value& v = r.at(f);
  return is_number(v) ? std::get<double>(v) : fallback;
}

double draw_continuous(Rng& rng, const Record& r, std::string_view f) {
  const std::string& purpose = text(r, "purpose");
  const bool residential = purpose == "residential";
  const bool industrial = purpose == "factory" || purpose == "warehouse";
  if (f == "floors") {
    double mu = residential ? 1.3 : industrial ? 0.3 : 0.9;
    return std::clamp(std::round(std::exp(mu + 0.6 * standard_normal(rng))), 1.0, 45.0);
  }
  if (f == "ground_area") {
    double mu = industrial ? 6.2 : residential ? 4.8 : 5.4;
    return round_to(std::exp(mu + 0.7 * standard_normal(rng)), 1);
  }
  if (f == "permission_year") return 1960.0 + static_cast<double>(uniform_index(rng, 61));
  // households
  double floors = number_or(r, "floors", 2.0);
  if (residential) return std::round(floors * (1.0 + 3.0 * uniform01(rng)));
  return uniform01(rng) < 0.2 ? 1.0 + static_cast<double>(uniform_index(rng, 3)) : 0.0;
}

void fill_support_only(Rng& rng, Record& r) {
  const double area = number_or(r, "ground_area", 150.0);
  const double floors = number_or(r, "floors", 2.0);
  r.values["electricity"] =
      round_to(std::exp(std::log(area * floors) + 1.5 + 0.8 * standard_normal(rng)), 0);
  const double gas_mu = text(r, "heating") == "gas" ? std::log(area) + 2.0 : 1.0;
  r.values["gas"] = round_to(std::exp(gas_mu + 0.9 * standard_normal(rng)), 0);
  r.values["floor_area_ratio"] = round_to(floors * (40.0 + 40.0 * uniform01(rng)), 1);
  double n = 1;
  while (uniform01(rng) < 0.3 && n < 20) n += 1;
  r.values["n_buildings"] = n;
}

Record fresh_record(Rng& rng) {
  Record r;
  for (const auto& d : categorical_domains()) r.values[d.feature] = draw(rng, d.feature);
  for (const auto& f : continuous_common()) r.values[f] = draw_continuous(rng, r, f);
  fill_support_only(rng, r);
  return r;
}

// Same complex: district and zone stay, three other common values change.
Record sibling_of(Rng& rng, const Record& parent) {
  static const std::vector<std::string> changeable{
      "purpose", "roof", "heating", "parking", "floors", "ground_area", "permission_year",
      "households"};
  Record r = parent;
  std::vector<std::string> pick = changeable;
  shuffle_in_place(pick, rng);
  pick.resize(3);
  std::sort(pick.begin(), pick.end());
  for (const auto& f : pick) {
    auto it = std::find(continuous_common().begin(), continuous_common().end(), f);
    if (it == continuous_common().end()) {
      r.values[f] = draw_other(rng, f, r.at(f));
    } else {
      r.values[f] = draw_continuous(rng, r, f);
    }
  }
  fill_support_only(rng, r);
  return r;
}

std::vector<std::string> common_names() {
  std::vector<std::string> names;
  for (const auto& f : synthetic_support_schema()) {
    if (f.role == FeatureRole::kCommon) names.push_back(f.name);
  }
  return names;
}

// Per common feature: category index or bin, -1 when missing.
std::vector<int> token_codes(const Record& r, const std::vector<std::string>& names,
                             const std::map<std::string, Binning>& bins) {
  std::vector<int> codes(names.size(), -1);
  for (size_t i = 0; i < names.size(); ++i) {
    const Value& v = r.at(names[i]);
    if (is_missing(v)) continue;
    if (is_number(v)) {
      codes[i] = static_cast<int>(bins.at(names[i]).bin(std::get<double>(v)));
    } else {
      const auto& values = domain(names[i]).values;
      codes[i] = static_cast<int>(
          std::find(values.begin(), values.end(), std::get<std::string>(v)) - values.begin());
    }
  }
  return codes;
}

double code_jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  size_t na = 0, nb = 0, shared = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    na += a[i] >= 0;
    nb += b[i] >= 0;
    shared += a[i] >= 0 && a[i] == b[i];
  }
  const size_t uni = na + nb - shared;
  return uni == 0 ? 1.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

constexpr double kMaxRecordSimilarity = 0.58;

std::string padded(const char* prefix, size_t i, int width) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

void SyntheticParams::validate() const {
  auto bad = [](const std::string& m) { return Error(ErrorCode::kInvalidParams, m); };
  if (n_events < 1) throw bad("n_events must be >= 1");
  if (n_support < n_events) throw bad("n_support must be >= n_events");
  auto unit = [&](double v, const char* name) {
    if (!(v >= 0 && v <= 1)) throw bad(std::string(name) + " must lie in [0,1]");
  };
  unit(noise, "noise");
  unit(suppress_rate, "suppress_rate");
  unit(complex_rate, "complex_rate");
  unit(missing_rate, "missing_rate");
  if (missing_rate > 0.5) throw bad("missing_rate must be <= 0.5");
  if (bins < 2) throw bad("bins must be >= 2");
}

void to_json(nlohmann::json& j, const SyntheticParams& p) {
  j = {{"n_support", p.n_support},         {"n_events", p.n_events},
       {"noise", p.noise},                 {"suppress_rate", p.suppress_rate},
       {"complex_rate", p.complex_rate},   {"missing_rate", p.missing_rate},
       {"alias_domain", p.alias_domain},   {"bins", p.bins}};
}

void from_json(const nlohmann::json& j, SyntheticParams& p) {
  p = SyntheticParams{};
  for (const auto& [key, v] : j.items()) {
    if (key == "n_support") p.n_support = v.get<size_t>();
    else if (key == "n_events") p.n_events = v.get<size_t>();
    else if (key == "noise") p.noise = v.get<double>();
    else if (key == "suppress_rate") p.suppress_rate = v.get<double>();
    else if (key == "complex_rate") p.complex_rate = v.get<double>();
    else if (key == "missing_rate") p.missing_rate = v.get<double>();
    else if (key == "alias_domain") p.alias_domain = v.get<bool>();
    else if (key == "bins") p.bins = v.get<size_t>();
    else throw Error(ErrorCode::kInvalidParams, "unknown synthetic parameter '" + key + "'");
  }
  p.validate();
}

std::vector<FeatureSpec> synthetic_support_schema() {
  using K = FeatureKind;
  using R = FeatureRole;
  return {{"building_id", K::kIdentifier, R::kId},
          {"structure", K::kCategorical, R::kCommon},
          {"purpose", K::kCategorical, R::kCommon},
          {"roof", K::kCategorical, R::kCommon},
          {"district", K::kCategorical, R::kCommon},
          {"use_zone", K::kCategorical, R::kCommon},
          {"heating", K::kCategorical, R::kCommon},
          {"parking", K::kCategorical, R::kCommon},
          {"floors", K::kContinuous, R::kCommon},
          {"ground_area", K::kContinuous, R::kCommon},
          {"permission_year", K::kContinuous, R::kCommon},
          {"households", K::kContinuous, R::kCommon},
          {"electricity", K::kContinuous, R::kSupportOnly},
          {"gas", K::kContinuous, R::kSupportOnly},
          {"floor_area_ratio", K::kContinuous, R::kSupportOnly},
          {"n_buildings", K::kContinuous, R::kSupportOnly}};
}

std::vector<FeatureSpec> synthetic_open_schema() {
  using K = FeatureKind;
  using R = FeatureRole;
  std::vector<FeatureSpec> s{{"fire_id", K::kIdentifier, R::kId}};
  for (const auto& f : synthetic_support_schema()) {
    if (f.role == R::kCommon) s.push_back(f);
  }
  s.push_back({"date", K::kDate, R::kOpenOnly});
  s.push_back({"damage", K::kContinuous, R::kOpenOnly});
  s.push_back({"injuries", K::kContinuous, R::kOpenOnly});
  return s;
}

SyntheticBenchmark generate_synthetic(const SyntheticParams& params, uint64_t seed) {
  params.validate();
  SyntheticBenchmark out;
  out.params = params;
  out.seed = seed;
  const std::vector<std::string> names = common_names();
  const size_t n = params.n_support;

  // Registry.
  Rng rng(derive_seed(seed, {1}));
  std::vector<Record> rows;
  rows.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    Record r = (i > 0 && uniform01(rng) < params.complex_rate)
                   ? sibling_of(rng, rows[uniform_index(rng, i)])
                   : fresh_record(rng);
    r.id = padded("building_", i + 1, 5);
    rows.push_back(std::move(r));
  }
  for (auto& r : rows) {
    for (auto& [name, v] : r.values) {
      if (uniform01(rng) < params.missing_rate) v = std::monostate{};
    }
    r.values["building_id"] = r.id;
  }

  std::map<std::string, Binning> bins;
  for (const auto& f : continuous_common()) {
    std::vector<double> col;
    for (const auto& r : rows) {
      if (is_number(r.at(f))) col.push_back(std::get<double>(r.at(f)));
    }
    bins[f] = fit_quantile_binning(col, params.bins);
  }

  // Keep records apart: redraw categorical values (never numbers, so the
  // bins above stay valid) until each record is far from all earlier ones.
  static const std::vector<std::string> redrawable{"purpose", "roof", "heating", "parking",
                                                   "use_zone", "district", "structure"};
  std::vector<std::vector<int>> codes(n);
  for (size_t i = 0; i < n; ++i) {
    for (int attempt = 0;; ++attempt) {
      codes[i] = token_codes(rows[i], names, bins);
      bool clash = false;
      for (size_t j = 0; j < i && !clash; ++j) {
        clash = code_jaccard(codes[i], codes[j]) > kMaxRecordSimilarity;
      }
      if (!clash) break;
      if (attempt > 200) {
        throw Error(ErrorCode::kInvalidParams, "cannot keep registry records distinct");
      }
      const std::string& f = redrawable[uniform_index(rng, redrawable.size())];
      rows[i].values[f] = draw_other(rng, f, rows[i].at(f));
    }
  }
  out.support = TabularDataset(synthetic_support_schema(), rows);

  // Events: true records drawn without replacement, weighted by risk.
  auto zlog = [&](const std::string& f) {
    std::vector<double> logs(n, 0.0);
    double mean = 0, sq = 0, cnt = 0;
    for (size_t i = 0; i < n; ++i) {
      const Value& v = rows[i].at(f);
      if (!is_number(v)) continue;
      logs[i] = std::log1p(std::get<double>(v));
      mean += logs[i];
      sq += logs[i] * logs[i];
      ++cnt;
    }
    mean /= cnt;
    const double sd = std::sqrt(std::max(sq / cnt - mean * mean, 1e-12));
    for (size_t i = 0; i < n; ++i) {
      logs[i] = is_number(rows[i].at(f)) ? (logs[i] - mean) / sd : 0.0;
    }
    return logs;
  };
  const std::vector<double> z_elec = zlog("electricity");
  const std::vector<double> z_gas = zlog("gas");
  std::vector<double> risk(n);
  for (size_t i = 0; i < n; ++i) {
    const Record& r = rows[i];
    const std::string& structure = text(r, "structure");
    const std::string& purpose = text(r, "purpose");
    double s = 0;
    s += structure == "wood" ? 1.2 : structure == "brick" ? 0.6 : 0.0;
    s += (purpose == "factory" || purpose == "warehouse") ? 0.9
         : purpose == "commercial"                        ? 0.4
                                                          : 0.0;
    s += number_or(r, "permission_year", 2000) < 1985 ? 0.8 : 0.0;
    s += text(r, "heating") == "oil" ? 0.6 : 0.0;
    s += 0.5 * z_elec[i] + 0.4 * z_gas[i];
    s += number_or(r, "n_buildings", 1) >= 3 ? 0.3 : 0.0;
    risk[i] = std::exp(s);
  }
  Rng pick_rng(derive_seed(seed, {2}));
  std::vector<size_t> chosen;
  for (size_t e = 0; e < params.n_events; ++e) {
    size_t i = weighted_index(pick_rng, risk);
    chosen.push_back(i);
    risk[i] = 0;
  }

  std::map<std::string, std::string> code_of;
  for (const auto& a : structure_codes()) code_of[a[2]] = a[1];

  std::vector<Record> events;
  for (size_t e = 0; e < chosen.size(); ++e) {
    Rng er(derive_seed(seed, {3, e}));
    const Record& truth = rows[chosen[e]];
    Record ev;
    ev.id = padded("fire_", e + 1, 4);
    ev.values["fire_id"] = ev.id;
    for (size_t f = 0; f < names.size(); ++f) {
      const std::string& name = names[f];
      Value v = truth.at(name);
      if (uniform01(er) < params.noise) {
        if (bins.count(name)) {
          // Another registry value from a different bin.
          const size_t own = is_number(v) ? bins[name].bin(std::get<double>(v)) : SIZE_MAX;
          for (int t = 0; t < 1000; ++t) {
            const Value& o = rows[uniform_index(er, n)].at(name);
            if (is_number(o) && bins[name].bin(std::get<double>(o)) != own) {
              v = o;
              break;
            }
          }
        } else {
          v = draw_other(er, name, v);
        }
      }
      if (uniform01(er) < params.suppress_rate) v = std::monostate{};
      if (params.alias_domain && name == "structure" && is_category(v)) {
        v = code_of.at(std::get<std::string>(v));
      }
      ev.values[name] = v;
    }
    char date[16];
    std::snprintf(date, sizeof date, "%d-%02d", 2015 + static_cast<int>(uniform_index(er, 5)),
                  1 + static_cast<int>(uniform_index(er, 12)));
    ev.values["date"] = std::string(date);
    const std::string& structure = text(truth, "structure");
    double effect = structure == "wood"    ? 0.9
                    : structure == "brick" ? 0.4
                    : structure == "block" ? 0.3
                    : structure == "steel" ? -0.2
                    : structure == "steel_reinforced_concrete" ? -0.3
                                                               : 0.0;
    const double log_damage = 1.0 + 0.7 * std::log(number_or(truth, "ground_area", 150.0)) +
                              effect +
                              0.15 * std::log1p(number_or(truth, "households", 0.0)) +
                              0.4 * standard_normal(er);
    ev.values["damage"] = round_to(std::exp(log_damage), 1);
    const double inj = std::exp(-1.5 + 0.3 * std::log1p(number_or(truth, "households", 0.0)) +
                                standard_normal(er));
    ev.values["injuries"] = std::floor(inj);
    out.truth[ev.id] = truth.id;
    events.push_back(std::move(ev));
  }
  out.open = TabularDataset(synthetic_open_schema(), std::move(events));
  if (params.alias_domain) out.aliases = structure_codes();
  return out;
}

Canonicalization synthetic_canonicalization(const SyntheticBenchmark& b) {
  Canonicalization canon;
  for (const auto& a : b.aliases) canon.add_alias(a[0], a[1], a[2]);
  std::vector<FeatureSpec> common = common_features(synthetic_support_schema());
  fit_common_binning(canon, b.support, common, b.params.bins);
  return canon;
}

void write_truth_csv(std::ostream& out, const std::map<std::string, std::string>& truth) {
  write_csv_row(out, {"open_id", "support_id"});
  for (const auto& [o, s] : truth) write_csv_row(out, {o, s});
}

std::map<std::string, std::string> read_truth_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw Error(ErrorCode::kEmptyFile, "truth file is empty");
  if (row != std::vector<std::string>{"open_id", "support_id"}) {
    throw Error(ErrorCode::kParseError, "truth header must be open_id,support_id");
  }
  std::map<std::string, std::string> truth;
  while (reader.next(row)) {
    if (row.size() != 2 || row[0].empty() || row[1].empty()) {
      throw Error(ErrorCode::kParseError,
                  "truth line " + std::to_string(reader.line()) + ": expected two ids");
    }
    if (!truth.emplace(row[0], row[1]).second) {
      throw Error(ErrorCode::kDuplicateId, "open id '" + row[0] + "' linked twice");
    }
  }
  return truth;
}

}  // namespace microest
