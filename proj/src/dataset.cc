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

#include "microest/dataset.h"

#include <cmath>
#include <fstream>
#include <set>

#include "microest/csv.h"
#include "microest/error.h"

namespace microest {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kCategorical: return "categorical";
    case FeatureKind::kContinuous: return "continuous";
    case FeatureKind::kDate: return "date";
    case FeatureKind::kIdentifier: return "identifier";
  }
  return "categorical";
}

std::string_view to_string(FeatureRole role) {
  switch (role) {
    case FeatureRole::kCommon: return "common";
    case FeatureRole::kOpenOnly: return "open-only";
    case FeatureRole::kSupportOnly: return "support-only";
    case FeatureRole::kLabel: return "label";
    case FeatureRole::kId: return "id";
  }
  return "common";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "categorical") return FeatureKind::kCategorical;
  if (text == "continuous") return FeatureKind::kContinuous;
  if (text == "date") return FeatureKind::kDate;
  if (text == "identifier") return FeatureKind::kIdentifier;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown feature kind '" + std::string(text) + "'");
}

FeatureRole parse_feature_role(std::string_view text) {
  if (text == "common") return FeatureRole::kCommon;
  if (text == "open-only") return FeatureRole::kOpenOnly;
  if (text == "support-only") return FeatureRole::kSupportOnly;
  if (text == "label") return FeatureRole::kLabel;
  if (text == "id") return FeatureRole::kId;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown feature role '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const FeatureSpec& f) {
  j = nlohmann::json{{"name", f.name},
                     {"kind", std::string(to_string(f.kind))},
                     {"role", std::string(to_string(f.role))}};
}

void from_json(const nlohmann::json& j, FeatureSpec& f) {
  f.name = j.at("name").get<std::string>();
  f.kind = parse_feature_kind(j.at("kind").get<std::string>());
  f.role = parse_feature_role(j.at("role").get<std::string>());
}

std::string value_text(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  return {};
}

const Value& Record::at(std::string_view feature) const {
  auto it = values.find(feature);
  if (it == values.end()) {
    throw Error(ErrorCode::kMissingColumn, "record '" + id +
                                               "' has no feature '" +
                                               std::string(feature) + "'");
  }
  return it->second;
}

TabularDataset::TabularDataset(std::vector<FeatureSpec> schema,
                               std::vector<Record> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  std::set<std::string, std::less<>> names;
  size_t id_count = 0;
  for (const auto& f : schema_) {
    if (!names.insert(f.name).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "schema lists feature '" + f.name + "' twice");
    }
    if (f.role == FeatureRole::kId) ++id_count;
  }
  if (id_count != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "schema must have exactly one id feature, found " +
                    std::to_string(id_count));
  }
  const FeatureSpec& idf = id_feature();
  for (const auto& r : rows_) {
    if (r.values.size() != schema_.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "record '" + r.id + "' does not match the schema");
    }
    for (const auto& f : schema_) {
      auto it = r.values.find(f.name);
      if (it == r.values.end()) {
        throw Error(ErrorCode::kMissingColumn,
                    "record '" + r.id + "' lacks feature '" + f.name + "'");
      }
      const Value& v = it->second;
      if (f.is_continuous()) {
        if (is_category(v)) {
          throw Error(ErrorCode::kInvalidArgument,
                      "continuous feature '" + f.name + "' holds a category");
        }
        if (is_number(v) && !std::isfinite(std::get<double>(v))) {
          throw Error(ErrorCode::kInvalidArgument,
                      "non-finite value in '" + f.name + "'");
        }
      } else if (is_number(v)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "categorical feature '" + f.name + "' holds a number");
      }
    }
    if (value_text(r.at(idf.name)) != r.id) {
      throw Error(ErrorCode::kInvalidArgument,
                  "record id '" + r.id + "' disagrees with its id column");
    }
  }
  index_ids();
}

void TabularDataset::index_ids() {
  id_index_.clear();
  for (size_t i = 0; i < rows_.size(); ++i) {
    if (!id_index_.emplace(rows_[i].id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate id '" + rows_[i].id + "'");
    }
  }
}

const FeatureSpec* TabularDataset::find(std::string_view name) const {
  for (const auto& f : schema_) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const FeatureSpec& TabularDataset::feature(std::string_view name) const {
  const FeatureSpec* f = find(name);
  if (f == nullptr) {
    throw Error(ErrorCode::kMissingColumn,
                "no feature named '" + std::string(name) + "'");
  }
  return *f;
}

const FeatureSpec& TabularDataset::id_feature() const {
  for (const auto& f : schema_) {
    if (f.role == FeatureRole::kId) return f;
  }
  throw Error(ErrorCode::kInvalidArgument, "schema has no id feature");
}

std::optional<size_t> TabularDataset::row_index(std::string_view id) const {
  auto it = id_index_.find(id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

const Record& TabularDataset::row(std::string_view id) const {
  auto idx = row_index(id);
  if (!idx) {
    throw Error(ErrorCode::kInvalidArgument,
                "no record with id '" + std::string(id) + "'");
  }
  return rows_[*idx];
}

std::vector<double> TabularDataset::numbers(std::string_view feature) const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) {
    const Value& v = r.at(feature);
    if (const auto* d = std::get_if<double>(&v)) out.push_back(*d);
  }
  return out;
}

TabularDataset read_csv(std::istream& in, const std::vector<FeatureSpec>& schema,
                        std::string_view source_name) {
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header) || (header.size() == 1 && header[0].empty())) {
    throw Error(ErrorCode::kEmptyFile,
                std::string(source_name) + ": no header row");
  }
  std::vector<size_t> column_of(schema.size());
  for (size_t s = 0; s < schema.size(); ++s) {
    bool found = false;
    for (size_t c = 0; c < header.size(); ++c) {
      if (header[c] == schema[s].name) {
        column_of[s] = c;
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(ErrorCode::kMissingColumn, std::string(source_name) +
                                                 ": header lacks column '" +
                                                 schema[s].name + "'");
    }
  }
  const FeatureSpec* idf = nullptr;
  for (const auto& f : schema) {
    if (f.role == FeatureRole::kId) idf = &f;
  }
  if (idf == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(source_name) + ": schema has no id feature");
  }

  std::vector<Record> rows;
  std::set<std::string, std::less<>> seen;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kParseError,
                  std::string(source_name) + ": line " +
                      std::to_string(reader.line()) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    Record r;
    for (size_t s = 0; s < schema.size(); ++s) {
      const std::string& cell = fields[column_of[s]];
      Value v;
      if (!cell.empty()) {
        if (schema[s].is_continuous()) {
          if (auto d = parse_number(cell)) v = *d;
        } else {
          v = cell;
        }
      }
      r.values.emplace(schema[s].name, std::move(v));
    }
    r.id = value_text(r.values.at(idf->name));
    if (r.id.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(source_name) + ": empty id on line " +
                      std::to_string(reader.line()));
    }
    if (!seen.insert(r.id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  std::string(source_name) + ": duplicate id '" + r.id + "'");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyFile,
                std::string(source_name) + ": no data rows");
  }
  return TabularDataset(schema, std::move(rows));
}

TabularDataset load_csv(const std::string& path,
                        const std::vector<FeatureSpec>& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return read_csv(in, schema, path);
}

void write_csv(const TabularDataset& ds, std::ostream& out) {
  std::vector<std::string> fields;
  for (const auto& f : ds.schema()) fields.push_back(f.name);
  write_csv_row(out, fields);
  for (const auto& r : ds.rows()) {
    fields.clear();
    for (const auto& f : ds.schema()) fields.push_back(value_text(r.at(f.name)));
    write_csv_row(out, fields);
  }
}

void save_csv(const TabularDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  write_csv(ds, out);
}

}  // namespace microest
