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

#ifndef MICROEST_DATASET_H_
#define MICROEST_DATASET_H_

#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace microest {

enum class FeatureKind { kCategorical, kContinuous, kDate, kIdentifier };
enum class FeatureRole { kCommon, kOpenOnly, kSupportOnly, kLabel, kId };

std::string_view to_string(FeatureKind kind);
std::string_view to_string(FeatureRole role);
FeatureKind parse_feature_kind(std::string_view text);
FeatureRole parse_feature_role(std::string_view text);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kCategorical;
  FeatureRole role = FeatureRole::kCommon;

  // Dates and identifiers are carried as strings and behave like categories.
  bool is_categorical() const { return kind != FeatureKind::kContinuous; }
  bool is_continuous() const { return kind == FeatureKind::kContinuous; }

  bool operator==(const FeatureSpec&) const = default;
};

void to_json(nlohmann::json& j, const FeatureSpec& f);
void from_json(const nlohmann::json& j, FeatureSpec& f);

// A cell: missing, a category string, or a finite number.
using Value = std::variant<std::monostate, std::string, double>;

inline bool is_missing(const Value& v) {
  return std::holds_alternative<std::monostate>(v);
}
inline bool is_number(const Value& v) { return std::holds_alternative<double>(v); }
inline bool is_category(const Value& v) {
  return std::holds_alternative<std::string>(v);
}
// Text form used for tokens and CSV output; empty for missing.
std::string value_text(const Value& v);

struct Record {
  std::string id;
  std::map<std::string, Value, std::less<>> values;

  const Value& at(std::string_view feature) const;
  bool operator==(const Record&) const = default;
};

class TabularDataset {
 public:
  TabularDataset() = default;
  // Validates the schema/row invariants; throws Error on violation.
  TabularDataset(std::vector<FeatureSpec> schema, std::vector<Record> rows);

  const std::vector<FeatureSpec>& schema() const { return schema_; }
  const std::vector<Record>& rows() const { return rows_; }
  size_t size() const { return rows_.size(); }

  const FeatureSpec* find(std::string_view name) const;
  const FeatureSpec& feature(std::string_view name) const;
  const FeatureSpec& id_feature() const;
  std::optional<size_t> row_index(std::string_view id) const;
  const Record& row(std::string_view id) const;

  // Non-missing numeric values of a continuous column, in row order.
  std::vector<double> numbers(std::string_view feature) const;

  bool operator==(const TabularDataset& o) const {
    return schema_ == o.schema_ && rows_ == o.rows_;
  }

 private:
  void index_ids();

  std::vector<FeatureSpec> schema_;
  std::vector<Record> rows_;
  std::map<std::string, size_t, std::less<>> id_index_;
};

// Reads a header-first CSV and parses each schema column. Header columns not
// named in the schema are ignored. Empty cells, and continuous cells that do
// not parse as a finite number, become missing.
TabularDataset read_csv(std::istream& in, const std::vector<FeatureSpec>& schema,
                        std::string_view source_name = "<stream>");
TabularDataset load_csv(const std::string& path,
                        const std::vector<FeatureSpec>& schema);
void write_csv(const TabularDataset& ds, std::ostream& out);
void save_csv(const TabularDataset& ds, const std::string& path);

}  // namespace microest

#endif  // MICROEST_DATASET_H_
