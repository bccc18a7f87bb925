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

#ifndef MICROEST_ENCODER_H_
#define MICROEST_ENCODER_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "microest/dataset.h"
#include "microest/labeled_example.h"

namespace microest {

// Turns records into dense vectors: one-hot blocks for categorical features
// (levels seen at fit time, sorted), z-scores for continuous ones (fit-time
// mean and population std). Missing continuous values encode as 0, i.e. the
// training mean; unseen or missing categories encode as an all-zero block.
class Encoder {
 public:
  Encoder() = default;

  // `features` empty selects every non-id, non-label feature of the schema.
  static Encoder fit(const TabularDataset& ds, std::string_view label_feature,
                     std::vector<std::string> features = {});

  // Rows of `ds` become examples; the label column is read when present and
  // otherwise every example is unlabeled.
  std::vector<LabeledExample> apply(const TabularDataset& ds) const;
  LabeledExample apply(const Record& r) const;

  size_t dimension() const { return dimension_sources_.size(); }
  // Source feature of each encoded dimension.
  const std::vector<std::string>& dimension_sources() const { return dimension_sources_; }
  const std::vector<std::string>& dimension_names() const { return dimension_names_; }
  const std::vector<std::string>& features() const;
  const std::string& label_feature() const { return label_feature_; }

  nlohmann::json to_json() const;
  static Encoder from_json(const nlohmann::json& j);

 private:
  struct Column {
    std::string name;
    bool continuous = false;
    double mean = 0;
    double scale = 1;
    std::vector<std::string> levels;
  };

  std::string label_feature_;
  std::vector<Column> columns_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> dimension_sources_;
  std::vector<std::string> dimension_names_;

  void index_dimensions();
};

// Label text: 1/0, true/false, yes/no, positive/negative (case-insensitive).
// Missing is unlabeled; anything else is UnknownLabelValue.
Label parse_label(const Value& v);

std::pair<std::vector<LabeledExample>, Encoder> encode(
    const TabularDataset& ds, std::string_view label_feature);

}  // namespace microest

#endif  // MICROEST_ENCODER_H_
