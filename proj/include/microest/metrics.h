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

#ifndef MICROEST_METRICS_H_
#define MICROEST_METRICS_H_

#include <vector>

#include "json.hpp"

namespace microest {

// Binary classification scores derived from confusion counts. Precision and
// recall are 0 when their denominator is 0; so is F1 when both are 0.
struct Metrics {
  size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;

  static Metrics from_counts(size_t tp, size_t fp, size_t fn, size_t tn);
  size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Metrics&) const = default;
};

// `predicted` and `actual` are parallel: true means positive.
Metrics confusion_metrics(const std::vector<bool>& predicted, const std::vector<bool>& actual);

void to_json(nlohmann::json& j, const Metrics& m);

}  // namespace microest

#endif  // MICROEST_METRICS_H_
