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

#include "microest/metrics.h"

#include "microest/error.h"

namespace microest {

Metrics Metrics::from_counts(size_t tp, size_t fp, size_t fn, size_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  const size_t n = tp + fp + fn + tn;
  m.accuracy = n ? static_cast<double>(tp + tn) / static_cast<double>(n) : 0.0;
  m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

Metrics confusion_metrics(const std::vector<bool>& predicted, const std::vector<bool>& actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction and label counts differ");
  }
  size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i]) {
      actual[i] ? ++tp : ++fp;
    } else {
      actual[i] ? ++fn : ++tn;
    }
  }
  return Metrics::from_counts(tp, fp, fn, tn);
}

void to_json(nlohmann::json& j, const Metrics& m) {
  j = nlohmann::json{{"accuracy", m.accuracy}, {"precision", m.precision},
                     {"recall", m.recall},     {"f1", m.f1},
                     {"tp", m.tp},             {"fp", m.fp},
                     {"fn", m.fn},             {"tn", m.tn}};
}

}  // namespace microest
