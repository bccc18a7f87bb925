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

#ifndef MICROEST_LABELED_EXAMPLE_H_
#define MICROEST_LABELED_EXAMPLE_H_

#include <span>
#include <string>
#include <vector>

namespace microest {

// Positive means the micro record is linked to an event.
enum class Label { kNegative = 0, kPositive = 1, kUnlabeled = 2 };

struct LabeledExample {
  std::vector<double> features;
  Label label = Label::kUnlabeled;
  double weight = 1.0;
  std::string source_id;

  bool positive() const { return label == Label::kPositive; }
  bool operator==(const LabeledExample&) const = default;
};

struct ClassCounts {
  size_t positive = 0;
  size_t negative = 0;
  size_t unlabeled = 0;
};

inline ClassCounts count_classes(std::span<const LabeledExample> examples) {
  ClassCounts c;
  for (const auto& e : examples) {
    switch (e.label) {
      case Label::kPositive: ++c.positive; break;
      case Label::kNegative: ++c.negative; break;
      case Label::kUnlabeled: ++c.unlabeled; break;
    }
  }
  return c;
}

}  // namespace microest

#endif  // MICROEST_LABELED_EXAMPLE_H_
