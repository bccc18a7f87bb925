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

#ifndef MICROEST_RESAMPLE_H_
#define MICROEST_RESAMPLE_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "microest/labeled_example.h"

namespace microest {

enum class ResampleStrategy { kOversample, kUndersample, kBoth };

ResampleStrategy parse_resample_strategy(std::string_view text);
std::string_view to_string(ResampleStrategy s);

// Rebalances toward minority/majority == target_ratio. Oversampling appends
// uniform draws (with replacement) of minority examples; undersampling keeps
// a uniform subset of the majority in original order; kBoth moves each class
// to the geometric mean of its current and its single-strategy target count.
// Sets already at or above the ratio come back unchanged. Unlabeled examples
// pass through.
std::vector<LabeledExample> resample(std::span<const LabeledExample> examples,
                                     ResampleStrategy strategy, double target_ratio,
                                     uint64_t seed);

}  // namespace microest

#endif  // MICROEST_RESAMPLE_H_
