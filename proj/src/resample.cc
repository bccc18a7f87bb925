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

#include "microest/resample.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "microest/error.h"
#include "microest/rng.h"

namespace microest {

ResampleStrategy parse_resample_strategy(std::string_view text) {
  if (text == "oversample") return ResampleStrategy::kOversample;
  if (text == "undersample") return ResampleStrategy::kUndersample;
  if (text == "both") return ResampleStrategy::kBoth;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown resample strategy '" + std::string(text) + "'");
}

std::string_view to_string(ResampleStrategy s) {
  switch (s) {
    case ResampleStrategy::kOversample: return "oversample";
    case ResampleStrategy::kUndersample: return "undersample";
    case ResampleStrategy::kBoth: return "both";
  }
  return "both";
}

std::vector<LabeledExample> resample(std::span<const LabeledExample> examples,
                                     ResampleStrategy strategy, double target_ratio,
                                     uint64_t seed) {
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target ratio must lie in (0, 1]");
  }
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].label == Label::kPositive) pos.push_back(i);
    if (examples[i].label == Label::kNegative) neg.push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw Error(ErrorCode::kSingleClass, "resampling needs both classes");
  }
  const bool pos_minority = pos.size() <= neg.size();
  const std::vector<size_t>& minority = pos_minority ? pos : neg;
  const std::vector<size_t>& majority = pos_minority ? neg : pos;
  const double m = static_cast<double>(minority.size());
  const double big = static_cast<double>(majority.size());
  if (m / big >= target_ratio) {
    return {examples.begin(), examples.end()};
  }

  size_t minority_target = minority.size();
  size_t majority_target = majority.size();
  switch (strategy) {
    case ResampleStrategy::kOversample:
      minority_target = static_cast<size_t>(std::llround(target_ratio * big));
      break;
    case ResampleStrategy::kUndersample:
      majority_target = static_cast<size_t>(std::llround(m / target_ratio));
      break;
    case ResampleStrategy::kBoth:
      minority_target = static_cast<size_t>(std::llround(std::sqrt(m * target_ratio * big)));
      majority_target = static_cast<size_t>(std::llround(std::sqrt(big * m / target_ratio)));
      break;
  }
  minority_target = std::max(minority_target, minority.size());
  majority_target = std::clamp<size_t>(majority_target, 1, majority.size());

  Rng rng(seed);
  std::vector<bool> keep(examples.size(), true);
  if (majority_target < majority.size()) {
    std::vector<size_t> order = majority;
    shuffle_in_place(order, rng);
    for (size_t k = majority_target; k < order.size(); ++k) keep[order[k]] = false;
  }
  std::vector<LabeledExample> out;
  out.reserve(examples.size() + minority_target - minority.size());
  for (size_t i = 0; i < examples.size(); ++i) {
    if (keep[i]) out.push_back(examples[i]);
  }
  for (size_t k = minority.size(); k < minority_target; ++k) {
    out.push_back(examples[minority[uniform_index(rng, minority.size())]]);
  }
  return out;
}

}  // namespace microest
