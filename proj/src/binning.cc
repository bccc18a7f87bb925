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

#include "microest/binning.h"

#include <algorithm>

#include "microest/error.h"

namespace microest {

size_t Binning::bin(double v) const {
  return static_cast<size_t>(std::lower_bound(cuts.begin(), cuts.end(), v) -
                             cuts.begin());
}

std::string Binning::label(size_t b) const {
  if (!labels.empty()) return labels.at(b);
  return "q" + std::to_string(b);
}

Binning fit_quantile_binning(std::span<const double> values, size_t bins) {
  if (bins < 1) throw Error(ErrorCode::kInvalidArgument, "bins must be >= 1");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Binning out;
  if (sorted.empty() || bins == 1) return out;
  const double max = sorted.back();

  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= bins) {
    out.cuts.assign(distinct.begin(), distinct.end() - 1);
    return out;
  }
  const size_t n = sorted.size();
  for (size_t k = 1; k < bins; ++k) {
    // Upper edge of the k-th equal-count slice.
    size_t pos = (k * n + bins - 1) / bins;  // ceil(k n / bins)
    double cut = sorted[pos - 1];
    if (cut >= max) break;
    if (out.cuts.empty() || cut > out.cuts.back()) out.cuts.push_back(cut);
  }
  return out;
}

void to_json(nlohmann::json& j, const Binning& b) {
  j = nlohmann::json{{"cuts", b.cuts}};
  if (!b.labels.empty()) j["labels"] = b.labels;
}

void from_json(const nlohmann::json& j, Binning& b) {
  b.cuts = j.at("cuts").get<std::vector<double>>();
  b.labels = j.value("labels", std::vector<std::string>{});
  for (size_t i = 1; i < b.cuts.size(); ++i) {
    if (!(b.cuts[i] > b.cuts[i - 1])) {
      throw Error(ErrorCode::kInvalidConfig, "binning cuts must increase");
    }
  }
  if (!b.labels.empty() && b.labels.size() != b.cuts.size() + 1) {
    throw Error(ErrorCode::kInvalidConfig,
                "binning needs one label per bin (cuts + 1)");
  }
}

}  // namespace microest
