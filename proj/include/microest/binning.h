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

#ifndef MICROEST_BINNING_H_
#define MICROEST_BINNING_H_

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace microest {

// Maps a number to one of cuts.size() + 1 ordered bins: bin k holds values
// in (cuts[k-1], cuts[k]], the last bin everything above the last cut.
struct Binning {
  std::vector<double> cuts;     // strictly increasing
  std::vector<std::string> labels;  // empty, or cuts.size() + 1 entries

  size_t bin_count() const { return cuts.size() + 1; }
  size_t bin(double v) const;
  std::string label(size_t bin) const;

  bool operator==(const Binning&) const = default;
};

// Quantile cut points over the given values: at most `bins` bins, fewer when
// there are fewer distinct values. Duplicate cuts collapse.
Binning fit_quantile_binning(std::span<const double> values, size_t bins);

void to_json(nlohmann::json& j, const Binning& b);
void from_json(const nlohmann::json& j, Binning& b);

}  // namespace microest

#endif  // MICROEST_BINNING_H_
