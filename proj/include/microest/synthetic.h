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

#ifndef MICROEST_SYNTHETIC_H_
#define MICROEST_SYNTHETIC_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "microest/dataset.h"
#include "microest/preprocess.h"

namespace microest {

// A building registry (support) and a fire-event table (open) that share
// eleven common features. Each event copies the common values of one
// registry record, which is drawn with probability proportional to a
// feature-driven risk score, then perturbs each value with probability
// `noise`.
struct SyntheticParams {
  size_t n_support = 2000;
  size_t n_events = 300;
  double noise = 0.1;
  // Generalization: each common value of an event is blanked with this
  // probability after perturbation.
  double suppress_rate = 0.0;
  // Fraction of registry records that are siblings of an earlier record
  // (same complex: same district and zone, a few other values changed).
  double complex_rate = 0.3;
  double missing_rate = 0.03;
  // Events spell building structure as short codes (RC, S, W, ...).
  bool alias_domain = true;
  // Quantile bins used to decide whether two continuous values differ.
  size_t bins = 10;

  void validate() const;  // InvalidParams
  bool operator==(const SyntheticParams&) const = default;
};

void to_json(nlohmann::json& j, const SyntheticParams& p);
void from_json(const nlohmann::json& j, SyntheticParams& p);

struct SyntheticBenchmark {
  SyntheticParams params;
  uint64_t seed = 0;
  TabularDataset support;
  TabularDataset open;
  std::map<std::string, std::string> truth;  // open id -> support id
  // Alias pairs (feature, code, canonical value) the open data needs.
  std::vector<std::array<std::string, 3>> aliases;
};

// Registry records are regenerated until no two share a Jaccard similarity
// above 0.58 on their common tokens, so with noise 0 every event has exactly
// one perfect match.
SyntheticBenchmark generate_synthetic(const SyntheticParams& params, uint64_t seed);

std::vector<FeatureSpec> synthetic_support_schema();
std::vector<FeatureSpec> synthetic_open_schema();

// Common-feature tokenization matching what the pipeline applies.
Canonicalization synthetic_canonicalization(const SyntheticBenchmark& b);

// truth.csv: open_id,support_id
void write_truth_csv(std::ostream& out, const std::map<std::string, std::string>& truth);
std::map<std::string, std::string> read_truth_csv(std::istream& in);

}  // namespace microest

#endif  // MICROEST_SYNTHETIC_H_
