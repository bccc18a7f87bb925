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

#ifndef MICROEST_RANKING_H_
#define MICROEST_RANKING_H_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "microest/binning.h"
#include "microest/dataset.h"

namespace microest {

struct RankingOptions {
  double smoothing = 1.0;
  size_t y_bins = 4;   // quantile bins for a continuous target
  size_t x_bins = 10;  // quantile bins for continuous x features
  // Declared binnings override the quantile fits, by feature name.
  std::map<std::string, Binning> binning;
};

// Naive conditional-probability table:
//   log Pr(y|x) ~ log Pr(y) + sum_i log Pr(x_i|y) - sum_i log Pr(x_i)
// with additive smoothing s on every distribution:
//   Pr(y=k)      = (n_k + s) / (N + s K)
//   Pr(x_i=v|k)  = (n_vk + s) / (n_k + s V_i)
//   Pr(x_i=v)    = (n_v + s) / (N_i + s V_i)
// Counts for feature i only include rows where x_i is present.
class ConditionalProbabilityModel {
 public:
  struct Feature {
    std::string name;
    bool continuous = false;
    Binning binning;                  // continuous only
    std::vector<std::string> levels;  // categorical only, sorted
    std::vector<std::vector<double>> likelihood;  // [y level][value level]
    std::vector<double> evidence;                 // [value level]

    size_t level_count() const { return continuous ? binning.bin_count() : levels.size(); }
    // Level of a value; nullopt for missing or an unseen category.
    std::optional<size_t> level(const Value& v) const;
  };

  ConditionalProbabilityModel() = default;

  bool fitted() const { return !priors_.empty(); }
  const std::string& y_feature() const { return y_feature_; }
  bool y_continuous() const { return y_continuous_; }
  const Binning& y_binning() const { return y_binning_; }
  const std::vector<std::string>& y_levels() const { return y_levels_; }
  const std::vector<double>& priors() const { return priors_; }
  const std::vector<Feature>& features() const { return features_; }
  double smoothing() const { return smoothing_; }

  // InvalidArgument for a missing y or an unseen categorical y.
  size_t y_level(const Value& y) const;

  // Log-space score of `candidate` for target value y; x values that are
  // missing or unseen drop out of both products. UnfittedModel before fit.
  double score(const Value& y, const Record& candidate) const;

  nlohmann::json to_json() const;

 private:
  friend ConditionalProbabilityModel fit_cond_prob(const TabularDataset&, std::string_view,
                                                   const std::vector<std::string>&,
                                                   const RankingOptions&);
  std::string y_feature_;
  bool y_continuous_ = false;
  Binning y_binning_;
  std::vector<std::string> y_levels_;
  std::vector<double> priors_;
  std::vector<Feature> features_;
  double smoothing_ = 1.0;
};

// EmptyTraining when no row has y; MissingColumn for unknown features;
// InvalidArgument for non-positive smoothing.
ConditionalProbabilityModel fit_cond_prob(const TabularDataset& train,
                                          std::string_view y_feature,
                                          const std::vector<std::string>& x_features,
                                          const RankingOptions& options = {});

struct RankedCandidate {
  std::string support_id;
  double log_score = 0;
  double normalized_score = 0;  // softmax over every scored candidate
  size_t rank = 0;              // 1-based
  bool operator==(const RankedCandidate&) const = default;
};

// Scores all candidates, orders by log score (ties by support id) and
// returns the first n. NoCandidates on an empty list.
std::vector<RankedCandidate> rank_candidates(const ConditionalProbabilityModel& model,
                                             const Value& y,
                                             std::span<const Record> candidates, size_t n);

struct EventRanking {
  std::string open_id;
  std::vector<RankedCandidate> ranked;
  bool operator==(const EventRanking&) const = default;
};

// open_id,support_id,rank,log_score,normalized_score. An event without
// candidates is written as one row with empty candidate fields.
void write_rankings_csv(std::ostream& out, std::span<const EventRanking> rankings);
std::vector<EventRanking> read_rankings_csv(std::istream& in);

}  // namespace microest

#endif  // MICROEST_RANKING_H_
