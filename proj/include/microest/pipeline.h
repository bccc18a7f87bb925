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

#ifndef MICROEST_PIPELINE_H_
#define MICROEST_PIPELINE_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "microest/binning.h"
#include "microest/dataset.h"
#include "microest/em.h"
#include "microest/ensemble.h"
#include "microest/lsh.h"
#include "microest/preprocess.h"
#include "microest/ranking.h"
#include "microest/resample.h"
#include "microest/synthetic.h"

namespace microest {

// Where the records come from: a generated benchmark (seeded with the
// pipeline seed) or three CSV files.
struct DataSource {
  std::optional<SyntheticParams> synthetic;
  std::string support_path;
  std::string open_path;
  std::string truth_path;  // open_id,support_id
  bool operator==(const DataSource&) const = default;
};

struct PreprocessConfig {
  std::optional<std::string> impute_category;  // default: first common categorical
  double skew_threshold = 1.0;
  double correlation_threshold = 0.98;
  size_t bins = 10;                        // quantile bins for continuous common tokens
  std::map<std::string, Binning> binning;  // declared binnings, by feature
  bool operator==(const PreprocessConfig&) const = default;
};

struct LshConfig {
  uint64_t seed = 1;
  AdaptiveSchedule schedule = default_schedule();
  size_t n_hashes = kDefaultSignatureLength;
  double min_score = 0.0;
  bool operator==(const LshConfig&) const = default;
};

// What happens to an event whose candidates are all classified negative.
enum class FilterFallback { kKeepAll, kDropAll };

struct TrainingConfig {
  double test_fraction = 0.1;     // of linked events, per run
  double negative_ratio = 11.5;   // negatives per positive, before resampling
  double valid_fraction = 0.25;   // of the labeled set, stratified
  std::optional<ResampleStrategy> resample = ResampleStrategy::kBoth;
  double resample_ratio = 0.5;
  size_t top_features = 10;
  double threshold = 0.5;
  FilterFallback fallback = FilterFallback::kKeepAll;
  bool operator==(const TrainingConfig&) const = default;
};

struct RankingConfig {
  std::string y_feature = "damage";
  std::vector<std::string> x_features;  // empty: the selected top features
  double smoothing = 1.0;
  size_t y_bins = 4;
  size_t x_bins = 10;
  bool operator==(const RankingConfig&) const = default;
};

struct PipelineConfig {
  DataSource data;
  // Schemas for CSV inputs; ignored for synthetic data.
  std::vector<FeatureSpec> support_features;
  std::vector<FeatureSpec> open_features;
  std::vector<std::array<std::string, 3>> canon;  // (feature, from, to)
  PreprocessConfig preprocess;
  LshConfig lsh;
  TrainingConfig training;
  std::vector<MethodGrid> methods;  // compared in this order
  EmConfig em;
  RankingConfig ranking;
  size_t n_runs = 10;
  size_t top_n = 3;
  uint64_t seed = 42;

  void validate() const;  // InvalidConfig
};

// Synthetic data, bagging/boosting/stacking grids and the defaults above.
PipelineConfig default_pipeline_config();

nlohmann::json to_json(const PipelineConfig& cfg);
// Relative data paths resolve against base_dir.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::string& base_dir = "");
PipelineConfig load_pipeline_config(const std::string& path);

// Inputs after loading: datasets, links and the token canonicalization.
struct PipelineData {
  TabularDataset support;
  TabularDataset open;
  std::map<std::string, std::string> truth;
  std::vector<FeatureSpec> common;
  Canonicalization canon;
};

PipelineData load_pipeline_data(const PipelineConfig& cfg);

struct CandidateStage {
  std::map<std::string, AdaptiveResult> by_event;  // open id -> adaptive result
  std::set<std::string> members;                   // every support id in some list
};

CandidateStage generate_candidates(const PipelineData& data, const LshConfig& cfg);

// Support ids by role. Positives are the linked records; negatives are a
// sample of records that never entered any candidate list; the unlabeled
// pool is every other candidate-list member.
struct TrainingSetAssembly {
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  std::vector<std::string> unlabeled;
};

// NoPositives when `linked` is empty. Negatives are capped by availability.
TrainingSetAssembly assemble_training(const CandidateStage& candidates,
                                      const std::vector<std::string>& linked,
                                      const TabularDataset& support, double negative_ratio,
                                      uint64_t seed);

struct TopNRow {
  size_t test_size = 0;
  std::vector<size_t> hits;  // hits[k] = events whose true record is at rank k + 1
  double accuracy = 0;       // sum(hits) / test_size
};

// UnknownEvent when a ranking names an event without ground truth.
TopNRow evaluate_topn(std::span<const EventRanking> rankings,
                      const std::map<std::string, std::string>& truth, size_t top_n);

struct RunReport {
  size_t run = 0;
  uint64_t seed = 0;
  TopNRow row;
  std::vector<std::string> features;  // selected for the classifier
  std::vector<EmIteration> em_history;
  bool em_converged = false;
  TrainingSetAssembly assembly;
  std::vector<EventRanking> rankings;
};

struct EstimationReport {
  std::vector<RunReport> runs;
  size_t top_n = 3;
  double mean_accuracy = 0;
  std::vector<double> mean_hits;
  double mean_test_size = 0;
  std::vector<CandidatePair> candidates;
  std::map<std::string, std::optional<size_t>> candidate_step;  // open id -> schedule step
  nlohmann::json comparison;
  EnsembleSpec selected;
};

EstimationReport run_pipeline(const PipelineConfig& cfg);
EstimationReport run_pipeline(const PipelineConfig& cfg, const PipelineData& data);

// Run 1's training half: method comparison, then EM with the winner and
// the same learner fit without the unlabeled pool, both scored on the
// validation split.
struct TrainingStage {
  std::vector<std::string> features;
  TrainingSetAssembly assembly;
  MethodComparison comparison;
  EmResult em;
  EmComparison em_vs_supervised;
};

TrainingStage run_training_stage(const PipelineConfig& cfg, const PipelineData& data);

// run,test data,Top1,...,TopN,Accuracy with a closing mean row.
void write_report_csv(std::ostream& out, const EstimationReport& report);
nlohmann::json report_json(const EstimationReport& report, const PipelineConfig& cfg);

}  // namespace microest

#endif  // MICROEST_PIPELINE_H_
