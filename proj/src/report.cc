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

#include <cstdio>

#include "microest/csv.h"
#include "microest/pipeline.h"

namespace microest {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_report_csv(std::ostream& out, const EstimationReport& report) {
  std::vector<std::string> header{"run", "test data"};
  for (size_t k = 1; k <= report.top_n; ++k) header.push_back("Top" + std::to_string(k));
  header.push_back("Accuracy");
  write_csv_row(out, header);
  for (const auto& run : report.runs) {
    std::vector<std::string> row{std::to_string(run.run), std::to_string(run.row.test_size)};
    for (size_t h : run.row.hits) row.push_back(std::to_string(h));
    row.push_back(fixed(run.row.accuracy, 4));
    write_csv_row(out, row);
  }
  std::vector<std::string> mean{"mean", fixed(report.mean_test_size, 1)};
  for (double h : report.mean_hits) mean.push_back(fixed(h, 1));
  mean.push_back(fixed(report.mean_accuracy, 4));
  write_csv_row(out, mean);
}

nlohmann::json report_json(const EstimationReport& report, const PipelineConfig& cfg) {
  using nlohmann::json;
  json runs = json::array();
  for (const auto& run : report.runs) {
    json rankings = json::array();
    for (const auto& er : run.rankings) {
      json ranked = json::array();
      for (const auto& rc : er.ranked) {
        ranked.push_back({{"support_id", rc.support_id},
                          {"rank", rc.rank},
                          {"log_score", rc.log_score},
                          {"normalized_score", rc.normalized_score}});
      }
      rankings.push_back({{"open_id", er.open_id}, {"ranked", std::move(ranked)}});
    }
    runs.push_back({{"run", run.run},
                    {"seed", run.seed},
                    {"test_size", run.row.test_size},
                    {"hits", run.row.hits},
                    {"accuracy", run.row.accuracy},
                    {"features", run.features},
                    {"positives", run.assembly.positives.size()},
                    {"negatives", run.assembly.negatives.size()},
                    {"unlabeled", run.assembly.unlabeled.size()},
                    {"em_converged", run.em_converged},
                    {"em_history", em_history_json(run.em_history)},
                    {"rankings", std::move(rankings)}});
  }
  json steps = json::object();
  size_t unresolved = 0;
  for (const auto& [id, step] : report.candidate_step) {
    steps[id] = step ? json(*step) : json();
    if (!step) ++unresolved;
  }
  json candidates = json::array();
  for (const auto& c : report.candidates) {
    candidates.push_back({{"open_id", c.open_id}, {"support_id", c.support_id},
                          {"score", c.score}});
  }
  return {{"format", "microest-report"},
          {"version", 1},
          {"config", to_json(cfg)},
          {"top_n", report.top_n},
          {"runs", std::move(runs)},
          {"mean",
           {{"test_size", report.mean_test_size},
            {"hits", report.mean_hits},
            {"accuracy", report.mean_accuracy}}},
          {"lsh",
           {{"events_without_candidates", unresolved},
            {"step", std::move(steps)},
            {"candidates", std::move(candidates)}}},
          {"model_comparison", report.comparison},
          {"selected_spec", report.selected}};
}

}  // namespace microest
