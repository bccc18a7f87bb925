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

// microest: command-line front end.
//
//   microest synth  --out DIR             benchmark CSVs plus a runnable config.json
//   microest lsh    --out DIR             adaptive LSH candidates
//   microest curves --out DIR             S-curve table for the schedule
//   microest train  --out DIR             method comparison and EM history
//   microest run    --out DIR             full pipeline report
//   microest eval   --rankings FILE       re-score a rankings CSV
//
// Every subcommand takes --config FILE and --seed N. Failures print
// {"error":{"code":...,"message":...}} on stderr and exit with status 2.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "microest/error.h"
#include "microest/lsh.h"
#include "microest/pipeline.h"
#include "microest/ranking.h"
#include "microest/synthetic.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace microest;

namespace {

struct Options {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out = ".";
  std::string rankings;
  std::string truth;
  size_t top_n = 0;
};

PipelineConfig load_config(const Options& o) {
  PipelineConfig cfg = o.config.empty() ? default_pipeline_config() : load_pipeline_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

std::ofstream open_out(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  const fs::path p = fs::path(o.out) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write '" + p.string() + "'");
  return f;
}

void write_json(const Options& o, const std::string& name, const json& j) {
  auto f = open_out(o, name);
  f << j.dump(2) << '\n';
}

int cmd_synth(const Options& o) {
  PipelineConfig cfg = load_config(o);
  SyntheticParams params = cfg.data.synthetic.value_or(SyntheticParams{});
  SyntheticBenchmark b = generate_synthetic(params, cfg.seed);
  {
    auto f = open_out(o, "support.csv");
    write_csv(b.support, f);
  }
  {
    auto f = open_out(o, "open.csv");
    write_csv(b.open, f);
  }
  {
    auto f = open_out(o, "truth.csv");
    write_truth_csv(f, b.truth);
  }
  PipelineConfig file_cfg = cfg;
  file_cfg.data = DataSource{};
  file_cfg.data.support_path = "support.csv";
  file_cfg.data.open_path = "open.csv";
  file_cfg.data.truth_path = "truth.csv";
  file_cfg.support_features = b.support.schema();
  file_cfg.open_features = b.open.schema();
  file_cfg.canon = b.aliases;
  file_cfg.preprocess.bins = params.bins;
  write_json(o, "config.json", to_json(file_cfg));
  std::cout << json{{"support", b.support.size()},
                    {"events", b.open.size()},
                    {"seed", cfg.seed},
                    {"out", o.out}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_lsh(const Options& o) {
  PipelineConfig cfg = load_config(o);
  PipelineData data = load_pipeline_data(cfg);
  CandidateStage stage = generate_candidates(data, cfg.lsh);
  std::vector<CandidatePair> all;
  json steps = json::object();
  size_t empty = 0;
  for (const auto& [id, res] : stage.by_event) {
    all.insert(all.end(), res.candidates.begin(), res.candidates.end());
    steps[id] = res.step ? json(*res.step) : json();
    if (res.candidates.empty()) ++empty;
  }
  auto f = open_out(o, "candidates.csv");
  write_candidates_csv(f, all);
  std::cout << json{{"events", stage.by_event.size()},
                    {"pairs", all.size()},
                    {"events_without_candidates", empty}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_curves(const Options& o) {
  PipelineConfig cfg = load_config(o);
  std::vector<double> grid = default_similarity_grid();
  auto rows = s_curve_table(cfg.lsh.schedule, grid);
  auto f = open_out(o, "s_curve.csv");
  write_s_curve_csv(f, rows);
  std::cout << json{{"rows", rows.size()}}.dump() << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  PipelineConfig cfg = load_config(o);
  PipelineData data = load_pipeline_data(cfg);
  TrainingStage t = run_training_stage(cfg, data);
  {
    auto f = open_out(o, "comparison.csv");
    write_comparison_csv(f, t.comparison);
  }
  {
    auto f = open_out(o, "em_history.csv");
    write_em_history_csv(f, t.em.history);
  }
  {
    auto f = open_out(o, "em_comparison.csv");
    write_em_comparison_csv(f, t.em_vs_supervised);
  }
  write_json(o, "model.json", t.em.model->to_json());
  json summary = {{"features", t.features},
                  {"comparison", comparison_json(t.comparison)},
                  {"em_history", em_history_json(t.em.history)},
                  {"em_converged", t.em.converged},
                  {"em_vs_supervised", em_comparison_json(t.em_vs_supervised)}};
  write_json(o, "train.json", summary);
  write_comparison_csv(std::cout, t.comparison);
  return 0;
}

int cmd_run(const Options& o) {
  PipelineConfig cfg = load_config(o);
  EstimationReport report = run_pipeline(cfg);
  {
    auto f = open_out(o, "report.csv");
    write_report_csv(f, report);
  }
  for (const auto& run : report.runs) {
    auto f = open_out(o, "rankings_run" + std::to_string(run.run) + ".csv");
    write_rankings_csv(f, run.rankings);
  }
  write_json(o, "report.json", report_json(report, cfg));
  write_report_csv(std::cout, report);
  return 0;
}

int cmd_eval(const Options& o) {
  if (o.rankings.empty()) throw Error(ErrorCode::kInvalidArgument, "--rankings is required");
  std::ifstream rin(o.rankings);
  if (!rin) throw Error(ErrorCode::kIoError, "cannot open '" + o.rankings + "'");
  std::vector<EventRanking> rankings = read_rankings_csv(rin);

  std::map<std::string, std::string> truth;
  size_t top_n = o.top_n;
  if (!o.truth.empty()) {
    std::ifstream tin(o.truth);
    if (!tin) throw Error(ErrorCode::kIoError, "cannot open '" + o.truth + "'");
    truth = read_truth_csv(tin);
  } else {
    PipelineConfig cfg = load_config(o);
    truth = load_pipeline_data(cfg).truth;
    if (top_n == 0) top_n = cfg.top_n;
  }
  if (top_n == 0) top_n = 3;
  TopNRow row = evaluate_topn(rankings, truth, top_n);
  std::cout << json{{"test_size", row.test_size}, {"hits", row.hits}, {"accuracy", row.accuracy}}
                   .dump()
            << '\n';
  return 0;
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Micro record estimation from aggregated open data"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Master seed, overrides the config");
    sub->add_option("--out", o.out, "Output directory");
  };
  auto* synth = app.add_subcommand("synth", "Write a synthetic benchmark");
  auto* lsh = app.add_subcommand("lsh", "Generate LSH candidates");
  auto* curves = app.add_subcommand("curves", "Tabulate S-curves of the schedule");
  auto* train = app.add_subcommand("train", "Compare ensembles and run EM");
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  auto* eval = app.add_subcommand("eval", "Score a saved rankings CSV");
  for (auto* s : {synth, lsh, curves, train, run, eval}) common(s);
  eval->add_option("--rankings", o.rankings, "Rankings CSV")->check(CLI::ExistingFile);
  eval->add_option("--truth", o.truth, "Ground truth CSV (open_id,support_id)")
      ->check(CLI::ExistingFile);
  eval->add_option("--top-n", o.top_n, "Ranks counted as hits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("InvalidArgument", e.what());
    return 2;
  }
  try {
    if (*synth) return cmd_synth(o);
    if (*lsh) return cmd_lsh(o);
    if (*curves) return cmd_curves(o);
    if (*train) return cmd_train(o);
    if (*run) return cmd_run(o);
    if (*eval) return cmd_eval(o);
  } catch (const Error& e) {
    print_error(std::string(error_code_name(e.code())), e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return 2;
  }
  return 0;
}
