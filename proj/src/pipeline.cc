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

#include "microest/pipeline.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "microest/classifier.h"
#include "microest/encoder.h"
#include "microest/error.h"
#include "microest/rng.h"

namespace microest {
namespace {

std::map<std::string, std::string> load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return read_truth_csv(in);
}

// Classification view of the registry: imputed, skew-normalized and with
// redundant columns removed. Fixed for the whole pipeline.
TabularDataset prepare_support(const TabularDataset& support, const PreprocessConfig& cfg) {
  std::string category = cfg.impute_category.value_or(default_impute_category(support));
  TabularDataset ds = category.empty() ? support : impute_missing(support, category);
  ds = normalize_skewed(ds, cfg.skew_threshold).data;
  return drop_redundant(ds, cfg.correlation_threshold).data;
}

struct Split {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> valid;
};

Split stratified_split(std::vector<LabeledExample> examples, double valid_fraction,
                       uint64_t seed) {
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < examples.size(); ++i) {
    (examples[i].positive() ? pos : neg).push_back(i);
  }
  Rng rng(seed);
  shuffle_in_place(pos, rng);
  shuffle_in_place(neg, rng);
  std::vector<char> in_valid(examples.size(), 0);
  for (const auto* cls : {&pos, &neg}) {
    const size_t k = static_cast<size_t>(std::llround(valid_fraction * cls->size()));
    for (size_t i = 0; i < k; ++i) in_valid[(*cls)[i]] = 1;
  }
  Split s;
  for (size_t i = 0; i < examples.size(); ++i) {
    (in_valid[i] ? s.valid : s.train).push_back(std::move(examples[i]));
  }
  return s;
}

// Re-encodes examples through a lookup by source id.
void reencode(std::vector<LabeledExample>& examples,
              const std::unordered_map<std::string, std::vector<double>>& vectors) {
  for (auto& e : examples) e.features = vectors.at(e.source_id);
}

class PipelineRunner {
 public:
  PipelineRunner(const PipelineConfig& cfg, const PipelineData& data)
      : cfg_(cfg), data_(data) {
    prepared_ = prepare_support(data.support, cfg.preprocess);
    full_encoder_ = Encoder::fit(prepared_, "");
    for (const auto& ev : data.open.rows()) {
      auto t = data.truth.find(ev.id);
      if (t != data.truth.end() && data.support.row_index(t->second)) linked_.push_back(ev.id);
    }
    if (linked_.size() < 2) {
      throw Error(ErrorCode::kNoPositives, "need at least two events linked to the registry");
    }
  }

  EstimationReport run() {
    EstimationReport report;
    report.top_n = cfg_.top_n;
    if (candidates_.by_event.empty()) candidates_ = generate_candidates(data_, cfg_.lsh);
    for (const auto& [open_id, res] : candidates_.by_event) {
      report.candidate_step[open_id] = res.step;
      report.candidates.insert(report.candidates.end(), res.candidates.begin(),
                               res.candidates.end());
    }
    for (size_t r = 0; r < cfg_.n_runs; ++r) {
      report.runs.push_back(run_once(r, report));
    }
    report.mean_hits.assign(cfg_.top_n, 0.0);
    for (const auto& run : report.runs) {
      report.mean_accuracy += run.row.accuracy;
      report.mean_test_size += static_cast<double>(run.row.test_size);
      for (size_t k = 0; k < cfg_.top_n; ++k) {
        report.mean_hits[k] += static_cast<double>(run.row.hits[k]);
      }
    }
    const double n = static_cast<double>(report.runs.size());
    report.mean_accuracy /= n;
    report.mean_test_size /= n;
    for (double& h : report.mean_hits) h /= n;
    return report;
  }

 private:
  LabeledExample example(const Encoder& enc, const std::string& id, Label label) const {
    LabeledExample e = enc.apply(prepared_.row(id));
    e.label = label;
    e.source_id = id;
    return e;
  }

  struct RunSetup {
    uint64_t seed = 0;
    std::set<std::string> test_ids;
    TrainingSetAssembly assembly;
    std::vector<LabeledExample> train, valid, unlabeled;
    std::vector<std::string> features;
    std::unordered_map<std::string, std::vector<double>> vectors;
  };

 public:
  // Split, training-set assembly and feature selection for run r (0-based).
  RunSetup setup(size_t r) {
    if (candidates_.by_event.empty()) candidates_ = generate_candidates(data_, cfg_.lsh);
    RunSetup s;
    s.seed = derive_seed(cfg_.seed, {100, r});
    const uint64_t seed = s.seed;

    // Held-out events.
    std::vector<std::string> order = linked_;
    Rng rng(derive_seed(seed, {1}));
    shuffle_in_place(order, rng);
    size_t n_test = static_cast<size_t>(
        std::llround(cfg_.training.test_fraction * static_cast<double>(order.size())));
    n_test = std::clamp<size_t>(n_test, 1, order.size() - 1);
    s.test_ids.insert(order.begin(), order.begin() + n_test);
    std::vector<std::string> train_links;
    for (size_t i = n_test; i < order.size(); ++i) {
      train_links.push_back(data_.truth.at(order[i]));
    }
    std::sort(train_links.begin(), train_links.end());
    train_links.erase(std::unique(train_links.begin(), train_links.end()), train_links.end());

    s.assembly = assemble_training(candidates_, train_links, data_.support,
                                   cfg_.training.negative_ratio, derive_seed(seed, {2}));
    if (s.assembly.negatives.empty()) {
      throw Error(ErrorCode::kSingleClass, "no never-candidate records left for negatives");
    }
    std::vector<LabeledExample> labeled;
    for (const auto& id : s.assembly.positives) {
      labeled.push_back(example(full_encoder_, id, Label::kPositive));
    }
    for (const auto& id : s.assembly.negatives) {
      labeled.push_back(example(full_encoder_, id, Label::kNegative));
    }
    Split split = stratified_split(std::move(labeled), cfg_.training.valid_fraction,
                                   derive_seed(seed, {3}));
    s.train = std::move(split.train);
    s.valid = std::move(split.valid);
    if (cfg_.training.resample) {
      s.train = resample(s.train, *cfg_.training.resample, cfg_.training.resample_ratio,
                         derive_seed(seed, {4}));
    }

    // Feature selection by forest importance.
    ModelConfig forest;
    forest.kind = ModelKind::kRandomForest;
    ModelPtr rf = fit(forest, s.train, derive_seed(seed, {5}));
    for (const auto& fi : feature_importance(*rf, full_encoder_.dimension_sources())) {
      if (s.features.size() >= cfg_.training.top_features) break;
      s.features.push_back(fi.feature);
    }
    Encoder enc = Encoder::fit(prepared_, "", s.features);
    for (const auto& row : prepared_.rows()) s.vectors[row.id] = enc.apply(row).features;
    reencode(s.train, s.vectors);
    reencode(s.valid, s.vectors);
    for (const auto& id : s.assembly.unlabeled) {
      LabeledExample e;
      e.features = s.vectors.at(id);
      e.source_id = id;
      s.unlabeled.push_back(std::move(e));
    }
    return s;
  }

  TrainingStage training_stage() {
    RunSetup s = setup(0);
    TrainingStage t;
    t.features = s.features;
    t.assembly = s.assembly;
    t.comparison = select_best_method(cfg_.methods, s.train, s.valid, derive_seed(s.seed, {6}));
    t.em = em_train(s.train, s.unlabeled, t.comparison.best, cfg_.em, s.valid,
                    derive_seed(s.seed, {7}));
    PredictorPtr supervised = fit_learner(t.comparison.best, s.train, derive_seed(s.seed, {7}));
    t.em_vs_supervised.supervised = evaluate(*supervised, s.valid);
    t.em_vs_supervised.em = evaluate(*t.em.model, s.valid);
    return t;
  }

 private:
  RunReport run_once(size_t r, EstimationReport& report) {
    RunSetup s = setup(r);
    const uint64_t seed = s.seed;
    const std::set<std::string>& test_ids = s.test_ids;
    const auto& vectors = s.vectors;
    const auto& train = s.train;
    const auto& unlabeled = s.unlabeled;
    const auto& valid = s.valid;
    RunReport out;
    out.run = r + 1;
    out.seed = seed;
    out.features = s.features;
    out.assembly = std::move(s.assembly);

    if (r == 0) {
      MethodComparison cmp =
          select_best_method(cfg_.methods, train, valid, derive_seed(seed, {6}));
      report.comparison = comparison_json(cmp);
      report.selected = cmp.best;
    }
    EmResult em = em_train(train, unlabeled, report.selected, cfg_.em, valid,
                           derive_seed(seed, {7}));
    out.em_history = em.history;
    out.em_converged = em.converged;

    // Ranking model from the training events and their records.
    std::vector<std::string> x = cfg_.ranking.x_features.empty() ? out.features
                                                                 : cfg_.ranking.x_features;
    ConditionalProbabilityModel ranker = fit_ranker(test_ids, x);

    const Value missing;
    for (const auto& ev : data_.open.rows()) {
      if (!test_ids.count(ev.id)) continue;
      EventRanking er{ev.id, {}};
      const auto& cands = candidates_.by_event.at(ev.id).candidates;
      const Value& y = ev.values.count(cfg_.ranking.y_feature)
                           ? ev.at(cfg_.ranking.y_feature)
                           : missing;
      if (!cands.empty() && !is_missing(y)) {
        std::vector<Record> keep, all;
        for (const auto& c : cands) {
          const Record& rec = data_.support.row(c.support_id);
          all.push_back(rec);
          if (em.model->predict_proba(vectors.at(c.support_id)) >= cfg_.training.threshold) {
            keep.push_back(rec);
          }
        }
        if (keep.empty() && cfg_.training.fallback == FilterFallback::kKeepAll) {
          keep = std::move(all);
        }
        if (!keep.empty()) er.ranked = rank_candidates(ranker, y, keep, cfg_.top_n);
      }
      out.rankings.push_back(std::move(er));
    }
    out.row = evaluate_topn(out.rankings, data_.truth, cfg_.top_n);
    return out;
  }

  ConditionalProbabilityModel fit_ranker(const std::set<std::string>& test_ids,
                                         const std::vector<std::string>& x) const {
    const std::string& y = cfg_.ranking.y_feature;
    const FeatureSpec* yspec = data_.open.find(y);
    if (yspec == nullptr) {
      throw Error(ErrorCode::kMissingColumn, "ranking target '" + y + "' not in open data");
    }
    std::vector<FeatureSpec> schema = data_.support.schema();
    for (const auto& f : schema) {
      if (f.name == y) {
        throw Error(ErrorCode::kInvalidConfig, "ranking target '" + y + "' clashes with a registry feature");
      }
    }
    schema.push_back({y, yspec->kind, FeatureRole::kOpenOnly});
    std::vector<Record> rows;
    for (const auto& ev : data_.open.rows()) {
      if (test_ids.count(ev.id)) continue;
      auto t = data_.truth.find(ev.id);
      if (t == data_.truth.end() || !data_.support.row_index(t->second)) continue;
      Record rec = data_.support.row(t->second);
      rec.values[y] = ev.at(y);
      // A record linked to two events would repeat its id.
      rec.id = ev.id;
      rec.values[data_.support.id_feature().name] = ev.id;
      rows.push_back(std::move(rec));
    }
    RankingOptions opt;
    opt.smoothing = cfg_.ranking.smoothing;
    opt.y_bins = cfg_.ranking.y_bins;
    opt.x_bins = cfg_.ranking.x_bins;
    opt.binning = cfg_.preprocess.binning;
    return fit_cond_prob(TabularDataset(std::move(schema), std::move(rows)), y, x, opt);
  }

  const PipelineConfig& cfg_;
  const PipelineData& data_;
  TabularDataset prepared_;
  Encoder full_encoder_;
  std::vector<std::string> linked_;
  CandidateStage candidates_;
};

}  // namespace

PipelineData load_pipeline_data(const PipelineConfig& cfg) {
  cfg.validate();
  PipelineData d;
  std::vector<std::array<std::string, 3>> aliases = cfg.canon;
  if (cfg.data.synthetic) {
    SyntheticBenchmark b = generate_synthetic(*cfg.data.synthetic, cfg.seed);
    d.support = std::move(b.support);
    d.open = std::move(b.open);
    d.truth = std::move(b.truth);
    aliases.insert(aliases.begin(), b.aliases.begin(), b.aliases.end());
  } else {
    d.support = load_csv(cfg.data.support_path, cfg.support_features);
    d.open = load_csv(cfg.data.open_path, cfg.open_features);
    d.truth = load_truth(cfg.data.truth_path);
  }
  d.common = common_features(d.support.schema());
  if (d.common.empty()) throw Error(ErrorCode::kInvalidConfig, "no common features declared");
  for (const auto& f : d.common) {
    const FeatureSpec* o = d.open.find(f.name);
    if (o == nullptr || o->kind != f.kind || o->role != FeatureRole::kCommon) {
      throw Error(ErrorCode::kInvalidConfig,
                  "common feature '" + f.name + "' must appear with the same kind in both datasets");
    }
  }
  for (const auto& a : aliases) d.canon.add_alias(a[0], a[1], a[2]);
  d.canon.binning = cfg.preprocess.binning;
  fit_common_binning(d.canon, d.support, d.common, cfg.preprocess.bins);
  return d;
}

CandidateStage generate_candidates(const PipelineData& data, const LshConfig& cfg) {
  std::vector<std::string> ids;
  std::vector<ShingleSet> shingles;
  for (const auto& r : data.support.rows()) {
    ids.push_back(r.id);
    shingles.push_back(tokenize_common(r, data.common, data.canon));
  }
  LshCorpus corpus(std::move(ids), std::move(shingles), cfg.seed, cfg.schedule, cfg.n_hashes);
  CandidateStage out;
  for (const auto& ev : data.open.rows()) {
    AdaptiveResult res =
        query_adaptive(ev.id, tokenize_common(ev, data.common, data.canon), corpus, cfg.min_score);
    for (const auto& c : res.candidates) out.members.insert(c.support_id);
    out.by_event.emplace(ev.id, std::move(res));
  }
  return out;
}

TrainingSetAssembly assemble_training(const CandidateStage& candidates,
                                      const std::vector<std::string>& linked,
                                      const TabularDataset& support, double negative_ratio,
                                      uint64_t seed) {
  if (linked.empty()) throw Error(ErrorCode::kNoPositives, "no linked records to learn from");
  TrainingSetAssembly out;
  std::set<std::string> positive;
  for (const auto& id : linked) {
    if (!support.row_index(id)) {
      throw Error(ErrorCode::kInvalidArgument, "linked record '" + id + "' is not in the registry");
    }
    if (positive.insert(id).second) out.positives.push_back(id);
  }
  std::vector<std::string> pool;
  for (const auto& r : support.rows()) {
    if (!candidates.members.count(r.id) && !positive.count(r.id)) pool.push_back(r.id);
  }
  Rng rng(seed);
  shuffle_in_place(pool, rng);
  const size_t want = static_cast<size_t>(
      std::llround(negative_ratio * static_cast<double>(out.positives.size())));
  pool.resize(std::min(want, pool.size()));
  std::sort(pool.begin(), pool.end());
  out.negatives = std::move(pool);
  for (const auto& id : candidates.members) {
    if (!positive.count(id)) out.unlabeled.push_back(id);
  }
  return out;
}

TopNRow evaluate_topn(std::span<const EventRanking> rankings,
                      const std::map<std::string, std::string>& truth, size_t top_n) {
  if (top_n < 1) throw Error(ErrorCode::kInvalidArgument, "top_n must be >= 1");
  TopNRow row;
  row.hits.assign(top_n, 0);
  row.test_size = rankings.size();
  for (const auto& er : rankings) {
    auto t = truth.find(er.open_id);
    if (t == truth.end()) {
      throw Error(ErrorCode::kUnknownEvent, "no ground truth for event '" + er.open_id + "'");
    }
    for (const auto& rc : er.ranked) {
      if (rc.support_id == t->second && rc.rank >= 1 && rc.rank <= top_n) {
        ++row.hits[rc.rank - 1];
        break;
      }
    }
  }
  size_t total = 0;
  for (size_t h : row.hits) total += h;
  row.accuracy = row.test_size == 0
                     ? 0.0
                     : static_cast<double>(total) / static_cast<double>(row.test_size);
  return row;
}

EstimationReport run_pipeline(const PipelineConfig& cfg, const PipelineData& data) {
  cfg.validate();
  PipelineRunner runner(cfg, data);
  return runner.run();
}

TrainingStage run_training_stage(const PipelineConfig& cfg, const PipelineData& data) {
  cfg.validate();
  PipelineRunner runner(cfg, data);
  return runner.training_stage();
}

EstimationReport run_pipeline(const PipelineConfig& cfg) {
  PipelineData data = load_pipeline_data(cfg);
  return run_pipeline(cfg, data);
}

}  // namespace microest
