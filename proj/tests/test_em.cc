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

#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "microest/em.h"
#include "microest/error.h"
#include "microest/rng.h"
#include "test_support.h"

using namespace microest;
using microest::testing::blobs;

namespace {

struct Split {
  std::vector<LabeledExample> labeled;
  std::vector<LabeledExample> unlabeled;
  std::vector<bool> truth;  // parallel to unlabeled
};

// Shuffles and keeps the first n_labeled rows labeled (at least one per class).
Split split(std::vector<LabeledExample> data, size_t n_labeled, uint64_t seed) {
  Rng rng(seed);
  shuffle_in_place(data, rng);
  Split s;
  bool pos = false, neg = false;
  for (auto& e : data) {
    bool need = (e.positive() && !pos) || (!e.positive() && !neg);
    if (s.labeled.size() < n_labeled || need) {
      pos = pos || e.positive();
      neg = neg || !e.positive();
      s.labeled.push_back(e);
    } else {
      s.truth.push_back(e.positive());
      e.label = Label::kUnlabeled;
      e.source_id = "u" + e.source_id;
      s.unlabeled.push_back(e);
    }
  }
  return s;
}

ModelConfig glm(double lambda = 0.01) {
  ModelConfig c;
  c.kind = ModelKind::kGlm;
  c.lambda = lambda;
  return c;
}

}  // namespace

TEST_SUITE("em") {
  TEST_CASE("empty pool is a plain supervised fit") {
    auto data = blobs(30, 30, 1.0, 4, 2);
    auto probe = blobs(20, 20, 1.0, 5, 2);
    ModelConfig rf;
    rf.kind = ModelKind::kRandomForest;
    auto r = em_train(data, {}, rf, EmConfig{}, {}, 17);
    CHECK(r.history.empty());
    CHECK(r.converged);
    CHECK(r.model->predict_proba(probe) == fit(rf, data, 17)->predict_proba(probe));
  }

  TEST_CASE("separated clusters settle fast and recover the truth") {
    auto s = split(blobs(200, 200, 8.0, 7, 2), 20, 3);
    EmConfig cfg;
    auto r = em_train(s.labeled, s.unlabeled, glm(), cfg, {}, 1);
    CHECK(r.converged);
    CHECK(r.history.size() <= 3);
    CHECK(r.history.back().changed_fraction == 0.0);
    REQUIRE(r.pseudo_labels.size() == s.unlabeled.size());
    for (size_t i = 0; i < s.truth.size(); ++i) {
      CHECK((r.pseudo_labels[i] == Label::kPositive) == s.truth[i]);
    }
  }

  TEST_CASE("loop contract") {
    auto s = split(blobs(150, 150, 1.0, 9, 2), 10, 4);
    ModelConfig tree;
    tree.kind = ModelKind::kDecisionTree;
    for (int max_iter : {1, 2, 5, 20}) {
      EmConfig cfg;
      cfg.max_iter = max_iter;
      cfg.convergence_tol = 0.0;  // never satisfied: runs to max_iter
      auto r = em_train(s.labeled, s.unlabeled, tree, cfg, {}, 2);
      CHECK(r.history.size() == static_cast<size_t>(max_iter));
      CHECK_FALSE(r.converged);
      cfg.convergence_tol = 0.05;
      r = em_train(s.labeled, s.unlabeled, tree, cfg, {}, 2);
      CHECK(r.history.size() <= static_cast<size_t>(max_iter));
      CHECK((r.history.back().changed_fraction < cfg.convergence_tol ||
             r.history.back().iteration == max_iter));
      CHECK(r.history.front().changed_fraction == 1.0);
      for (size_t i = 0; i < r.history.size(); ++i) CHECK(r.history[i].iteration == int(i + 1));
    }
  }

  TEST_CASE("labeled examples reach every fit unchanged") {
    auto s = split(blobs(100, 100, 1.5, 2, 3), 12, 8);
    const auto before = s.labeled;
    int fits = 0;
    auto observer = [&](int it, std::span<const LabeledExample> train) {
      ++fits;
      REQUIRE(train.size() >= before.size());
      for (size_t i = 0; i < before.size(); ++i) CHECK(train[i] == before[i]);
      if (it == 1) CHECK(train.size() == before.size());
      for (size_t i = before.size(); i < train.size(); ++i) CHECK(train[i].source_id[0] == 'u');
    };
    for (auto mode : {PseudoLabelMode::kHard, PseudoLabelMode::kSoftWeights}) {
      EmConfig cfg;
      cfg.mode = mode;
      auto r = em_train(s.labeled, s.unlabeled, glm(), cfg, {}, 3, observer);
      CHECK(static_cast<size_t>(fits) >= r.history.size());
      fits = 0;
    }
    CHECK(s.labeled == before);
  }

  TEST_CASE("confidence floor keeps uncertain points out of the fit") {
    auto s = split(blobs(200, 200, 1.0, 12, 2), 20, 6);
    EmConfig cfg;
    cfg.confidence_floor = 0.8;
    const ModelConfig learner = glm();
    std::vector<LabeledExample> previous;
    size_t checked = 0, excluded = 0;
    auto observer = [&](int it, std::span<const LabeledExample> train) {
      if (it > 1) {
        // Rebuild the model that produced these pseudo-labels.
        auto prev = fit(learner, previous, 5);
        size_t included = 0;
        for (size_t i = s.labeled.size(); i < train.size(); ++i) {
          double p = prev->predict_proba(train[i].features);
          CHECK((p <= 1 - cfg.confidence_floor || p >= cfg.confidence_floor));
          CHECK(train[i].positive() == (p >= 0.5));
          ++checked;
          ++included;
        }
        excluded += s.unlabeled.size() - included;
      }
      previous.assign(train.begin(), train.end());
    };
    em_train(s.labeled, s.unlabeled, learner, cfg, {}, 5, observer);
    CHECK(checked > 0);
    CHECK(excluded > 0);
  }

  TEST_CASE("soft mode duplicates every point with class weights") {
    auto s = split(blobs(40, 40, 2.0, 1, 2), 8, 2);
    EmConfig cfg;
    cfg.mode = PseudoLabelMode::kSoftWeights;
    cfg.max_iter = 2;
    cfg.convergence_tol = 0.0;
    size_t extra = 0;
    bool weights_sum_to_one = true;
    auto observer = [&](int it, std::span<const LabeledExample> train) {
      if (it != 2) return;
      extra = train.size() - s.labeled.size();
      for (size_t i = s.labeled.size(); i + 1 < train.size(); i += 2) {
        weights_sum_to_one = weights_sum_to_one &&
                             std::abs(train[i].weight + train[i + 1].weight - 1.0) < 1e-12 &&
                             train[i].positive() && !train[i + 1].positive();
      }
    };
    auto r = em_train(s.labeled, s.unlabeled, glm(), cfg, {}, 1, observer);
    CHECK(extra == 2 * s.unlabeled.size());
    CHECK(weights_sum_to_one);
    CHECK(r.history[1].pseudo_labeled == s.unlabeled.size());
  }

  TEST_CASE("deterministic history") {
    auto s = split(blobs(120, 80, 1.0, 21, 2), 10, 1);
    auto valid = blobs(30, 30, 1.0, 22, 2);
    ModelConfig gbt;
    gbt.kind = ModelKind::kGbt;
    gbt.sample_rate = 0.7;
    auto a = em_train(s.labeled, s.unlabeled, gbt, EmConfig{}, valid, 9);
    auto b = em_train(s.labeled, s.unlabeled, gbt, EmConfig{}, valid, 9);
    REQUIRE(a.history.size() == b.history.size());
    for (size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].changed_fraction == b.history[i].changed_fraction);
      CHECK(a.history[i].valid == b.history[i].valid);
    }
    CHECK(a.pseudo_proba == b.pseudo_proba);
  }

  TEST_CASE("ensemble learners work too") {
    auto s = split(blobs(60, 60, 3.0, 2, 2), 20, 3);
    auto r = em_train(s.labeled, s.unlabeled, default_spec(EnsembleMethod::kBagging), EmConfig{}, {}, 1);
    CHECK(r.converged);
  }

  TEST_CASE("labeled set must hold both classes") {
    auto data = blobs(10, 0, 1.0, 1, 2);
    auto pool = blobs(5, 5, 1.0, 2, 2);
    for (auto& e : pool) e.label = Label::kUnlabeled;
    try {
      em_train(data, pool, glm(), EmConfig{}, {}, 1);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSingleClassLabeled);
    }
  }

  TEST_CASE("config validation and json") {
    EmConfig c;
    c.max_iter = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = EmConfig{};
    c.confidence_floor = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = EmConfig{};
    c.mode = PseudoLabelMode::kSoftWeights;
    c.convergence_tol = 0.01;
    nlohmann::json j = c;
    CHECK(j.get<EmConfig>() == c);
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"iters":3})").get<EmConfig>(), Error);
  }

  TEST_CASE("report layouts") {
    std::vector<EmIteration> h(2);
    h[0] = {1, 1.0, 0, Metrics::from_counts(1, 1, 1, 1)};
    h[1] = {2, 0.0, 5, std::nullopt};
    std::ostringstream out;
    write_em_history_csv(out, h);
    CHECK(out.str() ==
          "iteration,changed_fraction,valid_accuracy,valid_precision,valid_recall,valid_f1\n"
          "1,1,0.5,0.5,0.5,0.5\n2,0,,,,\n");
    std::ostringstream cmp;
    write_em_comparison_csv(cmp, {Metrics::from_counts(8, 2, 2, 8), Metrics::from_counts(9, 2, 1, 8)});
    CHECK(cmp.str().find("em,0.8500 (+0.0500),0.8182 (+0.0182),0.9000 (+0.1000),0.8571 (+0.0571)") !=
          std::string::npos);
  }
}
