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
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "microest/classifier.h"
#include "microest/encoder.h"
#include "microest/error.h"
#include "microest/metrics.h"
#include "microest/model_config.h"
#include "microest/resample.h"
#include "microest/rng.h"
#include "test_support.h"

using namespace microest;
using microest::testing::blobs;
using microest::testing::example;
using microest::testing::record;
using microest::testing::training_accuracy;
using microest::testing::xor_set;

namespace {

const ModelKind kAllKinds[] = {ModelKind::kNaiveBayes, ModelKind::kDecisionTree,
                               ModelKind::kRandomForest, ModelKind::kGbt, ModelKind::kGlm};

ModelConfig config(ModelKind kind) {
  ModelConfig c;
  c.kind = kind;
  return c;
}

std::vector<bool> predict(const Predictor& m, const std::vector<LabeledExample>& ex) {
  std::vector<bool> out;
  for (double p : m.predict_proba(ex)) out.push_back(p >= 0.5);
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

TabularDataset small_table() {
  std::vector<FeatureSpec> schema = {
      {"id", FeatureKind::kIdentifier, FeatureRole::kId},
      {"color", FeatureKind::kCategorical, FeatureRole::kCommon},
      {"size", FeatureKind::kContinuous, FeatureRole::kCommon},
      {"fire", FeatureKind::kCategorical, FeatureRole::kLabel}};
  std::vector<Record> rows = {
      record("a", {{"id", std::string("a")}, {"color", std::string("red")}, {"size", 8.0}, {"fire", std::string("1")}}),
      record("b", {{"id", std::string("b")}, {"color", std::string("green")}, {"size", 12.0}, {"fire", std::string("0")}}),
      record("c", {{"id", std::string("c")}, {"color", std::string("blue")}, {"size", Value()}, {"fire", std::string("no")}}),
  };
  return TabularDataset(schema, rows);
}

}  // namespace

TEST_SUITE("encoder") {
  TEST_CASE("one-hot blocks and z-scores") {
    auto [ex, enc] = encode(small_table(), "fire");
    REQUIRE(enc.dimension() == 4);
    CHECK(enc.dimension_sources() ==
          std::vector<std::string>{"color", "color", "color", "size"});
    // Levels sorted: blue, green, red. size: mean 10, population std 2.
    CHECK(ex[0].features == std::vector<double>{0, 0, 1, -1});
    CHECK(ex[1].features == std::vector<double>{0, 1, 0, 1});
    CHECK(ex[2].features == std::vector<double>{1, 0, 0, 0});
    CHECK(ex[0].label == Label::kPositive);
    CHECK(ex[2].label == Label::kNegative);
    CHECK(ex[1].source_id == "b");
  }

  TEST_CASE("unseen category becomes a zero block") {
    auto [ex, enc] = encode(small_table(), "fire");
    auto r = record("z", {{"id", std::string("z")}, {"color", std::string("purple")}, {"size", 12.0}, {"fire", Value()}});
    auto e = enc.apply(r);
    CHECK(e.features == std::vector<double>{0, 0, 0, 1});
    CHECK(e.label == Label::kUnlabeled);
  }

  TEST_CASE("labels") {
    CHECK(parse_label(std::string("YES")) == Label::kPositive);
    CHECK(parse_label(std::string("false")) == Label::kNegative);
    CHECK(parse_label(Value()) == Label::kUnlabeled);
    CHECK(code_of([] { parse_label(std::string("maybe")); }) == ErrorCode::kUnknownLabelValue);
  }

  TEST_CASE("json round trip") {
    auto [ex, enc] = encode(small_table(), "fire");
    auto again = Encoder::from_json(nlohmann::json::parse(enc.to_json().dump()));
    CHECK(again.apply(small_table()) == ex);
  }
}

TEST_SUITE("resample") {
  std::vector<LabeledExample> imbalanced(size_t pos, size_t neg) {
    std::vector<LabeledExample> out;
    for (size_t i = 0; i < pos + neg; ++i) out.push_back(example({double(i)}, i < pos));
    return out;
  }

  TEST_CASE("oversample minority to the ratio") {
    auto out = resample(imbalanced(10, 100), ResampleStrategy::kOversample, 0.5, 1);
    auto c = count_classes(out);
    CHECK(c.positive == 50);
    CHECK(c.negative == 100);
  }

  TEST_CASE("undersample the large imbalanced counts") {
    auto out = resample(imbalanced(1653, 19040), ResampleStrategy::kUndersample, 0.5, 1);
    auto c = count_classes(out);
    CHECK(c.positive == 1653);
    CHECK(c.negative == 3306);
  }

  TEST_CASE("both meets in the middle") {
    auto out = resample(imbalanced(10, 1000), ResampleStrategy::kBoth, 0.5, 1);
    auto c = count_classes(out);
    CHECK(c.positive == 71);   // sqrt(10 * 500)
    CHECK(c.negative == 141);  // sqrt(1000 * 20)
  }

  TEST_CASE("balanced input is a fixpoint") {
    auto in = imbalanced(20, 20);
    for (auto s : {ResampleStrategy::kOversample, ResampleStrategy::kUndersample, ResampleStrategy::kBoth}) {
      CHECK(resample(in, s, 0.5, 3) == in);
    }
  }

  TEST_CASE("only multiplicities change") {
    auto in = imbalanced(7, 90);
    for (auto s : {ResampleStrategy::kOversample, ResampleStrategy::kUndersample, ResampleStrategy::kBoth}) {
      for (const auto& e : resample(in, s, 0.8, 11)) {
        CHECK(std::find(in.begin(), in.end(), e) != in.end());
      }
    }
  }

  TEST_CASE("single class is rejected") {
    CHECK(code_of([] { resample(imbalanced(0, 5), ResampleStrategy::kBoth, 0.5, 1); }) ==
          ErrorCode::kSingleClass);
  }

  TEST_CASE("deterministic per seed") {
    auto in = imbalanced(9, 200);
    CHECK(resample(in, ResampleStrategy::kBoth, 0.5, 4) == resample(in, ResampleStrategy::kBoth, 0.5, 4));
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("hand-worked counts") {
    auto m = Metrics::from_counts(9, 1, 2, 88);
    CHECK(m.precision == doctest::Approx(0.9));
    CHECK(m.recall == doctest::Approx(0.8182).epsilon(1e-4));
    CHECK(m.f1 == doctest::Approx(0.8571).epsilon(1e-4));
    CHECK(m.accuracy == doctest::Approx(0.97));
  }

  TEST_CASE("perfect and all-negative predictors") {
    std::vector<bool> actual = {true, false, true, false};
    auto p = confusion_metrics(actual, actual);
    CHECK(p.accuracy == 1.0);
    CHECK(p.precision == 1.0);
    CHECK(p.recall == 1.0);
    CHECK(p.f1 == 1.0);
    auto n = confusion_metrics({false, false, false, false}, actual);
    CHECK(n.precision == 0.0);
    CHECK(n.recall == 0.0);
    CHECK(n.f1 == 0.0);
    CHECK(n.accuracy == 0.5);
  }

  TEST_CASE("evaluate agrees with a direct confusion count") {
    Rng rng(17);
    for (int t = 0; t < 200; ++t) {
      size_t n = 1 + uniform_index(rng, 40);
      std::vector<double> w(1 + uniform_index(rng, 3));
      for (auto& v : w) v = standard_normal(rng);
      auto model = std::make_shared<GlmModel>(w, standard_normal(rng), 0.5, 0.0);
      std::vector<LabeledExample> test;
      size_t tp = 0, fp = 0, fn = 0, tn = 0;
      double threshold = 0.05 + 0.9 * uniform01(rng);
      for (size_t i = 0; i < n; ++i) {
        std::vector<double> x(w.size());
        for (auto& v : x) v = standard_normal(rng);
        bool y = uniform01(rng) < 0.4;
        double z = model->intercept();
        for (size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
        bool pred = 1.0 / (1.0 + std::exp(-z)) >= threshold;
        tp += pred && y;
        fp += pred && !y;
        fn += !pred && y;
        tn += !pred && !y;
        test.push_back(example(x, y));
      }
      auto m = evaluate(*model, test, threshold);
      CHECK(m.tp == tp);
      CHECK(m.fp == fp);
      CHECK(m.fn == fn);
      CHECK(m.tn == tn);
    }
  }

  TEST_CASE("evaluate rejects a threshold outside (0,1)") {
    auto model = std::make_shared<GlmModel>(std::vector<double>{1.0}, 0.0, 0.5, 0.0);
    std::vector<LabeledExample> t{example({1}, true)};
    CHECK(code_of([&] { evaluate(*model, t, 1.0); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_SUITE("model config") {
  TEST_CASE("parameters must suit the kind") {
    ModelConfig c = config(ModelKind::kRandomForest);
    c.alpha = 0.5;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::kInvalidConfig);
    c = config(ModelKind::kGlm);
    c.alpha = 1.5;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::kInvalidConfig);
    c = config(ModelKind::kGbt);
    c.sample_rate = 0.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::kInvalidConfig);
    c = config(ModelKind::kDecisionTree);
    c.nbins = 1;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::kInvalidConfig);
  }

  TEST_CASE("json round trip and set by name") {
    ModelConfig c = config(ModelKind::kGbt);
    c.set("ntrees", 110);
    c.set("learning_rate", 0.05);
    nlohmann::json j = c;
    CHECK(j.get<ModelConfig>() == c);
    CHECK(c.ntrees_or_default() == 110);
    c.set("alpha", 0.1);
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::kInvalidConfig);
  }
}

TEST_SUITE("fit") {
  TEST_CASE("every kind separates blobs") {
    auto data = blobs(100, 100, 5.0, 21);
    for (auto kind : kAllKinds) {
      auto m = fit(config(kind), data, 1);
      CAPTURE(to_string(kind));
      CHECK(training_accuracy(predict(*m, data), data) >= 0.95);
      CHECK(m->kind() == kind);
    }
  }

  TEST_CASE("linearly separable data: glm is perfect") {
    std::vector<LabeledExample> data;
    for (int i = 0; i < 40; ++i) data.push_back(example({double(i % 7), i < 20 ? -1.0 - i % 3 : 1.0 + i % 3}, i >= 20));
    auto m = fit(config(ModelKind::kGlm), data, 1);
    CHECK(training_accuracy(predict(*m, data), data) == 1.0);
  }

  TEST_CASE("xor: depth-2 tree succeeds where glm cannot") {
    auto data = xor_set(25);
    ModelConfig tree = config(ModelKind::kDecisionTree);
    tree.max_depth = 2;
    CHECK(training_accuracy(predict(*fit(tree, data, 1), data), data) == 1.0);
    CHECK(training_accuracy(predict(*fit(config(ModelKind::kGlm), data, 1), data), data) <= 0.75);
  }

  TEST_CASE("same seed gives identical predictions") {
    auto data = blobs(60, 90, 1.0, 8, 4);
    auto probe = blobs(20, 20, 1.0, 99, 4);
    for (auto kind : kAllKinds) {
      auto a = fit(config(kind), data, 5)->predict_proba(probe);
      auto b = fit(config(kind), data, 5)->predict_proba(probe);
      CHECK(a == b);
    }
  }

  TEST_CASE("a heavily duplicated positive point predicts positive") {
    std::vector<LabeledExample> data;
    for (int i = 0; i < 6; ++i) data.push_back(example({1.0, 2.0}, true));
    data.push_back(example({-1.0, 0.0}, false));
    data.push_back(example({-2.0, 1.0}, false));
    data.push_back(example({0.0, -1.0}, false));
    data.push_back(example({-1.5, -2.0}, false));
    for (auto kind : kAllKinds) {
      CAPTURE(to_string(kind));
      CHECK(fit(config(kind), data, 2)->predict_proba(std::vector<double>{1.0, 2.0}) > 0.5);
    }
  }

  TEST_CASE("zero glm predicts one half") {
    GlmModel m({0.0, 0.0, 0.0}, 0.0, 0.5, 0.0);
    CHECK(m.predict_proba(std::vector<double>{3.0, -1.0, 7.0}) == 0.5);
  }

  TEST_CASE("probabilities stay in range on random probes") {
    auto data = blobs(50, 150, 1.5, 3, 3);
    Rng rng(6);
    for (auto kind : kAllKinds) {
      auto m = fit(config(kind), data, 7);
      for (int i = 0; i < 1000; ++i) {
        std::vector<double> x(3);
        for (auto& v : x) v = 10 * standard_normal(rng);
        double p = m->predict_proba(x);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
      }
    }
  }

  TEST_CASE("naive bayes never reaches 0 or 1") {
    auto data = blobs(100, 100, 8.0, 12, 5);
    auto m = fit(config(ModelKind::kNaiveBayes), data, 1);
    for (double v : {-1e300, -1e6, -10.0, 0.0, 10.0, 1e6, 1e300}) {
      std::vector<double> x(5, v);
      double p = m->predict_proba(x);
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }

  TEST_CASE("wrong dimension is rejected") {
    auto m = fit(config(ModelKind::kGlm), blobs(10, 10, 3, 1), 1);
    CHECK(code_of([&] { m->predict_proba(std::vector<double>{1.0}); }) ==
          ErrorCode::kDimensionMismatch);
  }

  TEST_CASE("training set errors") {
    std::vector<LabeledExample> one{example({1}, true), example({2}, true)};
    CHECK(code_of([&] { fit(config(ModelKind::kGlm), one, 1); }) == ErrorCode::kSingleClass);
    std::vector<LabeledExample> flat{example({1, 1}, true), example({1, 1}, false)};
    CHECK(code_of([&] { fit(config(ModelKind::kDecisionTree), flat, 1); }) ==
          ErrorCode::kDegenerateData);
    std::vector<LabeledExample> unl{example({1}, true), example({2}, false), LabeledExample{{3}, Label::kUnlabeled, 1, ""}};
    CHECK(code_of([&] { fit(config(ModelKind::kGlm), unl, 1); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("stronger penalty never grows the l1 norm") {
    auto data = blobs(80, 120, 1.0, 31, 6);
    for (double alpha : {0.0, 0.5, 1.0}) {
      double prev = INFINITY;
      for (double lambda : {1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0}) {
        double l1 = fit_glm(data, alpha, lambda)->l1_norm();
        CAPTURE(alpha);
        CAPTURE(lambda);
        CHECK(l1 <= prev + 1e-9);
        prev = l1;
      }
    }
  }

  TEST_CASE("lasso zeroes out noise coefficients") {
    auto data = blobs(100, 100, 2.0, 5, 1);
    Rng rng(2);
    for (auto& e : data) {
      for (int k = 0; k < 4; ++k) e.features.push_back(standard_normal(rng));
    }
    auto m = fit_glm(data, 1.0, 0.1);
    CHECK(std::abs(m->coefficients()[0]) > 0.1);
    size_t zeros = 0;
    for (size_t j = 1; j < 5; ++j) zeros += m->coefficients()[j] == 0.0;
    CHECK(zeros >= 3);
  }

  TEST_CASE("save and load reproduce predictions") {
    auto data = blobs(40, 60, 1.5, 2, 3);
    auto probe = blobs(10, 10, 1.5, 77, 3);
    for (auto kind : kAllKinds) {
      auto m = fit(config(kind), data, 3);
      auto text = m->to_json().dump();
      auto back = load_model(nlohmann::json::parse(text));
      CHECK(back->kind() == kind);
      CHECK(back->predict_proba(probe) == m->predict_proba(probe));
    }
    auto bad = fit(config(ModelKind::kGlm), data, 3)->to_json();
    bad["version"] = 99;
    CHECK_THROWS_AS(load_model(bad), Error);
  }
}

TEST_SUITE("importance") {
  TEST_CASE("a deterministic feature takes all the importance") {
    std::vector<FeatureSpec> schema = {
        {"id", FeatureKind::kIdentifier, FeatureRole::kId},
        {"key", FeatureKind::kCategorical, FeatureRole::kCommon},
        {"n1", FeatureKind::kContinuous, FeatureRole::kCommon},
        {"n2", FeatureKind::kContinuous, FeatureRole::kCommon},
        {"y", FeatureKind::kCategorical, FeatureRole::kLabel}};
    Rng rng(4);
    std::vector<Record> rows;
    for (int i = 0; i < 300; ++i) {
      std::string id = "r" + std::to_string(i);
      int k = static_cast<int>(uniform_index(rng, 3));
      rows.push_back(record(id, {{"id", id},
                                 {"key", std::string(1, char('a' + k))},
                                 {"n1", standard_normal(rng)},
                                 {"n2", standard_normal(rng)},
                                 {"y", std::string(k == 1 ? "1" : "0")}}));
    }
    auto [ex, enc] = encode(TabularDataset(schema, rows), "y");
    auto forest = fit(config(ModelKind::kRandomForest), ex, 9);
    auto imp = feature_importance(*forest, enc.dimension_sources());
    REQUIRE(imp.size() == 3);
    CHECK(imp[0].feature == "key");
    CHECK(imp[0].importance > 0.9);
    double sum = 0;
    for (const auto& f : imp) sum += f.importance;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("noise features share importance about evenly") {
    std::vector<double> mean(5, 0.0);
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) {
      Rng rng(100 + s);
      std::vector<LabeledExample> data;
      for (int i = 0; i < 200; ++i) {
        std::vector<double> x(5);
        for (auto& v : x) v = standard_normal(rng);
        data.push_back(example(x, uniform01(rng) < 0.5));
      }
      auto forest = fit(config(ModelKind::kRandomForest), data, s);
      auto imp = dimension_importance(*forest);
      double sum = std::accumulate(imp.begin(), imp.end(), 0.0);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      for (size_t j = 0; j < 5; ++j) mean[j] += imp[j] / seeds;
    }
    for (double m : mean) {
      CHECK(m > 0.15);
      CHECK(m < 0.25);
    }
  }

  TEST_CASE("only forests report importance") {
    auto m = fit(config(ModelKind::kGbt), blobs(20, 20, 3, 1), 1);
    CHECK(code_of([&] { dimension_importance(*m); }) == ErrorCode::kWrongModelKind);
  }
}
