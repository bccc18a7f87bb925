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
#include <map>
#include <sstream>

#include "doctest.h"
#include "microest/error.h"
#include "microest/ranking.h"
#include "microest/rng.h"
#include "test_support.h"

using namespace microest;
using microest::testing::record;

namespace {

// Rows of categorical cells; "" is missing. Column 0 is y.
TabularDataset table(const std::vector<std::vector<std::string>>& rows, size_t n_x) {
  std::vector<FeatureSpec> schema = {{"id", FeatureKind::kIdentifier, FeatureRole::kId},
                                     {"y", FeatureKind::kCategorical, FeatureRole::kOpenOnly}};
  for (size_t i = 0; i < n_x; ++i) {
    schema.push_back({"x" + std::to_string(i + 1), FeatureKind::kCategorical, FeatureRole::kCommon});
  }
  std::vector<Record> out;
  for (size_t r = 0; r < rows.size(); ++r) {
    Record rec;
    rec.id = "r" + std::to_string(r);
    rec.values["id"] = rec.id;
    for (size_t c = 0; c < rows[r].size(); ++c) {
      const std::string& name = schema[c + 1].name;
      rec.values[name] = rows[r][c].empty() ? Value() : Value(rows[r][c]);
    }
    out.push_back(std::move(rec));
  }
  return TabularDataset(schema, out);
}

void repeat(std::vector<std::vector<std::string>>& rows, int n, std::vector<std::string> row) {
  for (int i = 0; i < n; ++i) rows.push_back(row);
}

Record candidate(std::string id, std::vector<std::string> xs) {
  Record r;
  r.id = id;
  for (size_t i = 0; i < xs.size(); ++i) {
    r.values["x" + std::to_string(i + 1)] = xs[i].empty() ? Value() : Value(xs[i]);
  }
  return r;
}

// y=A: x1 is p 8 of 10; y=B: p 4 of 10. x2 splits 5/5 under both.
TabularDataset hand_table() {
  std::vector<std::vector<std::string>> rows;
  repeat(rows, 4, {"A", "p", "m"});
  repeat(rows, 4, {"A", "p", "n"});
  repeat(rows, 1, {"A", "q", "m"});
  repeat(rows, 1, {"A", "q", "n"});
  repeat(rows, 2, {"B", "p", "m"});
  repeat(rows, 2, {"B", "p", "n"});
  repeat(rows, 3, {"B", "q", "m"});
  repeat(rows, 3, {"B", "q", "n"});
  return table(rows, 2);
}

// y=A: x1 = p 7 of 10; y=B: x1 = p 3 of 10. Pr(p) = Pr(q) = 0.5.
TabularDataset two_candidate_table() {
  std::vector<std::vector<std::string>> rows;
  repeat(rows, 7, {"A", "p"});
  repeat(rows, 3, {"A", "q"});
  repeat(rows, 3, {"B", "p"});
  repeat(rows, 7, {"B", "q"});
  return table(rows, 1);
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

RankingOptions tiny_smoothing() {
  RankingOptions o;
  o.smoothing = 1e-12;
  return o;
}

}  // namespace

TEST_SUITE("fit") {
  TEST_CASE("uniform y gives equal priors") {
    auto m = fit_cond_prob(table({{"lo", "a"}, {"hi", "b"}, {"lo", "b"}, {"hi", "a"}}, 1), "y", {"x1"});
    REQUIRE(m.priors().size() == 2);
    CHECK(m.priors()[0] == 0.5);
    CHECK(m.priors()[1] == 0.5);
    CHECK(m.y_levels() == std::vector<std::string>{"hi", "lo"});
  }

  TEST_CASE("unseen combination gets the smoothed share") {
    std::vector<std::vector<std::string>> rows;
    repeat(rows, 10, {"high", "a"});
    repeat(rows, 10, {"low", "b"});
    auto m = fit_cond_prob(table(rows, 1), "y", {"x1"});
    size_t high = m.y_level(std::string("high"));
    const auto& f = m.features()[0];
    size_t b = *f.level(std::string("b"));
    CHECK(f.likelihood[high][b] == doctest::Approx(1.0 / 12).epsilon(1e-15));
  }

  TEST_CASE("every table sums to one and stays positive") {
    Rng rng(3);
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 50; ++i) {
      rows.push_back({std::string(1, char('A' + uniform_index(rng, 3))),
                      uniform01(rng) < 0.1 ? "" : std::string(1, char('a' + uniform_index(rng, 4))),
                      std::string(1, char('m' + uniform_index(rng, 2)))});
    }
    auto m = fit_cond_prob(table(rows, 2), "y", {"x1", "x2"});
    double s = 0;
    for (double p : m.priors()) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& f : m.features()) {
      double e = 0;
      for (double p : f.evidence) {
        CHECK(p > 0);
        e += p;
      }
      CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
      for (const auto& row : f.likelihood) {
        double l = 0;
        for (double p : row) {
          CHECK(p > 0);
          l += p;
        }
        CHECK(l == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("continuous target and feature are quantile binned") {
    std::vector<FeatureSpec> schema = {{"id", FeatureKind::kIdentifier, FeatureRole::kId},
                                       {"damage", FeatureKind::kContinuous, FeatureRole::kOpenOnly},
                                       {"area", FeatureKind::kContinuous, FeatureRole::kCommon}};
    std::vector<Record> rows;
    for (int i = 0; i < 40; ++i) {
      std::string id = "r" + std::to_string(i);
      rows.push_back(record(id, {{"id", id}, {"damage", double(i)}, {"area", double(2 * i)}}));
    }
    RankingOptions o;
    o.x_bins = 5;
    auto m = fit_cond_prob(TabularDataset(schema, rows), "damage", {"area"}, o);
    CHECK(m.y_continuous());
    CHECK(m.y_binning().bin_count() == 4);
    CHECK(m.priors().size() == 4);
    CHECK(m.features()[0].binning.bin_count() == 5);
    CHECK(m.y_level(35.0) == 3);
    CHECK(m.y_level(0.0) == 0);
  }

  TEST_CASE("declared binning overrides the quantile fit") {
    std::vector<FeatureSpec> schema = {{"id", FeatureKind::kIdentifier, FeatureRole::kId},
                                       {"y", FeatureKind::kCategorical, FeatureRole::kOpenOnly},
                                       {"area", FeatureKind::kContinuous, FeatureRole::kCommon}};
    std::vector<Record> rows;
    for (int i = 0; i < 10; ++i) {
      std::string id = "r" + std::to_string(i);
      rows.push_back(record(id, {{"id", id}, {"y", std::string(i < 5 ? "a" : "b")}, {"area", double(i)}}));
    }
    RankingOptions o;
    o.binning["area"] = Binning{{4.5}, {}};
    auto m = fit_cond_prob(TabularDataset(schema, rows), "y", {"area"}, o);
    CHECK(m.features()[0].binning.cuts == std::vector<double>{4.5});
  }

  TEST_CASE("fit errors") {
    auto t = two_candidate_table();
    CHECK(code_of([&] { fit_cond_prob(table({{"", "a"}}, 1), "y", {"x1"}); }) == ErrorCode::kEmptyTraining);
    CHECK(code_of([&] { fit_cond_prob(t, "y", {"nope"}); }) == ErrorCode::kMissingColumn);
    CHECK(code_of([&] { fit_cond_prob(t, "nope", {"x1"}); }) == ErrorCode::kMissingColumn);
    RankingOptions o;
    o.smoothing = 0;
    CHECK(code_of([&] { fit_cond_prob(t, "y", {"x1"}, o); }) == ErrorCode::kInvalidArgument);
    ConditionalProbabilityModel empty;
    CHECK(code_of([&] { empty.score(std::string("A"), candidate("c", {"p"})); }) ==
          ErrorCode::kUnfittedModel);
    auto m = fit_cond_prob(t, "y", {"x1"});
    CHECK(code_of([&] { m.score(std::string("Z"), candidate("c", {"p"})); }) ==
          ErrorCode::kInvalidArgument);
  }
}

TEST_SUITE("score") {
  TEST_CASE("hand-computed contingency table") {
    auto m = fit_cond_prob(hand_table(), "y", {"x1", "x2"}, tiny_smoothing());
    double s = m.score(std::string("A"), candidate("c", {"p", "m"}));
    CHECK(s == doctest::Approx(std::log(0.5 * 0.8 * 0.5 / (0.6 * 0.5))).epsilon(1e-9));
    CHECK(std::exp(s) == doctest::Approx(2.0 / 3).epsilon(1e-9));
  }

  TEST_CASE("all x missing leaves the prior") {
    auto m = fit_cond_prob(hand_table(), "y", {"x1", "x2"});
    size_t a = m.y_level(std::string("A"));
    CHECK(m.score(std::string("A"), candidate("c", {"", ""})) == std::log(m.priors()[a]));
    CHECK(m.score(std::string("A"), candidate("c", {"zzz", ""})) == std::log(m.priors()[a]));
  }

  TEST_CASE("log space equals a linear-space count oracle") {
    Rng rng(99);
    for (int t = 0; t < 300; ++t) {
      const size_t n_x = 1 + uniform_index(rng, 3);
      const size_t ky = 2 + uniform_index(rng, 3);
      std::vector<size_t> kx(n_x);
      for (auto& k : kx) k = 2 + uniform_index(rng, 3);
      const double s = 0.25 + 2 * uniform01(rng);
      std::vector<std::vector<std::string>> rows;
      const size_t n = 5 + uniform_index(rng, 40);
      for (size_t r = 0; r < n; ++r) {
        std::vector<std::string> row{"y" + std::to_string(uniform_index(rng, ky))};
        for (size_t i = 0; i < n_x; ++i) {
          row.push_back(uniform01(rng) < 0.15 ? "" : "v" + std::to_string(uniform_index(rng, kx[i])));
        }
        rows.push_back(row);
      }
      RankingOptions o;
      o.smoothing = s;
      auto m = fit_cond_prob(table(rows, n_x), "y", [&] {
        std::vector<std::string> xs;
        for (size_t i = 0; i < n_x; ++i) xs.push_back("x" + std::to_string(i + 1));
        return xs;
      }(), o);
      // Independent linear-space oracle on observed levels.
      std::map<std::string, double> ny;
      std::vector<std::map<std::string, double>> nv(n_x);
      std::vector<std::map<std::pair<std::string, std::string>, double>> nvy(n_x);
      std::vector<double> ni(n_x);
      for (const auto& row : rows) {
        ny[row[0]] += 1;
        for (size_t i = 0; i < n_x; ++i) {
          if (row[i + 1].empty()) continue;
          nv[i][row[i + 1]] += 1;
          nvy[i][{row[i + 1], row[0]}] += 1;
          ni[i] += 1;
        }
      }
      for (int q = 0; q < 5; ++q) {
        const std::string& y = rows[uniform_index(rng, rows.size())][0];
        std::vector<std::string> xs;
        for (size_t i = 0; i < n_x; ++i) {
          xs.push_back(uniform01(rng) < 0.1 ? "" : "v" + std::to_string(uniform_index(rng, kx[i])));
        }
        double linear = (ny[y] + s) / (double(n) + s * double(ny.size()));
        for (size_t i = 0; i < n_x; ++i) {
          if (xs[i].empty() || !nv[i].count(xs[i])) continue;
          const double levels = double(nv[i].size());
          // Rows of class y with x_i present.
          double ny_i = 0;
          for (const auto& [k, c] : nvy[i]) ny_i += k.second == y ? c : 0;
          auto it = nvy[i].find({xs[i], y});
          double nvy_c = it == nvy[i].end() ? 0 : it->second;
          linear *= (nvy_c + s) / (ny_i + s * levels);
          linear /= (nv[i][xs[i]] + s) / (ni[i] + s * levels);
        }
        double got = std::exp(m.score(y, candidate("c", xs)));
        CHECK(got == doctest::Approx(linear).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("scaling every count keeps the order") {
    Rng rng(7);
    std::vector<std::vector<std::string>> rows;
    for (int r = 0; r < 40; ++r) {
      rows.push_back({"y" + std::to_string(uniform_index(rng, 3)), "a" + std::to_string(uniform_index(rng, 4)),
                      "b" + std::to_string(uniform_index(rng, 3))});
    }
    auto scaled = rows;
    for (int k = 0; k < 2; ++k) scaled.insert(scaled.end(), rows.begin(), rows.end());
    RankingOptions one, three;
    three.smoothing = 3.0;
    auto m1 = fit_cond_prob(table(rows, 2), "y", {"x1", "x2"}, one);
    auto m3 = fit_cond_prob(table(scaled, 2), "y", {"x1", "x2"}, three);
    std::vector<Record> cands;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 3; ++b) {
        cands.push_back(candidate("c" + std::to_string(a) + std::to_string(b),
                                  {"a" + std::to_string(a), "b" + std::to_string(b)}));
      }
    }
    for (const char* y : {"y0", "y1", "y2"}) {
      auto r1 = rank_candidates(m1, std::string(y), cands, cands.size());
      auto r3 = rank_candidates(m3, std::string(y), cands, cands.size());
      for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].support_id == r3[i].support_id);
        CHECK(r1[i].log_score == doctest::Approx(r3[i].log_score).epsilon(1e-12));
      }
    }
  }
}

TEST_SUITE("rank") {
  TEST_CASE("the 0.7 candidate beats the 0.3 candidate") {
    auto m = fit_cond_prob(two_candidate_table(), "y", {"x1"}, tiny_smoothing());
    std::vector<Record> c{candidate("x2", {"q"}), candidate("x1", {"p"})};
    auto r = rank_candidates(m, std::string("A"), c, 3);
    REQUIRE(r.size() == 2);
    CHECK(r[0].support_id == "x1");
    CHECK(r[0].rank == 1);
    CHECK(r[1].rank == 2);
    CHECK(std::exp(r[0].log_score) == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(std::exp(r[1].log_score) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(r[0].normalized_score == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(r[1].normalized_score == doctest::Approx(0.3).epsilon(1e-9));
  }

  TEST_CASE("single candidate") {
    auto m = fit_cond_prob(two_candidate_table(), "y", {"x1"});
    std::vector<Record> c{candidate("only", {"q"})};
    auto r = rank_candidates(m, std::string("B"), c, 3);
    REQUIRE(r.size() == 1);
    CHECK(r[0].rank == 1);
    CHECK(r[0].normalized_score == 1.0);
  }

  TEST_CASE("order does not depend on input order; ties by id") {
    auto m = fit_cond_prob(hand_table(), "y", {"x1", "x2"});
    std::vector<Record> c{candidate("d", {"p", "m"}), candidate("b", {"q", "n"}), candidate("a", {"p", "m"}),
                          candidate("c", {"q", "m"}), candidate("e", {"", "n"})};
    auto base = rank_candidates(m, std::string("A"), c, 5);
    double total = 0;
    for (size_t i = 0; i < base.size(); ++i) {
      CHECK(base[i].rank == i + 1);
      if (i > 0) CHECK(base[i - 1].log_score >= base[i].log_score);
      total += base[i].normalized_score;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(base[0].support_id == "a");
    CHECK(base[1].support_id == "d");
    std::sort(c.begin(), c.end(), [](const Record& x, const Record& y) { return x.id > y.id; });
    do {
      CHECK(rank_candidates(m, std::string("A"), c, 5) == base);
    } while (std::next_permutation(c.begin(), c.end(), [](const Record& x, const Record& y) { return x.id > y.id; }));
  }

  TEST_CASE("top n truncates; softmax covers everyone") {
    auto m = fit_cond_prob(hand_table(), "y", {"x1", "x2"});
    std::vector<Record> c{candidate("a", {"p", "m"}), candidate("b", {"q", "n"}), candidate("c", {"q", "m"})};
    auto all = rank_candidates(m, std::string("B"), c, 3);
    auto top = rank_candidates(m, std::string("B"), c, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0] == all[0]);
    CHECK(code_of([&] { rank_candidates(m, std::string("B"), c, 0); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([&] { rank_candidates(m, std::string("B"), {}, 3); }) == ErrorCode::kNoCandidates);
  }

  TEST_CASE("rankings csv round trip") {
    std::vector<EventRanking> r = {
        {"fire_1", {{"b_2", -0.5, 0.75, 1}, {"b_7", -1.5, 0.25, 2}}},
        {"fire_2", {}},
        {"fire_3", {{"b_1", 0.125, 1.0, 1}}}};
    std::ostringstream out;
    write_rankings_csv(out, r);
    CHECK(out.str().rfind("open_id,support_id,rank,log_score,normalized_score\n", 0) == 0);
    std::istringstream in(out.str());
    CHECK(read_rankings_csv(in) == r);
  }
}
