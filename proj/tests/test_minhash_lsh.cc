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
#include <sstream>

#include "doctest.h"
#include "microest/error.h"
#include "microest/lsh.h"
#include "microest/minhash.h"
#include "microest/rng.h"
#include "microest/shingle.h"
#include "test_support.h"

using namespace microest;
using microest::testing::set_pair;

namespace {

bool some_band_equal(const MinHashSignature& a, const MinHashSignature& b,
                     const BandingScheme& s) {
  if (a.sentinel || b.sentinel) return false;
  for (size_t k = 0; k < s.bands; ++k) {
    bool same = true;
    for (size_t i = k * s.rows; i < (k + 1) * s.rows; ++i) same = same && a.minima[i] == b.minima[i];
    if (same) return true;
  }
  return false;
}

ShingleSet random_set(Rng& rng, size_t vocab, size_t lo, size_t hi) {
  size_t n = lo + uniform_index(rng, hi - lo + 1);
  ShingleSet s;
  for (size_t i = 0; i < n; ++i) s.insert("t=" + std::to_string(uniform_index(rng, vocab)));
  return s;
}

}  // namespace

TEST_SUITE("s_curve") {
  TEST_CASE("point values") {
    for (const auto& s : default_schedule()) {
      CHECK(s_curve(1.0, s) == 1.0);
      CHECK(s_curve(0.0, s) == 0.0);
    }
    CHECK(s_curve(0.9, {4, 25}) == doctest::Approx(0.2577).epsilon(1e-3));
    CHECK(s_curve(0.5, {20, 5}) == doctest::Approx(0.4700).epsilon(1e-3));
    CHECK(s_curve(0.95, {4, 25}) == doctest::Approx(0.7275).epsilon(1e-3));
  }

  TEST_CASE("bounds and monotonicity on a grid") {
    auto grid = default_similarity_grid();
    REQUIRE(grid.size() == 101);
    for (size_t r = 1; r <= 30; ++r) {
      for (size_t b = 1; b <= 30; ++b) {
        double prev = -1;
        for (double s : grid) {
          double p = s_curve(s, {b, r});
          CHECK(p >= 0.0);
          CHECK(p <= 1.0);
          CHECK(p >= prev);
          prev = p;
          CHECK(s_curve(s, {b + 1, r}) >= p);
          CHECK(s_curve(s, {b, r + 1}) <= p);
        }
      }
    }
  }

  TEST_CASE("table rows and csv") {
    auto rows = s_curve_table(default_schedule(), std::vector<double>{0.0, 1.0});
    REQUIRE(rows.size() == 8);
    for (const auto& r : rows) CHECK(r.probability == r.similarity);
    std::ostringstream out;
    write_s_curve_csv(out, rows);
    CHECK(out.str().rfind("S,bands,rows,probability\n", 0) == 0);
  }

  TEST_CASE("default schedule") {
    auto s = default_schedule();
    CHECK(s == AdaptiveSchedule{{4, 25}, {5, 20}, {10, 10}, {20, 5}});
    CHECK_NOTHROW(validate_schedule(s, 100));
    CHECK_THROWS_AS(validate_schedule({{3, 40}}, 100), Error);
    CHECK_THROWS_AS(validate_schedule({}, 100), Error);
  }
}

TEST_SUITE("minhash") {
  TEST_CASE("deterministic for fixed seed") {
    ShingleSet s({"a=1", "b=2", "c=3"});
    CHECK(minhash_signature(s, 7) == minhash_signature(s, 7));
    CHECK(minhash_signature(s, 7).minima != minhash_signature(s, 8).minima);
    CHECK(minhash_signature(s, 7).size() == 100);
    CHECK(minhash_signature(s, 7, 16).size() == 16);
  }

  TEST_CASE("empty set is the sentinel") {
    auto sig = minhash_signature(ShingleSet(), 1);
    CHECK(sig.sentinel);
    CHECK(sig.size() == 100);
    auto idx = build_index({sig, sig, minhash_signature(ShingleSet({"a"}), 1)}, {20, 5});
    CHECK(idx.candidates(sig).empty());
  }

  TEST_CASE("agreement is an unbiased Jaccard estimate") {
    auto [a, b] = set_pair(10, 20, "u");
    REQUIRE(jaccard(a, b) == 0.5);
    double sum = 0;
    for (uint64_t seed = 0; seed < 200; ++seed) {
      MinHasher h(seed);
      sum += signature_agreement(h.sign(a), h.sign(b));
    }
    CHECK(std::abs(sum / 200 - 0.5) <= 0.05);
  }
}

TEST_SUITE("index") {
  TEST_CASE("identical signatures share every band") {
    auto sig = minhash_signature(ShingleSet({"a", "b", "c"}), 3);
    auto idx = build_index({sig, sig}, {10, 10});
    for (size_t k = 0; k < 10; ++k) CHECK(idx.bucket(k, sig) == std::vector<uint32_t>{0, 1});
  }

  TEST_CASE("agreeing on one band's rows shares only that bucket") {
    MinHashSignature a{"d1", {1, 2, 3, 4}, false};
    MinHashSignature b{"d2", {9, 8, 3, 4}, false};
    auto idx = build_index({a, b}, {2, 2});
    CHECK(idx.bucket(0, a) == std::vector<uint32_t>{0});
    CHECK(idx.bucket(1, a) == std::vector<uint32_t>{0, 1});
    CHECK(idx.candidates(a) == std::vector<uint32_t>{0, 1});
  }

  TEST_CASE("scheme must factor the signature length") {
    auto sig = minhash_signature(ShingleSet({"a"}), 3);
    try {
      build_index({sig}, {3, 40});
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSchemeMismatch);
    }
  }

  TEST_CASE("collisions equal the band-slice predicate") {
    Rng rng(2024);
    std::vector<MinHashSignature> sigs;
    for (int i = 0; i < 200; ++i) {
      sigs.push_back(minhash_signature(i % 50 == 0 ? ShingleSet() : random_set(rng, 14, 2, 7), 11));
    }
    for (const auto& scheme : default_schedule()) {
      auto idx = build_index(sigs, scheme);
      size_t collisions = 0, mismatches = 0;
      for (size_t i = 0; i < sigs.size(); ++i) {
        auto c = idx.candidates(sigs[i]);
        for (size_t j = 0; j < sigs.size(); ++j) {
          if (i == j) continue;
          bool hit = std::binary_search(c.begin(), c.end(), static_cast<uint32_t>(j));
          collisions += hit;
          mismatches += hit != some_band_equal(sigs[i], sigs[j], scheme);
        }
      }
      CHECK(mismatches == 0);
      CHECK(collisions > 0);
    }
  }

  TEST_CASE("rebuild is identical") {
    Rng rng(1);
    std::vector<MinHashSignature> sigs;
    for (int i = 0; i < 50; ++i) sigs.push_back(minhash_signature(random_set(rng, 20, 3, 6), 4));
    auto a = build_index(sigs, {5, 20});
    auto b = build_index(sigs, {5, 20});
    for (const auto& s : sigs) CHECK(a.candidates(s) == b.candidates(s));
    for (size_t k = 0; k < 5; ++k) CHECK(a.bucket_count(k) == b.bucket_count(k));
  }

  TEST_CASE("collision rate follows the S-curve") {
    // 2,000 trials per S; ±0.05 is about five standard errors.
    for (auto [shared, total] : {std::pair<size_t, size_t>{10, 20}, {18, 20}}) {
      std::vector<size_t> hits(4);
      const int trials = 2000;
      for (int t = 0; t < trials; ++t) {
        auto [a, b] = set_pair(shared, total, std::to_string(t));
        MinHasher h(derive_seed(77, {static_cast<uint64_t>(t)}));
        std::vector<MinHashSignature> sigs{h.sign(a), h.sign(b)};
        auto schedule = default_schedule();
        for (size_t k = 0; k < 4; ++k) {
          hits[k] += some_band_equal(sigs[0], sigs[1], schedule[k]);
        }
      }
      auto schedule = default_schedule();
      double s = double(shared) / total;
      for (size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(double(hits[k]) / trials - s_curve(s, schedule[k])) <= 0.05);
      }
    }
  }
}

TEST_SUITE("adaptive query") {
  LshCorpus corpus_of(const std::vector<ShingleSet>& sets, uint64_t seed = 5) {
    std::vector<std::string> ids;
    for (size_t i = 0; i < sets.size(); ++i) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "s%03zu", i);
      ids.push_back(buf);
    }
    return LshCorpus(ids, sets, seed, default_schedule());
  }

  TEST_CASE("exact duplicate is found at the first step with score 1") {
    Rng rng(3);
    std::vector<ShingleSet> sets;
    for (int i = 0; i < 100; ++i) sets.push_back(random_set(rng, 400, 8, 12));
    auto corpus = corpus_of(sets);
    for (size_t i = 0; i < sets.size(); i += 7) {
      auto r = query_adaptive("q", sets[i], corpus);
      REQUIRE(r.step.has_value());
      CHECK(*r.step == 0);
      CHECK(r.steps_probed == 1);
      CHECK(r.candidates.front().score == 1.0);
      bool present = false;
      for (const auto& c : r.candidates) present = present || c.support_id == corpus.id(i);
      CHECK(present);
    }
  }

  TEST_CASE("stops at the first non-empty step") {
    Rng rng(8);
    std::vector<ShingleSet> sets;
    for (int i = 0; i < 200; ++i) sets.push_back(random_set(rng, 60, 9, 12));
    auto corpus = corpus_of(sets);
    std::vector<size_t> by_step(4);
    for (int q = 0; q < 300; ++q) {
      ShingleSet query = random_set(rng, 60, 9, 12);
      auto r = query_adaptive("q", query, corpus);
      auto sig = corpus.hasher().sign(query);
      if (!r.step) {
        CHECK(r.steps_probed == 4);
        CHECK(r.candidates.empty());
        continue;
      }
      ++by_step[*r.step];
      CHECK(r.steps_probed == *r.step + 1);
      for (size_t k = 0; k < *r.step; ++k) CHECK(corpus.index(k).candidates(sig).empty());
      auto expect = corpus.index(*r.step).candidates(sig);
      CHECK(r.candidates.size() == expect.size());
      for (size_t i = 1; i < r.candidates.size(); ++i) {
        const auto& p = r.candidates[i - 1];
        const auto& c = r.candidates[i];
        CHECK((p.score > c.score || (p.score == c.score && p.support_id < c.support_id)));
      }
      for (const auto& c : r.candidates) {
        size_t pos = std::stoul(c.support_id.substr(1));
        CHECK(c.score == jaccard(query, sets[pos]));
      }
    }
    // The corpus is built so that later steps do get exercised.
    CHECK(by_step[2] + by_step[3] > 0);
  }

  TEST_CASE("a 0.76-similar record surfaces only at a looser step") {
    // 16 shared of 21 total tokens: Jaccard 0.7619.
    size_t later = 0, found = 0;
    for (int t = 0; t < 200; ++t) {
      auto [a, b] = set_pair(16, 21, "p" + std::to_string(t));
      auto corpus = LshCorpus({"building_1"}, {b}, derive_seed(9, {uint64_t(t)}), default_schedule());
      auto r = query_adaptive("fire_2", a, corpus);
      if (!r.step) continue;
      ++found;
      later += *r.step > 0;
      REQUIRE(r.candidates.size() == 1);
      CHECK(r.candidates[0].score == doctest::Approx(16.0 / 21));
    }
    // Step 0 fires with probability about 0.005 at this similarity.
    CHECK(found > 150);
    CHECK(later > found * 9 / 10);
  }

  TEST_CASE("no shared token means no candidates") {
    auto corpus = corpus_of({ShingleSet({"a=1", "b=2"}), ShingleSet({"c=3"})});
    auto r = query_adaptive("q", ShingleSet({"z=9", "y=8"}), corpus);
    CHECK(r.candidates.empty());
    CHECK_FALSE(r.step.has_value());
    CHECK(r.steps_probed == 4);
    CHECK(query_adaptive("q", ShingleSet(), corpus).candidates.empty());
  }

  TEST_CASE("min_score floor drops weak candidates and keeps probing") {
    auto [a, b] = set_pair(5, 20, "m");
    auto corpus = corpus_of({b, a});
    auto r = query_adaptive("q", a, corpus, 0.5);
    REQUIRE(r.candidates.size() == 1);
    CHECK(r.candidates[0].support_id == "s001");
  }

  TEST_CASE("identical inputs give identical output") {
    Rng rng(4);
    std::vector<ShingleSet> sets;
    for (int i = 0; i < 80; ++i) sets.push_back(random_set(rng, 30, 5, 8));
    auto c1 = corpus_of(sets, 12);
    auto c2 = corpus_of(sets, 12);
    for (int q = 0; q < 40; ++q) {
      auto query = random_set(rng, 30, 5, 8);
      auto r1 = query_adaptive("q", query, c1);
      auto r2 = query_adaptive("q", query, c2);
      CHECK(r1.candidates == r2.candidates);
      CHECK(r1.step == r2.step);
    }
  }

  TEST_CASE("candidate csv layout") {
    std::vector<CandidatePair> rows{{"fire_1", "b_2", 0.909091}};
    std::ostringstream out;
    write_candidates_csv(out, rows);
    CHECK(out.str() == "open_id,support_id,score\nfire_1,b_2,0.909091\n");
  }
}
