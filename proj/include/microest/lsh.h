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

#ifndef MICROEST_LSH_H_
#define MICROEST_LSH_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "microest/minhash.h"
#include "microest/shingle.h"

namespace microest {

struct BandingScheme {
  size_t bands = 0;
  size_t rows = 0;

  size_t signature_length() const { return bands * rows; }
  bool operator==(const BandingScheme&) const = default;
};

// Strict to loose. Every entry must factor the signature length.
using AdaptiveSchedule = std::vector<BandingScheme>;

// (4,25), (5,20), (10,10), (20,5).
AdaptiveSchedule default_schedule();
void validate_schedule(const AdaptiveSchedule& schedule, size_t signature_length);

// Probability that two sets with Jaccard `similarity` share at least one band
// bucket: 1 - (1 - S^r)^b.
double s_curve(double similarity, const BandingScheme& scheme);

struct SCurveRow {
  double similarity;
  BandingScheme scheme;
  double probability;
};

std::vector<SCurveRow> s_curve_table(const AdaptiveSchedule& schedule,
                                     std::span<const double> grid);
// 0, 0.01, ..., 1.
std::vector<double> default_similarity_grid();
void write_s_curve_csv(std::ostream& out, std::span<const SCurveRow> rows);

// Buckets a fixed set of signatures under one banding scheme. Band k covers
// signature positions [k*rows, (k+1)*rows). Bucket keys are 64-bit hashes of
// the slice; membership is confirmed by comparing the slice itself, so two
// records collide exactly when some band slice is identical.
class LshIndex {
 public:
  LshIndex(std::shared_ptr<const std::vector<MinHashSignature>> signatures,
           BandingScheme scheme);

  const BandingScheme& scheme() const { return scheme_; }
  size_t size() const { return signatures_->size(); }
  const MinHashSignature& signature(size_t i) const { return (*signatures_)[i]; }

  // Positions of all indexed records sharing a bucket with `query`, ascending.
  std::vector<uint32_t> candidates(const MinHashSignature& query) const;

  // Positions stored in band `band` under the bucket of `query`'s slice.
  std::vector<uint32_t> bucket(size_t band, const MinHashSignature& query) const;

  size_t bucket_count(size_t band) const { return bands_.at(band).size(); }

 private:
  uint64_t band_key(const MinHashSignature& sig, size_t band) const;
  bool same_slice(const MinHashSignature& a, const MinHashSignature& b,
                  size_t band) const;

  std::shared_ptr<const std::vector<MinHashSignature>> signatures_;
  BandingScheme scheme_;
  std::vector<std::unordered_map<uint64_t, std::vector<uint32_t>>> bands_;
};

LshIndex build_index(std::vector<MinHashSignature> signatures, BandingScheme scheme);

struct CandidatePair {
  std::string open_id;
  std::string support_id;
  double score = 0;  // exact Jaccard of the shingle sets

  bool operator==(const CandidatePair&) const = default;
};

// Descending score, ties by ascending support id.
void sort_candidates(std::vector<CandidatePair>& candidates);

// Support records with their shingle sets, signed once and banded under every
// scheme of the schedule. Immutable after construction; queries are const.
class LshCorpus {
 public:
  LshCorpus(std::vector<std::string> ids, std::vector<ShingleSet> shingles,
            uint64_t seed, AdaptiveSchedule schedule,
            size_t n_hashes = kDefaultSignatureLength);

  size_t size() const { return ids_.size(); }
  const std::string& id(size_t i) const { return ids_[i]; }
  const ShingleSet& shingles(size_t i) const { return shingles_[i]; }
  const MinHasher& hasher() const { return hasher_; }
  const AdaptiveSchedule& schedule() const { return schedule_; }
  const LshIndex& index(size_t step) const { return indexes_.at(step); }

 private:
  std::vector<std::string> ids_;
  std::vector<ShingleSet> shingles_;
  MinHasher hasher_;
  AdaptiveSchedule schedule_;
  std::vector<LshIndex> indexes_;
};

struct AdaptiveResult {
  std::vector<CandidatePair> candidates;
  // Schedule position that produced the candidates; nullopt when none did.
  std::optional<size_t> step;
  size_t steps_probed = 0;
};

// Probes schedule entries in order and stops at the first one whose buckets
// yield a candidate (after the optional `min_score` floor). Scores are exact
// Jaccard on the original shingle sets.
AdaptiveResult query_adaptive(const std::string& open_id, const ShingleSet& query,
                              const LshCorpus& corpus, double min_score = 0.0);

void write_candidates_csv(std::ostream& out, std::span<const CandidatePair> rows);

}  // namespace microest

#endif  // MICROEST_LSH_H_
