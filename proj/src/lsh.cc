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

#include "microest/lsh.h"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "microest/csv.h"
#include "microest/error.h"
#include "microest/rng.h"

namespace microest {

AdaptiveSchedule default_schedule() { return {{4, 25}, {5, 20}, {10, 10}, {20, 5}}; }

void validate_schedule(const AdaptiveSchedule& schedule, size_t signature_length) {
  if (schedule.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "adaptive schedule is empty");
  }
  for (const auto& s : schedule) {
    if (s.bands == 0 || s.rows == 0 || s.signature_length() != signature_length) {
      throw Error(ErrorCode::kSchemeMismatch,
                  "scheme (" + std::to_string(s.bands) + "," +
                      std::to_string(s.rows) + ") does not factor signature length " +
                      std::to_string(signature_length));
    }
  }
}

double s_curve(double similarity, const BandingScheme& scheme) {
  if (!(similarity >= 0.0 && similarity <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "similarity must lie in [0, 1]");
  }
  const double r = static_cast<double>(scheme.rows);
  const double b = static_cast<double>(scheme.bands);
  return 1.0 - std::pow(1.0 - std::pow(similarity, r), b);
}

std::vector<SCurveRow> s_curve_table(const AdaptiveSchedule& schedule,
                                     std::span<const double> grid) {
  std::vector<SCurveRow> rows;
  rows.reserve(schedule.size() * grid.size());
  for (const auto& scheme : schedule) {
    for (double s : grid) rows.push_back({s, scheme, s_curve(s, scheme)});
  }
  return rows;
}

std::vector<double> default_similarity_grid() {
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[i] = i / 100.0;
  return grid;
}

void write_s_curve_csv(std::ostream& out, std::span<const SCurveRow> rows) {
  out << "S,bands,rows,probability\n";
  for (const auto& r : rows) {
    out << format_number(r.similarity) << ',' << r.scheme.bands << ','
        << r.scheme.rows << ',' << format_number(r.probability) << '\n';
  }
}

LshIndex::LshIndex(std::shared_ptr<const std::vector<MinHashSignature>> signatures,
                   BandingScheme scheme)
    : signatures_(std::move(signatures)), scheme_(scheme) {
  const size_t length =
      signatures_->empty() ? scheme.signature_length() : signatures_->front().size();
  validate_schedule({scheme}, length);
  bands_.resize(scheme_.bands);
  for (size_t i = 0; i < signatures_->size(); ++i) {
    const MinHashSignature& sig = (*signatures_)[i];
    if (sig.size() != length) {
      throw Error(ErrorCode::kSchemeMismatch, "signature lengths differ in corpus");
    }
    if (sig.sentinel) continue;
    for (size_t k = 0; k < scheme_.bands; ++k) {
      bands_[k][band_key(sig, k)].push_back(static_cast<uint32_t>(i));
    }
  }
}

uint64_t LshIndex::band_key(const MinHashSignature& sig, size_t band) const {
  uint64_t h = mix64(band);
  const size_t begin = band * scheme_.rows;
  for (size_t j = begin; j < begin + scheme_.rows; ++j) h = mix64(h ^ sig.minima[j]);
  return h;
}

bool LshIndex::same_slice(const MinHashSignature& a, const MinHashSignature& b,
                          size_t band) const {
  const size_t begin = band * scheme_.rows;
  return std::equal(a.minima.begin() + begin, a.minima.begin() + begin + scheme_.rows,
                    b.minima.begin() + begin);
}

std::vector<uint32_t> LshIndex::bucket(size_t band, const MinHashSignature& query) const {
  std::vector<uint32_t> out;
  if (query.sentinel) return out;
  if (query.size() != scheme_.signature_length()) {
    throw Error(ErrorCode::kSchemeMismatch, "query signature has the wrong length");
  }
  auto it = bands_.at(band).find(band_key(query, band));
  if (it == bands_[band].end()) return out;
  for (uint32_t pos : it->second) {
    if (same_slice((*signatures_)[pos], query, band)) out.push_back(pos);
  }
  return out;
}

std::vector<uint32_t> LshIndex::candidates(const MinHashSignature& query) const {
  std::vector<uint32_t> out;
  for (size_t k = 0; k < scheme_.bands; ++k) {
    std::vector<uint32_t> b = bucket(k, query);
    out.insert(out.end(), b.begin(), b.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

LshIndex build_index(std::vector<MinHashSignature> signatures, BandingScheme scheme) {
  return LshIndex(
      std::make_shared<const std::vector<MinHashSignature>>(std::move(signatures)),
      scheme);
}

void sort_candidates(std::vector<CandidatePair>& candidates) {
  std::sort(candidates.begin(), candidates.end(),
            [](const CandidatePair& a, const CandidatePair& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.support_id != b.support_id) return a.support_id < b.support_id;
              return a.open_id < b.open_id;
            });
}

LshCorpus::LshCorpus(std::vector<std::string> ids, std::vector<ShingleSet> shingles,
                     uint64_t seed, AdaptiveSchedule schedule, size_t n_hashes)
    : ids_(std::move(ids)),
      shingles_(std::move(shingles)),
      hasher_(seed, n_hashes),
      schedule_(std::move(schedule)) {
  if (ids_.size() != shingles_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ids and shingle sets differ in count");
  }
  validate_schedule(schedule_, n_hashes);
  auto signatures = std::make_shared<std::vector<MinHashSignature>>();
  signatures->reserve(ids_.size());
  for (size_t i = 0; i < ids_.size(); ++i) {
    signatures->push_back(hasher_.sign(shingles_[i], ids_[i]));
  }
  std::shared_ptr<const std::vector<MinHashSignature>> shared = std::move(signatures);
  for (const auto& scheme : schedule_) indexes_.emplace_back(shared, scheme);
}

AdaptiveResult query_adaptive(const std::string& open_id, const ShingleSet& query,
                              const LshCorpus& corpus, double min_score) {
  AdaptiveResult result;
  const MinHashSignature sig = corpus.hasher().sign(query, open_id);
  for (size_t step = 0; step < corpus.schedule().size(); ++step) {
    ++result.steps_probed;
    for (uint32_t pos : corpus.index(step).candidates(sig)) {
      double score = jaccard(query, corpus.shingles(pos));
      if (score < min_score) continue;
      result.candidates.push_back({open_id, corpus.id(pos), score});
    }
    if (!result.candidates.empty()) {
      result.step = step;
      break;
    }
  }
  sort_candidates(result.candidates);
  return result;
}

void write_candidates_csv(std::ostream& out, std::span<const CandidatePair> rows) {
  out << "open_id,support_id,score\n";
  for (const auto& r : rows) {
    out << csv_escape(r.open_id) << ',' << csv_escape(r.support_id) << ','
        << format_number(r.score) << '\n';
  }
}

}  // namespace microest
