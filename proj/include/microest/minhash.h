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

#ifndef MICROEST_MINHASH_H_
#define MICROEST_MINHASH_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "microest/shingle.h"

namespace microest {

inline constexpr size_t kDefaultSignatureLength = 100;

// 64-bit token hash (FNV-1a followed by a SplitMix64 avalanche).
uint64_t token_hash(std::string_view token);

struct MinHashSignature {
  std::string id;
  std::vector<uint64_t> minima;
  // Signature of an empty shingle set. Never placed in any bucket.
  bool sentinel = false;

  size_t size() const { return minima.size(); }
  bool operator==(const MinHashSignature&) const = default;
};

// Fraction of positions where two signatures agree; an estimate of Jaccard.
double signature_agreement(const MinHashSignature& a, const MinHashSignature& b);

// Seeded family h_i(x) = (a_i x + b_i) mod (2^61 - 1) applied to token hashes.
class MinHasher {
 public:
  MinHasher(uint64_t seed, size_t n_hashes = kDefaultSignatureLength);

  MinHashSignature sign(const ShingleSet& s, std::string id = {}) const;

  uint64_t seed() const { return seed_; }
  size_t n_hashes() const { return a_.size(); }

 private:
  uint64_t seed_;
  std::vector<uint64_t> a_;
  std::vector<uint64_t> b_;
};

MinHashSignature minhash_signature(const ShingleSet& s, uint64_t seed,
                                   size_t n_hashes = kDefaultSignatureLength);

}  // namespace microest

#endif  // MICROEST_MINHASH_H_
