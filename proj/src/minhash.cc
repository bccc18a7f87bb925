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

#include "microest/minhash.h"

#include <limits>

#include "microest/error.h"
#include "microest/rng.h"

namespace microest {
namespace {

constexpr uint64_t kMersenne61 = (uint64_t{1} << 61) - 1;

inline uint64_t mod_mersenne61(unsigned __int128 x) {
  uint64_t lo = static_cast<uint64_t>(x & kMersenne61);
  uint64_t hi = static_cast<uint64_t>(x >> 61);
  uint64_t r = lo + hi;
  // r < 2^62 + 2 for any product of two reduced operands; one more fold.
  r = (r & kMersenne61) + (r >> 61);
  return r >= kMersenne61 ? r - kMersenne61 : r;
}

}  // namespace

uint64_t token_hash(std::string_view token) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

double signature_agreement(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "signature lengths differ");
  }
  if (a.sentinel || b.sentinel) return 0.0;
  size_t same = 0;
  for (size_t i = 0; i < a.size(); ++i) same += a.minima[i] == b.minima[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

MinHasher::MinHasher(uint64_t seed, size_t n_hashes) : seed_(seed) {
  if (n_hashes == 0) {
    throw Error(ErrorCode::kInvalidArgument, "n_hashes must be > 0");
  }
  a_.resize(n_hashes);
  b_.resize(n_hashes);
  uint64_t state = seed;
  for (size_t i = 0; i < n_hashes; ++i) {
    do {
      state = mix64(state);
      a_[i] = state & kMersenne61;
    } while (a_[i] == 0 || a_[i] == kMersenne61);
    do {
      state = mix64(state);
      b_[i] = state & kMersenne61;
    } while (b_[i] == kMersenne61);
  }
}

MinHashSignature MinHasher::sign(const ShingleSet& s, std::string id) const {
  MinHashSignature sig;
  sig.id = std::move(id);
  sig.minima.assign(a_.size(), std::numeric_limits<uint64_t>::max());
  if (s.empty()) {
    sig.sentinel = true;
    return sig;
  }
  for (const auto& token : s) {
    uint64_t x = mod_mersenne61(token_hash(token));
    for (size_t i = 0; i < a_.size(); ++i) {
      unsigned __int128 prod = static_cast<unsigned __int128>(a_[i]) * x + b_[i];
      uint64_t h = mod_mersenne61(prod);
      if (h < sig.minima[i]) sig.minima[i] = h;
    }
  }
  return sig;
}

MinHashSignature minhash_signature(const ShingleSet& s, uint64_t seed,
                                   size_t n_hashes) {
  return MinHasher(seed, n_hashes).sign(s);
}

}  // namespace microest
