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

#ifndef MICROEST_SHINGLE_H_
#define MICROEST_SHINGLE_H_

#include <string>
#include <string_view>
#include <vector>

namespace microest {

// Sorted, duplicate-free set of `feature=value` tokens.
class ShingleSet {
 public:
  ShingleSet() = default;
  explicit ShingleSet(std::vector<std::string> tokens);

  void insert(std::string token);
  bool contains(std::string_view token) const;
  bool includes(const ShingleSet& subset) const;

  size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  bool operator==(const ShingleSet&) const = default;

 private:
  std::vector<std::string> tokens_;
};

size_t intersection_size(const ShingleSet& a, const ShingleSet& b);

// |a ∩ b| / |a ∪ b|; 0 when both are empty.
double jaccard(const ShingleSet& a, const ShingleSet& b);

}  // namespace microest

#endif  // MICROEST_SHINGLE_H_
