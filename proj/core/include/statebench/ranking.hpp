// Copyright 2026 The Statebench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STATEBENCH_RANKING_HPP_
#define STATEBENCH_RANKING_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "statebench/common.hpp"

namespace statebench {

// Orders (score desc, index asc).
inline bool ranks_before(double score_a, ItemIndex a, double score_b,
                         ItemIndex b) {
  if (score_a != score_b) return score_a > score_b;
  return a < b;
}

// Top-k of `candidates` under ranks_before, where scores[c] is the score of
// candidate c. Returns at most k entries.
inline std::vector<ItemIndex> top_k_by_score(std::span<const double> scores,
                                             std::vector<ItemIndex> candidates,
                                             std::size_t k) {
  auto cmp = [&](ItemIndex a, ItemIndex b) {
    return ranks_before(scores[a], a, scores[b], b);
  };
  if (candidates.size() > k) {
    std::nth_element(candidates.begin(),
                     candidates.begin() + static_cast<std::ptrdiff_t>(k),
                     candidates.end(), cmp);
    candidates.resize(k);
  }
  std::sort(candidates.begin(), candidates.end(), cmp);
  return candidates;
}

}  // namespace statebench

#endif  // STATEBENCH_RANKING_HPP_
