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

#ifndef STATEBENCH_METRICS_HPP_
#define STATEBENCH_METRICS_HPP_

#include <cstddef>
#include <optional>

namespace statebench {

// Binary NDCG@k with exactly one relevant item: 1/log2(rank + 1) when the
// relevant item sits at 1-based `rank` within the top k, else 0. The ideal
// DCG is 1.
double ndcg_at_k(std::optional<std::size_t> rank_of_truth, std::size_t k);

}  // namespace statebench

#endif  // STATEBENCH_METRICS_HPP_
