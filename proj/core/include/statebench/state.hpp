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

#ifndef STATEBENCH_STATE_HPP_
#define STATEBENCH_STATE_HPP_

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "statebench/common.hpp"
#include "statebench/embeddings.hpp"
#include "statebench/ingest.hpp"

namespace statebench {

enum class StateKind { kUser, kItemMean, kItemConcat };

std::string to_string(StateKind kind);
StateKind parse_state_kind(const std::string& name);

struct StateSpec {
  StateKind kind = StateKind::kItemMean;
  int h = 5;  // history length, ItemConcat only
  int d = 0;  // latent dimension of the embedding space

  int dim() const { return kind == StateKind::kItemConcat ? d * h : d; }
};

// Per-user consumption summary. `recent` is newest first and holds at most
// `capacity` items; `running_sum` covers every consumed event.
struct UserHistory {
  std::uint64_t consumed_count = 0;
  Vector running_sum;
  std::deque<ItemIndex> recent;
  std::size_t capacity = 0;

  UserHistory() = default;
  UserHistory(int d, std::size_t capacity)
      : running_sum(Vector::Zero(d)), capacity(capacity) {}
};

class HistoryTable {
 public:
  HistoryTable(std::size_t num_users, const StateSpec& spec);

  UserHistory& at(UserIndex user);
  const UserHistory& at(UserIndex user) const;
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<UserHistory> rows_;
};

// Context vector for `user`: p_u (User), the running mean of consumed item
// embeddings (ItemMean), or the newest-first concatenation of the last h
// item embeddings, zero-padded (ItemConcat).
Vector build_state(const StateSpec& spec, const EmbeddingSpace& space,
                   UserIndex user, const UserHistory& hist);

// Writes the context into `out` (resized to spec.dim()); used on hot paths.
void build_state_into(const StateSpec& spec, const EmbeddingSpace& space,
                      UserIndex user, const UserHistory& hist, Vector& out);

void update_history(UserHistory& hist, ItemIndex item,
                    const EmbeddingSpace& space);

HistoryTable seed_histories(const InteractionLog& warm, const StateSpec& spec,
                            const EmbeddingSpace& space);

}  // namespace statebench

#endif  // STATEBENCH_STATE_HPP_
