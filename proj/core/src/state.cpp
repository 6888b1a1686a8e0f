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

#include "statebench/state.hpp"

#include <algorithm>

namespace statebench {

std::string to_string(StateKind kind) {
  switch (kind) {
    case StateKind::kUser:
      return "user";
    case StateKind::kItemMean:
      return "item_mean";
    case StateKind::kItemConcat:
      return "item_concat";
  }
  return "unknown";
}

StateKind parse_state_kind(const std::string& name) {
  if (name == "user") return StateKind::kUser;
  if (name == "item_mean") return StateKind::kItemMean;
  if (name == "item_concat") return StateKind::kItemConcat;
  throw ConfigError("unknown state kind '" + name + "'");
}

HistoryTable::HistoryTable(std::size_t num_users, const StateSpec& spec)
    : rows_(num_users,
            UserHistory(spec.d, static_cast<std::size_t>(std::max(spec.h, 1)))) {}

UserHistory& HistoryTable::at(UserIndex user) {
  if (user >= rows_.size()) {
    throw LookupError("user " + std::to_string(user) + " has no history row");
  }
  return rows_[user];
}

const UserHistory& HistoryTable::at(UserIndex user) const {
  if (user >= rows_.size()) {
    throw LookupError("user " + std::to_string(user) + " has no history row");
  }
  return rows_[user];
}

void build_state_into(const StateSpec& spec, const EmbeddingSpace& space,
                      UserIndex user, const UserHistory& hist, Vector& out) {
  const int d = spec.d;
  if (d != space.dim()) {
    throw ConfigError("state dimension " + std::to_string(d) +
                      " does not match embedding dimension " +
                      std::to_string(space.dim()));
  }
  if (spec.kind == StateKind::kItemConcat && spec.h < 1) {
    throw ConfigError("item_concat needs h >= 1");
  }
  out.setZero(spec.dim());
  switch (spec.kind) {
    case StateKind::kUser:
      if (user < space.num_users()) {
        out = space.user_factors.row(user).transpose();
      }
      break;
    case StateKind::kItemMean:
      if (hist.consumed_count > 0) {
        out = hist.running_sum / static_cast<double>(hist.consumed_count);
      }
      break;
    case StateKind::kItemConcat: {
      const std::size_t slots =
          std::min(hist.recent.size(), static_cast<std::size_t>(spec.h));
      for (std::size_t s = 0; s < slots; ++s) {
        out.segment(static_cast<Eigen::Index>(s) * d, d) =
            space.item_factors.row(hist.recent[s]).transpose();
      }
      break;
    }
  }
}

Vector build_state(const StateSpec& spec, const EmbeddingSpace& space,
                   UserIndex user, const UserHistory& hist) {
  Vector out;
  build_state_into(spec, space, user, hist, out);
  return out;
}

void update_history(UserHistory& hist, ItemIndex item,
                    const EmbeddingSpace& space) {
  if (item >= space.num_items()) {
    throw LookupError("item " + std::to_string(item) +
                      " has no embedding row");
  }
  const auto q = space.item_factors.row(item).transpose();
  if (hist.running_sum.size() != q.size()) {
    if (hist.consumed_count != 0) {
      throw ConfigError("history dimension does not match embedding space");
    }
    hist.running_sum = Vector::Zero(q.size());
  }
  ++hist.consumed_count;
  hist.running_sum += q;
  hist.recent.push_front(item);
  while (hist.recent.size() > hist.capacity) hist.recent.pop_back();
}

HistoryTable seed_histories(const InteractionLog& warm, const StateSpec& spec,
                            const EmbeddingSpace& space) {
  HistoryTable table(std::max(warm.num_users(), space.num_users()), spec);
  for (const auto& ev : warm.events) {
    update_history(table.at(ev.user), ev.item, space);
  }
  return table;
}

}  // namespace statebench
