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

#include "statebench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace statebench {

double ndcg_at_k(std::optional<std::size_t> rank_of_truth, std::size_t k) {
  if (k == 0) throw ArgumentError("k must be >= 1");
  if (!rank_of_truth) return 0.0;
  const std::size_t r = *rank_of_truth;
  if (r < 1 || r > k) {
    throw ArgumentError("rank " + std::to_string(r) + " outside [1, " +
                        std::to_string(k) + "]");
  }
  return 1.0 / std::log2(static_cast<double>(r) + 1.0);
}

OnlineSession::OnlineSession(const EmbeddingSpace& space, StateSpec spec,
                             ArmTable arms, Policy policy,
                             EvalSettings settings)
    : space_(space),
      spec_(spec),
      arms_(std::move(arms)),
      ranker_(policy),
      settings_(settings),
      histories_(space.num_users(), spec),
      seen_(space.num_users()),
      negative_rng_(policy.seed ^ 0x5bd1e9955bd1e995ULL) {
  if (spec_.d != space.dim()) {
    throw ConfigError("state dimension does not match embedding dimension");
  }
  if (arms_.dim() != spec_.dim()) {
    throw ConfigError("arm dimension " + std::to_string(arms_.dim()) +
                      " does not match state dimension " +
                      std::to_string(spec_.dim()));
  }
  if (settings_.k == 0) throw ArgumentError("k must be positive");
}

void OnlineSession::warm_up(const InteractionLog& warm) {
  warm_start(arms_, histories_, warm, spec_, space_);
  for (const auto& ev : warm.events) seen_.at(ev.user).insert(ev.item);
}

void OnlineSession::learn(UserIndex user, ItemIndex item, const Vector& x) {
  arms_.update(item, x, 1.0);
  ++online_updates_;
  if (settings_.neg_samples > 0 && arms_.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, arms_.size() - 1);
    for (std::size_t n = 0; n < settings_.neg_samples; ++n) {
      ItemIndex other = item;
      while (other == item) other = arms_.items()[pick(negative_rng_)];
      arms_.update(other, x, 0.0);
    }
  }
  update_history(histories_.at(user), item, space_);
  seen_.at(user).insert(item);
}

WindowMetrics OnlineSession::run_window(const InteractionLog& window,
                                        std::size_t window_index) {
  static const ItemSet kNothing;
  WindowMetrics m;
  m.window = window_index;
  double window_sum = 0.0;
  for (std::size_t pos = 0; pos < window.events.size(); ++pos) {
    const auto& ev = window.events[pos];
    try {
      if (!arms_.contains(ev.item)) {
        throw LookupError("item " + std::to_string(ev.item) +
                          " has no arm; cold items must be filtered first");
      }
      build_state_into(spec_, space_, ev.user, histories_.at(ev.user),
                       context_);
      const ItemSet& exclude =
          settings_.exclude_seen ? seen_.at(ev.user) : kNothing;
      const auto ranked =
          ranker_.rank_topk(arms_, context_, settings_.k, exclude);
      EventRecord rec;
      rec.index = total_events_;
      rec.user = ev.user;
      rec.item = ev.item;
      const auto hit = std::find(ranked.begin(), ranked.end(), ev.item);
      if (hit != ranked.end()) {
        rec.rank = static_cast<std::size_t>(hit - ranked.begin()) + 1;
      }
      rec.ndcg = ndcg_at_k(rec.rank, settings_.k);
      if (observer_) observer_(rec, context_);
      window_sum += rec.ndcg;
      total_ndcg_ += rec.ndcg;
      ++total_events_;
      ++m.events;
      learn(ev.user, ev.item, context_);
    } catch (const Error& e) {
      throw Error("window " + std::to_string(window_index) + ", event " +
                  std::to_string(pos) + ": " + e.what());
    }
  }
  m.ndcg_mean = m.events == 0 ? 0.0 : window_sum / static_cast<double>(m.events);
  m.ndcg_cumulative = cumulative_ndcg();
  return m;
}

double OnlineSession::cumulative_ndcg() const {
  return total_events_ == 0 ? 0.0
                            : total_ndcg_ / static_cast<double>(total_events_);
}

const std::vector<double>& BanditGrid::values_for(PolicyKind kind) const {
  switch (kind) {
    case PolicyKind::kLinUcb:
      return alpha_values;
    case PolicyKind::kLinGreedy:
      return epsilon_values;
    case PolicyKind::kLinTs:
      return v_values;
  }
  return alpha_values;
}

ItemSet select_arm_items(const InteractionLog& warm, std::size_t max_arms) {
  std::map<ItemIndex, std::size_t> counts;
  for (const auto& ev : warm.events) ++counts[ev.item];
  if (max_arms == 0 || counts.size() <= max_arms) {
    ItemSet all;
    for (const auto& [item, n] : counts) all.insert(item);
    return all;
  }
  std::vector<std::pair<std::size_t, ItemIndex>> order;
  for (const auto& [item, n] : counts) order.emplace_back(n, item);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  ItemSet capped;
  for (std::size_t i = 0; i < max_arms; ++i) capped.insert(order[i].second);
  return capped;
}

TuneResult tune_bandit(const TuneInputs& inputs, StateKind kind,
                       const Policy& base, const BanditGrid& grid, int fixed_h,
                       bool tune_policy, bool tune_h) {
  if (inputs.space == nullptr || inputs.warm_train == nullptr ||
      inputs.warm_valid == nullptr) {
    throw ArgumentError("tune_bandit needs a space and both warm logs");
  }
  const auto& space = *inputs.space;
  const ItemSet arm_items = select_arm_items(*inputs.warm_train, inputs.max_arms);
  const auto valid =
      filter_cold_items({*inputs.warm_valid}, arm_items).front();

  std::vector<double> params =
      tune_policy ? grid.values_for(base.kind)
                  : std::vector<double>{base.parameter()};
  std::vector<int> hs = (tune_h && kind == StateKind::kItemConcat)
                            ? grid.h_values
                            : std::vector<int>{fixed_h};
  if (params.empty() || hs.empty()) {
    throw ConfigError("bandit tuning grid is empty");
  }

  TuneResult result;
  double best = -std::numeric_limits<double>::infinity();
  for (int h : hs) {
    StateSpec spec{kind, h, space.dim()};
    for (double value : params) {
      Policy policy = base;
      policy.set_parameter(value);
      OnlineSession session(space, spec,
                            init_arms(arm_items, spec.dim(), inputs.lambda),
                            policy, inputs.settings);
      session.warm_up(*inputs.warm_train);
      session.run_window(valid, 1);
      const double score = session.cumulative_ndcg();
      result.report.push_back({policy, h, score});
      if (score > best) {
        best = score;
        result.policy = policy;
        result.h = h;
      }
    }
  }
  return result;
}

}  // namespace statebench
