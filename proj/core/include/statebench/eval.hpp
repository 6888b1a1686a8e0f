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

#ifndef STATEBENCH_EVAL_HPP_
#define STATEBENCH_EVAL_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "statebench/bandits.hpp"
#include "statebench/common.hpp"
#include "statebench/embeddings.hpp"
#include "statebench/ingest.hpp"
#include "statebench/metrics.hpp"
#include "statebench/state.hpp"

namespace statebench {

struct WindowMetrics {
  std::size_t window = 0;  // 1-based
  std::size_t events = 0;
  double ndcg_mean = 0.0;
  double ndcg_cumulative = 0.0;
};

struct EventRecord {
  std::uint64_t index = 0;
  UserIndex user = 0;
  ItemIndex item = 0;
  std::optional<std::size_t> rank;  // 1-based, absent on a miss
  double ndcg = 0.0;
};

struct EvalSettings {
  std::size_t k = 20;
  bool exclude_seen = true;
  // Extra zero-reward updates on uniformly drawn other arms per event.
  std::size_t neg_samples = 0;
};

// Receives every evaluated event together with the context that ranked it.
using EventObserver = std::function<void(const EventRecord&, const Vector&)>;

// Prequential test-then-train replay. Owns the arm table, the per-user
// histories, and the per-user consumed sets; each event is ranked with the
// user's current context, scored, and only then learned from.
class OnlineSession {
 public:
  OnlineSession(const EmbeddingSpace& space, StateSpec spec, ArmTable arms,
                Policy policy, EvalSettings settings);

  // Seeds histories and arms from `warm` (warm_start) and records consumed
  // items for exclusion.
  void warm_up(const InteractionLog& warm);

  // Evaluates one window; `window_index` is 1-based.
  WindowMetrics run_window(const InteractionLog& window,
                           std::size_t window_index);

  void set_observer(EventObserver observer) { observer_ = std::move(observer); }

  const ArmTable& arms() const { return arms_; }
  const HistoryTable& histories() const { return histories_; }
  std::uint64_t evaluated_events() const { return total_events_; }
  std::uint64_t online_updates() const { return online_updates_; }
  double cumulative_ndcg() const;

 private:
  void learn(UserIndex user, ItemIndex item, const Vector& x);

  const EmbeddingSpace& space_;
  StateSpec spec_;
  ArmTable arms_;
  BanditRanker ranker_;
  EvalSettings settings_;
  HistoryTable histories_;
  std::vector<ItemSet> seen_;
  std::mt19937_64 negative_rng_;
  EventObserver observer_;
  std::uint64_t total_events_ = 0;
  std::uint64_t online_updates_ = 0;
  double total_ndcg_ = 0.0;
  Vector context_;
};

// Bandit hyperparameter candidates; empty lists fall back to defaults
// (alpha, epsilon, v in {0.1, 0.5, 1.0} / {0.05, 0.1, 0.2} / {0.1, 0.5, 1.0};
// h in {3, 5, 10}).
struct BanditGrid {
  std::vector<double> alpha_values{0.1, 0.5, 1.0};
  std::vector<double> epsilon_values{0.05, 0.1, 0.2};
  std::vector<double> v_values{0.1, 0.5, 1.0};
  std::vector<int> h_values{3, 5, 10};

  const std::vector<double>& values_for(PolicyKind kind) const;
};

struct TuneEntry {
  Policy policy;
  int h = 0;
  double valid_ndcg = 0.0;
};

struct TuneResult {
  Policy policy;
  int h = 0;
  std::vector<TuneEntry> report;
};

struct TuneInputs {
  const EmbeddingSpace* space = nullptr;  // trained on warm_train only
  const InteractionLog* warm_train = nullptr;
  const InteractionLog* warm_valid = nullptr;
  double lambda = 1.0;
  std::size_t max_arms = 0;
  EvalSettings settings;
};

// Replays warm_train, then evaluates prequentially on warm_valid for every
// candidate and keeps the best (earliest on ties). `tune_h` adds the history
// length to the search for ItemConcat states.
TuneResult tune_bandit(const TuneInputs& inputs, StateKind kind,
                       const Policy& base, const BanditGrid& grid, int fixed_h,
                       bool tune_policy, bool tune_h);

// Arm universe: items of `warm`, optionally capped to the `max_arms` most
// frequent (ties to the lower index). 0 disables the cap.
ItemSet select_arm_items(const InteractionLog& warm, std::size_t max_arms);

}  // namespace statebench

#endif  // STATEBENCH_EVAL_HPP_
