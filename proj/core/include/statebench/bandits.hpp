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

#ifndef STATEBENCH_BANDITS_HPP_
#define STATEBENCH_BANDITS_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "statebench/common.hpp"
#include "statebench/embeddings.hpp"
#include "statebench/ingest.hpp"
#include "statebench/state.hpp"

namespace statebench {

enum class PolicyKind { kLinUcb, kLinGreedy, kLinTs };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& name);

struct Policy {
  PolicyKind kind = PolicyKind::kLinUcb;
  double alpha = 1.0;    // LinUCB exploration width, >= 0
  double epsilon = 0.1;  // LinGreedy slate randomization rate, in [0, 1]
  double v = 0.5;        // LinTS posterior scale, > 0
  std::uint64_t seed = 0;

  static Policy lin_ucb(double alpha, std::uint64_t seed = 0);
  static Policy lin_greedy(double epsilon, std::uint64_t seed = 0);
  static Policy lin_ts(double v, std::uint64_t seed = 0);

  // The tuned parameter of the active kind.
  double parameter() const;
  void set_parameter(double value);
  void validate() const;
};

// Disjoint ridge-regression arm. A = lambda I + sum x x^T and its inverse
// are stored as packed lower triangles (row i holds columns 0..i); the
// inverse is maintained with rank-one Sherman-Morrison updates.
class ArmModel {
 public:
  ArmModel(int dim, double lambda);

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  std::uint64_t n_updates() const { return n_updates_; }
  const Vector& response() const { return b_; }

  Matrix gram() const;
  Matrix gram_inverse() const;

  // x^T A^{-1} x
  double quadratic_form(const Vector& x) const;
  // A^{-1} v
  Vector apply_inverse(const Vector& v) const;

  void update(const Vector& x, double reward);

  // Restores an arm from its Gram matrix and response; the inverse is
  // recomputed directly.
  static ArmModel from_state(const Matrix& gram, const Vector& response,
                             double lambda, std::uint64_t n_updates);

  const std::vector<double>& packed_gram() const { return gram_; }

 private:
  static std::size_t row_offset(int i) {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(i + 1) / 2;
  }

  int dim_;
  double lambda_;
  std::vector<double> gram_;
  std::vector<double> inverse_;
  Vector b_;
  std::uint64_t n_updates_ = 0;
};

// theta = A^{-1} b
Vector point_estimate(const ArmModel& arm);

// LinUCB: theta.x + alpha sqrt(x^T A^{-1} x). LinGreedy: theta.x.
// LinTS: theta~.x for theta~ ~ N(theta, v^2 A^{-1}); the projection theta~.x
// is Gaussian with mean theta.x and variance v^2 x^T A^{-1} x, so it is drawn
// as theta.x + v sqrt(x^T A^{-1} x) z from the standard normal draw `z`.
double score(const Policy& policy, const ArmModel& arm, const Vector& x,
             double z = 0.0);

// Full posterior draw of theta~ through the Cholesky factor of A^{-1}.
Vector sample_theta(const ArmModel& arm, double v, std::mt19937_64& rng);

// Standard normal draw that depends only on (seed, event, item).
double substream_normal(std::uint64_t seed, std::uint64_t event,
                        ItemIndex item);

class ArmTable {
 public:
  ArmTable() = default;
  ArmTable(std::vector<ItemIndex> items, int dim, double lambda);

  std::size_t size() const { return arms_.size(); }
  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  const std::vector<ItemIndex>& items() const { return items_; }
  bool contains(ItemIndex item) const;
  const ArmModel& arm(ItemIndex item) const;
  std::uint64_t total_updates() const;

  void update(ItemIndex item, const Vector& x, double reward);

  // theta.x for every arm, in items() order.
  Vector point_scores(const Vector& x) const;
  const ArmModel& arm_at(std::size_t slot) const { return arms_[slot]; }

  void save(const std::filesystem::path& path, const Policy& policy) const;
  static ArmTable load(const std::filesystem::path& path);

 private:
  std::size_t slot(ItemIndex item) const;

  int dim_ = 0;
  double lambda_ = 1.0;
  std::vector<ItemIndex> items_;
  std::vector<std::int64_t> slot_of_;  // item -> slot, -1 when absent
  std::vector<ArmModel> arms_;
  FactorMatrix thetas_;
};

ArmTable init_arms(const ItemSet& items, int dim, double lambda_ridge);

// Per-run policy state: the policy, its generator, and the call counter that
// keys LinTS substreams.
class BanditRanker {
 public:
  explicit BanditRanker(Policy policy);

  const Policy& policy() const { return policy_; }
  std::uint64_t calls() const { return calls_; }

  // Top-k arms outside `exclude`. Scores are ordered descending with
  // ascending item index on ties. LinGreedy replaces the whole slate with a
  // uniform random ordering with probability epsilon.
  std::vector<ItemIndex> rank_topk(const ArmTable& arms, const Vector& x,
                                   std::size_t k, const ItemSet& exclude);

  std::mt19937_64& rng() { return rng_; }

 private:
  Policy policy_;
  std::mt19937_64 rng_;
  std::uint64_t calls_ = 0;
};

// Replays `warm` in order: context from the user's history before the event,
// reward-1 update of the consumed item's arm, then the history advances.
// Events on items without an arm only advance the history.
void warm_start(ArmTable& arms, HistoryTable& histories,
                const InteractionLog& warm, const StateSpec& spec,
                const EmbeddingSpace& space);

}  // namespace statebench

#endif  // STATEBENCH_BANDITS_HPP_
