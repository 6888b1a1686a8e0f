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

#ifndef STATEBENCH_EMBEDDINGS_HPP_
#define STATEBENCH_EMBEDDINGS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "statebench/common.hpp"
#include "statebench/ingest.hpp"

namespace statebench {

enum class MfModel { kAls, kBpr };

std::string to_string(MfModel model);
MfModel parse_mf_model(const std::string& name);

struct MfHyperparams {
  int d = 8;
  double lr = 0.0;  // BPR only
  double reg = 0.01;
  int epochs = 15;
  double conf_weight = 40.0;  // ALS only
  std::uint64_t seed = 0;
};

// Static factorization: user_factors is |U| x d (rows p_u), item_factors is
// |I| x d (rows q_i). Rows of users or items absent from the training log
// are zero.
struct EmbeddingSpace {
  FactorMatrix user_factors;
  FactorMatrix item_factors;
  MfModel model = MfModel::kAls;
  MfHyperparams hyperparams;

  int dim() const { return static_cast<int>(item_factors.cols()); }
  std::size_t num_users() const {
    return static_cast<std::size_t>(user_factors.rows());
  }
  std::size_t num_items() const {
    return static_cast<std::size_t>(item_factors.rows());
  }
};

// Confidence-weighted implicit ALS. Preference is 1 for positive aggregated
// feedback; confidence is 1 + conf_weight * feedback. Repeated events of a
// pair sum their feedback. Non-positive feedback is treated as unobserved.
EmbeddingSpace train_als(const InteractionLog& log, int d, double reg,
                         int epochs, double conf_weight, std::uint64_t seed);

EmbeddingSpace train_bpr(const InteractionLog& log, int d, double lr,
                         double reg, int epochs, std::uint64_t seed);

// Sparse observed entries of the ALS problem, indexed both ways.
class AlsProblem {
 public:
  AlsProblem(const InteractionLog& log, double conf_weight);

  // Solves every user row with item factors fixed (one half-sweep).
  void solve_users(FactorMatrix& users, const FactorMatrix& items,
                   double reg) const;
  void solve_items(const FactorMatrix& users, FactorMatrix& items,
                   double reg) const;

  // Full weighted objective over every (user, item) cell, including
  // unobserved cells with confidence 1 and preference 0.
  double objective(const FactorMatrix& users, const FactorMatrix& items,
                   double reg) const;

  std::size_t num_users() const { return by_user_.offsets.size() - 1; }
  std::size_t num_items() const { return by_item_.offsets.size() - 1; }

 private:
  struct Entry {
    std::uint32_t index;
    double confidence;  // c - 1, always > 0
  };
  struct Csr {
    std::vector<std::size_t> offsets;
    std::vector<Entry> entries;
  };

  static void solve_side(FactorMatrix& target, const FactorMatrix& fixed,
                         const Csr& rows, double reg);

  Csr by_user_;
  Csr by_item_;
};

// Gradient of the single-triplet BPR objective
//   ln sigmoid(p_u . (q_i - q_j)) - reg/2 (|p_u|^2 + |q_i|^2 + |q_j|^2)
// with respect to each parameter block.
struct BprTripletGradient {
  Vector user;
  Vector positive;
  Vector negative;
};

double bpr_triplet_objective(const Vector& p_u, const Vector& q_i,
                             const Vector& q_j, double reg);
BprTripletGradient bpr_triplet_gradient(const Vector& p_u, const Vector& q_i,
                                        const Vector& q_j, double reg);

// The k highest-scoring items by p_u . q_i outside `exclude`, ties broken by
// ascending item index.
std::vector<ItemIndex> score_topk(const EmbeddingSpace& space, UserIndex user,
                                  std::size_t k, const ItemSet& exclude);

struct MfGrid {
  std::vector<int> d_values{4, 8, 16, 32};
  std::vector<double> lr_values{1e-3, 1e-2, 1e-1};
  std::vector<double> reg_values{1e-3, 1e-2, 1e-1};
  std::vector<int> epoch_values;  // empty: model default

  static MfGrid defaults(MfModel model);
  // Hyperparameter combinations in a fixed order (d, lr, reg, epochs).
  std::vector<MfHyperparams> expand(MfModel model, double conf_weight,
                                    std::uint64_t seed) const;
};

struct GridEntry {
  MfHyperparams params;
  double valid_ndcg = 0.0;
};

struct GridSearchResult {
  // Winner retrained on warm_train followed by warm_valid.
  EmbeddingSpace space;
  // Winner as trained on warm_train alone; used for validation replays.
  EmbeddingSpace train_only_space;
  std::vector<GridEntry> report;
  std::size_t best = 0;
};

struct GridSearchOptions {
  double conf_weight = 40.0;
  std::uint64_t seed = 0;
  std::size_t k = 20;
  std::size_t threads = 1;
  std::function<void(const GridEntry&)> on_config;
};

// Mean NDCG@k over `valid` events, ranking with score_topk and excluding each
// user's items from `train`.
double validation_ndcg(const EmbeddingSpace& space, const InteractionLog& train,
                       const InteractionLog& valid, std::size_t k);

GridSearchResult grid_search_embeddings(MfModel model, const MfGrid& grid,
                                        const InteractionLog& warm_train,
                                        const InteractionLog& warm_valid,
                                        const GridSearchOptions& options);

// Binary snapshot: header then row-major P and Q as little-endian doubles.
void save_embeddings(const EmbeddingSpace& space,
                     const std::filesystem::path& path);
EmbeddingSpace load_embeddings(const std::filesystem::path& path);

void write_grid_report(const std::vector<GridEntry>& report, MfModel model,
                       const std::filesystem::path& path);

}  // namespace statebench

#endif  // STATEBENCH_EMBEDDINGS_HPP_
