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

#include "statebench/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>

#include "statebench/binary_io.hpp"
#include "statebench/metrics.hpp"
#include "statebench/ranking.hpp"

namespace statebench {

std::string to_string(MfModel model) {
  return model == MfModel::kAls ? "als" : "bpr";
}

MfModel parse_mf_model(const std::string& name) {
  if (name == "als") return MfModel::kAls;
  if (name == "bpr") return MfModel::kBpr;
  throw ConfigError("unknown embedding model '" + name + "'");
}

namespace {

void init_uniform(FactorMatrix& m, int d, std::mt19937_64& rng) {
  const double half = 0.5 / static_cast<double>(d);
  std::uniform_real_distribution<double> dist(-half, half);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
  }
}

void zero_absent_rows(const InteractionLog& log, EmbeddingSpace& space) {
  std::vector<char> user_seen(space.num_users(), 0);
  std::vector<char> item_seen(space.num_items(), 0);
  for (const auto& ev : log.events) {
    user_seen[ev.user] = 1;
    item_seen[ev.item] = 1;
  }
  for (std::size_t u = 0; u < user_seen.size(); ++u) {
    if (!user_seen[u]) space.user_factors.row(static_cast<Eigen::Index>(u)).setZero();
  }
  for (std::size_t i = 0; i < item_seen.size(); ++i) {
    if (!item_seen[i]) space.item_factors.row(static_cast<Eigen::Index>(i)).setZero();
  }
}

}  // namespace

AlsProblem::AlsProblem(const InteractionLog& log, double conf_weight) {
  std::map<std::pair<UserIndex, ItemIndex>, double> totals;
  for (const auto& ev : log.events) totals[{ev.user, ev.item}] += ev.feedback;

  const std::size_t n_users = log.num_users();
  const std::size_t n_items = log.num_items();
  by_user_.offsets.assign(n_users + 1, 0);
  by_item_.offsets.assign(n_items + 1, 0);
  for (const auto& [key, total] : totals) {
    if (total <= 0.0) continue;
    ++by_user_.offsets[key.first + 1];
    ++by_item_.offsets[key.second + 1];
  }
  for (std::size_t u = 0; u < n_users; ++u) {
    by_user_.offsets[u + 1] += by_user_.offsets[u];
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    by_item_.offsets[i + 1] += by_item_.offsets[i];
  }
  by_user_.entries.resize(by_user_.offsets.back());
  by_item_.entries.resize(by_item_.offsets.back());
  std::vector<std::size_t> user_fill(by_user_.offsets.begin(),
                                     by_user_.offsets.end() - 1);
  std::vector<std::size_t> item_fill(by_item_.offsets.begin(),
                                     by_item_.offsets.end() - 1);
  for (const auto& [key, total] : totals) {
    if (total <= 0.0) continue;
    const double cm1 = conf_weight * total;
    by_user_.entries[user_fill[key.first]++] = {key.second, cm1};
    by_item_.entries[item_fill[key.second]++] = {key.first, cm1};
  }
}

// Each row solves (F^T C_r F + reg I) x = F^T C_r p_r using
// F^T C_r F = F^T F + sum (c - 1) f f^T over the row's observed entries.
void AlsProblem::solve_side(FactorMatrix& target, const FactorMatrix& fixed,
                            const Csr& rows, double reg) {
  const Eigen::Index d = fixed.cols();
  const Matrix gram = fixed.transpose() * fixed;
  Matrix lhs(d, d);
  Vector rhs(d);
  Eigen::LLT<Matrix> llt(d);
  for (std::size_t r = 0; r + 1 < rows.offsets.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const std::size_t begin = rows.offsets[r];
    const std::size_t end = rows.offsets[r + 1];
    if (begin == end) {
      target.row(row).setZero();
      continue;
    }
    lhs = gram;
    lhs.diagonal().array() += reg;
    rhs.setZero();
    for (std::size_t e = begin; e < end; ++e) {
      const auto& entry = rows.entries[e];
      const auto f = fixed.row(entry.index).transpose();
      lhs.selfadjointView<Eigen::Lower>().rankUpdate(f, entry.confidence);
      rhs.noalias() += (1.0 + entry.confidence) * f;
    }
    llt.compute(lhs.selfadjointView<Eigen::Lower>());
    target.row(row) = llt.solve(rhs).transpose();
  }
}

void AlsProblem::solve_users(FactorMatrix& users, const FactorMatrix& items,
                             double reg) const {
  solve_side(users, items, by_user_, reg);
}

void AlsProblem::solve_items(const FactorMatrix& users, FactorMatrix& items,
                             double reg) const {
  solve_side(items, users, by_item_, reg);
}

double AlsProblem::objective(const FactorMatrix& users,
                             const FactorMatrix& items, double reg) const {
  // Unobserved cells contribute (x_u . y_i)^2; observed cells replace that
  // with c (1 - s)^2.
  const Matrix gram = items.transpose() * items;
  double loss = 0.0;
  for (Eigen::Index u = 0; u < users.rows(); ++u) {
    const auto x = users.row(u);
    loss += x * gram * x.transpose();
  }
  for (std::size_t u = 0; u + 1 < by_user_.offsets.size(); ++u) {
    for (std::size_t e = by_user_.offsets[u]; e < by_user_.offsets[u + 1];
         ++e) {
      const auto& entry = by_user_.entries[e];
      const double s = users.row(static_cast<Eigen::Index>(u))
                           .dot(items.row(entry.index));
      loss += (1.0 + entry.confidence) * (1.0 - s) * (1.0 - s) - s * s;
    }
  }
  loss += reg * (users.squaredNorm() + items.squaredNorm());
  return loss;
}

EmbeddingSpace train_als(const InteractionLog& log, int d, double reg,
                         int epochs, double conf_weight, std::uint64_t seed) {
  if (log.empty()) throw ArgumentError("ALS needs a non-empty log");
  if (d < 1) throw ArgumentError("ALS latent dimension must be >= 1");
  if (!(reg > 0.0)) throw ArgumentError("ALS regularization must be > 0");
  if (epochs < 0) throw ArgumentError("ALS epochs must be >= 0");

  EmbeddingSpace space;
  space.model = MfModel::kAls;
  space.hyperparams = {d, 0.0, reg, epochs, conf_weight, seed};
  space.user_factors.resize(static_cast<Eigen::Index>(log.num_users()), d);
  space.item_factors.resize(static_cast<Eigen::Index>(log.num_items()), d);
  std::mt19937_64 rng(seed);
  init_uniform(space.user_factors, d, rng);
  init_uniform(space.item_factors, d, rng);

  const AlsProblem problem(log, conf_weight);
  for (int sweep = 1; sweep <= epochs; ++sweep) {
    problem.solve_users(space.user_factors, space.item_factors, reg);
    problem.solve_items(space.user_factors, space.item_factors, reg);
    if (!space.user_factors.allFinite() || !space.item_factors.allFinite()) {
      throw NumericalError("ALS sweep " + std::to_string(sweep) +
                           " produced non-finite factors");
    }
  }
  zero_absent_rows(log, space);
  return space;
}

double bpr_triplet_objective(const Vector& p_u, const Vector& q_i,
                             const Vector& q_j, double reg) {
  const double x = p_u.dot(q_i - q_j);
  // ln sigmoid(x) = -log1p(exp(-x)), computed stably for both signs.
  const double log_sig = x >= 0.0 ? -std::log1p(std::exp(-x))
                                  : x - std::log1p(std::exp(x));
  return log_sig -
         0.5 * reg * (p_u.squaredNorm() + q_i.squaredNorm() + q_j.squaredNorm());
}

BprTripletGradient bpr_triplet_gradient(const Vector& p_u, const Vector& q_i,
                                        const Vector& q_j, double reg) {
  const double x = p_u.dot(q_i - q_j);
  const double weight = 1.0 / (1.0 + std::exp(x));  // sigmoid(-x)
  return {weight * (q_i - q_j) - reg * p_u, weight * p_u - reg * q_i,
          -weight * p_u - reg * q_j};
}

EmbeddingSpace train_bpr(const InteractionLog& log, int d, double lr,
                         double reg, int epochs, std::uint64_t seed) {
  if (d < 1) throw ArgumentError("BPR latent dimension must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("BPR learning rate must be > 0");
  if (epochs < 0) throw ArgumentError("BPR epochs must be >= 0");

  const std::size_t n_users = log.num_users();
  const std::size_t n_items = log.num_items();
  std::vector<std::vector<ItemIndex>> positives(n_users);
  std::vector<std::pair<UserIndex, ItemIndex>> samples;
  std::vector<char> in_catalog(n_items, 0);
  for (const auto& ev : log.events) {
    in_catalog[ev.item] = 1;
    if (ev.feedback <= 0.0) continue;
    positives[ev.user].push_back(ev.item);
    samples.emplace_back(ev.user, ev.item);
  }
  std::vector<ItemIndex> catalog;
  for (std::size_t i = 0; i < n_items; ++i) {
    if (in_catalog[i]) catalog.push_back(static_cast<ItemIndex>(i));
  }
  if (catalog.size() < 2) throw ConfigError("BPR needs at least 2 items");
  if (samples.empty()) throw ConfigError("BPR needs at least one positive event");
  for (std::size_t u = 0; u < n_users; ++u) {
    auto& pos = positives[u];
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    if (pos.size() >= catalog.size()) {
      throw ConfigError("user '" + log.users->external(static_cast<UserIndex>(u)) +
                        "' has every catalog item as a positive");
    }
  }

  EmbeddingSpace space;
  space.model = MfModel::kBpr;
  space.hyperparams = {d, lr, reg, epochs, 0.0, seed};
  space.user_factors.resize(static_cast<Eigen::Index>(n_users), d);
  space.item_factors.resize(static_cast<Eigen::Index>(n_items), d);
  std::mt19937_64 rng(seed);
  init_uniform(space.user_factors, d, rng);
  init_uniform(space.item_factors, d, rng);

  std::uniform_int_distribution<std::size_t> pick_sample(0, samples.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_item(0, catalog.size() - 1);
  constexpr int kMaxNegativeTries = 100;
  Vector p_u(d), q_i(d), q_j(d);

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (std::size_t step = 0; step < samples.size(); ++step) {
      const auto [u, i] = samples[pick_sample(rng)];
      const auto& pos = positives[u];
      ItemIndex j = 0;
      bool found = false;
      for (int t = 0; t < kMaxNegativeTries; ++t) {
        j = catalog[pick_item(rng)];
        if (!std::binary_search(pos.begin(), pos.end(), j)) {
          found = true;
          break;
        }
      }
      if (!found) continue;
      auto pu = space.user_factors.row(u);
      auto qi = space.item_factors.row(i);
      auto qj = space.item_factors.row(j);
      const double x = pu.dot(qi - qj);
      const double weight = 1.0 / (1.0 + std::exp(x));
      p_u = pu.transpose();
      q_i = qi.transpose();
      q_j = qj.transpose();
      pu += lr * (weight * (q_i - q_j) - reg * p_u).transpose();
      qi += lr * (weight * p_u - reg * q_i).transpose();
      qj += lr * (-weight * p_u - reg * q_j).transpose();
    }
    if (!space.user_factors.allFinite() || !space.item_factors.allFinite()) {
      throw NumericalError("BPR epoch " + std::to_string(epoch) +
                           " produced non-finite factors");
    }
  }
  zero_absent_rows(log, space);
  return space;
}

std::vector<ItemIndex> score_topk(const EmbeddingSpace& space, UserIndex user,
                                  std::size_t k, const ItemSet& exclude) {
  if (k == 0) throw ArgumentError("k must be positive");
  if (user >= space.num_users()) {
    throw LookupError("user " + std::to_string(user) + " has no embedding row");
  }
  const Vector scores =
      space.item_factors * space.user_factors.row(user).transpose();
  std::vector<ItemIndex> candidates;
  candidates.reserve(space.num_items());
  for (std::size_t i = 0; i < space.num_items(); ++i) {
    const auto item = static_cast<ItemIndex>(i);
    if (!exclude.contains(item)) candidates.push_back(item);
  }
  return top_k_by_score({scores.data(), static_cast<std::size_t>(scores.size())},
                        std::move(candidates), k);
}

MfGrid MfGrid::defaults(MfModel model) {
  MfGrid g;
  if (model == MfModel::kAls) {
    g.lr_values = {0.0};
    g.epoch_values = {5, 15, 30};
  } else {
    g.epoch_values = {50, 100, 150};
  }
  return g;
}

std::vector<MfHyperparams> MfGrid::expand(MfModel model, double conf_weight,
                                          std::uint64_t seed) const {
  const std::vector<double> lrs =
      model == MfModel::kAls ? std::vector<double>{0.0} : lr_values;
  const std::vector<int> epochs =
      epoch_values.empty() ? MfGrid::defaults(model).epoch_values : epoch_values;
  if (d_values.empty() || lrs.empty() || reg_values.empty() || epochs.empty()) {
    throw ConfigError("embedding grid has an empty value list");
  }
  std::vector<MfHyperparams> out;
  for (int d : d_values) {
    for (double lr : lrs) {
      for (double reg : reg_values) {
        for (int c : epochs) {
          out.push_back({d, lr, reg, c,
                         model == MfModel::kAls ? conf_weight : 0.0, seed});
        }
      }
    }
  }
  return out;
}

namespace {

EmbeddingSpace train_with(MfModel model, const InteractionLog& log,
                          const MfHyperparams& hp) {
  return model == MfModel::kAls
             ? train_als(log, hp.d, hp.reg, hp.epochs, hp.conf_weight, hp.seed)
             : train_bpr(log, hp.d, hp.lr, hp.reg, hp.epochs, hp.seed);
}

std::string describe(MfModel model, const MfHyperparams& hp) {
  std::ostringstream os;
  os << to_string(model) << "(d=" << hp.d;
  if (model == MfModel::kBpr) os << ", lr=" << hp.lr;
  os << ", reg=" << hp.reg << ", epochs=" << hp.epochs << ")";
  return os.str();
}

}  // namespace

double validation_ndcg(const EmbeddingSpace& space, const InteractionLog& train,
                       const InteractionLog& valid, std::size_t k) {
  if (valid.empty()) return 0.0;
  std::vector<ItemSet> consumed(space.num_users());
  for (const auto& ev : train.events) consumed[ev.user].insert(ev.item);
  // Items without a training row cannot be ranked meaningfully.
  std::vector<char> trained(space.num_items(), 0);
  for (const auto& ev : train.events) trained[ev.item] = 1;

  std::map<UserIndex, std::vector<ItemIndex>> ranking_cache;
  const Eigen::Index n_items = static_cast<Eigen::Index>(space.num_items());
  double total = 0.0;
  for (const auto& ev : valid.events) {
    auto it = ranking_cache.find(ev.user);
    if (it == ranking_cache.end()) {
      const Vector scores =
          space.item_factors * space.user_factors.row(ev.user).transpose();
      std::vector<ItemIndex> candidates;
      for (Eigen::Index i = 0; i < n_items; ++i) {
        const auto item = static_cast<ItemIndex>(i);
        if (trained[item] && !consumed[ev.user].contains(item)) {
          candidates.push_back(item);
        }
      }
      it = ranking_cache
               .emplace(ev.user,
                        top_k_by_score({scores.data(),
                                        static_cast<std::size_t>(scores.size())},
                                       std::move(candidates), k))
               .first;
    }
    const auto& ranked = it->second;
    const auto pos = std::find(ranked.begin(), ranked.end(), ev.item);
    std::optional<std::size_t> rank;
    if (pos != ranked.end()) {
      rank = static_cast<std::size_t>(pos - ranked.begin()) + 1;
    }
    total += ndcg_at_k(rank, k);
  }
  return total / static_cast<double>(valid.size());
}

GridSearchResult grid_search_embeddings(MfModel model, const MfGrid& grid,
                                        const InteractionLog& warm_train,
                                        const InteractionLog& warm_valid,
                                        const GridSearchOptions& options) {
  const auto configs = grid.expand(model, options.conf_weight, options.seed);

  auto evaluate = [&](const MfHyperparams& hp) {
    try {
      EmbeddingSpace space = train_with(model, warm_train, hp);
      const double score =
          validation_ndcg(space, warm_train, warm_valid, options.k);
      return std::make_pair(score, std::move(space));
    } catch (const Error& e) {
      throw Error(describe(model, hp) + ": " + e.what());
    }
  };

  GridSearchResult result;
  result.report.resize(configs.size());
  double best_score = -std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t idx, double score, EmbeddingSpace&& space) {
    result.report[idx] = {configs[idx], score};
    if (options.on_config) options.on_config(result.report[idx]);
    // Strict comparison keeps the earliest configuration on ties.
    if (score > best_score) {
      best_score = score;
      result.best = idx;
      result.train_only_space = std::move(space);
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  for (std::size_t start = 0; start < configs.size(); start += threads) {
    const std::size_t stop = std::min(configs.size(), start + threads);
    std::vector<std::future<std::pair<double, EmbeddingSpace>>> batch;
    for (std::size_t idx = start; idx < stop; ++idx) {
      batch.push_back(std::async(threads > 1 ? std::launch::async
                                             : std::launch::deferred,
                                 evaluate, configs[idx]));
    }
    for (std::size_t idx = start; idx < stop; ++idx) {
      auto [score, space] = batch[idx - start].get();
      consider(idx, score, std::move(space));
    }
  }

  try {
    result.space =
        train_with(model, concat(warm_train, warm_valid), configs[result.best]);
  } catch (const Error& e) {
    throw Error(describe(model, configs[result.best]) + " (retrain): " +
                e.what());
  }
  return result;
}

namespace {
constexpr std::string_view kEmbeddingMagic = "SBEMB001";
}

void save_embeddings(const EmbeddingSpace& space,
                     const std::filesystem::path& path) {
  BinaryWriter w(path);
  w.magic(kEmbeddingMagic);
  w.u32(space.model == MfModel::kAls ? 0u : 1u);
  w.u32(static_cast<std::uint32_t>(space.dim()));
  w.u64(space.num_users());
  w.u64(space.num_items());
  const auto& hp = space.hyperparams;
  w.f64(hp.lr);
  w.f64(hp.reg);
  w.u64(static_cast<std::uint64_t>(hp.epochs));
  w.f64(hp.conf_weight);
  w.u64(hp.seed);
  w.f64s({space.user_factors.data(),
          static_cast<std::size_t>(space.user_factors.size())});
  w.f64s({space.item_factors.data(),
          static_cast<std::size_t>(space.item_factors.size())});
  w.finish();
}

EmbeddingSpace load_embeddings(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic(kEmbeddingMagic);
  EmbeddingSpace space;
  const auto tag = r.u32();
  if (tag > 1) throw Error("unknown model tag in " + path.string());
  space.model = tag == 0 ? MfModel::kAls : MfModel::kBpr;
  const auto d = static_cast<Eigen::Index>(r.u32());
  const auto n_users = static_cast<Eigen::Index>(r.u64());
  const auto n_items = static_cast<Eigen::Index>(r.u64());
  auto& hp = space.hyperparams;
  hp.d = static_cast<int>(d);
  hp.lr = r.f64();
  hp.reg = r.f64();
  hp.epochs = static_cast<int>(r.u64());
  hp.conf_weight = r.f64();
  hp.seed = r.u64();
  space.user_factors.resize(n_users, d);
  space.item_factors.resize(n_items, d);
  r.f64s({space.user_factors.data(),
          static_cast<std::size_t>(space.user_factors.size())});
  r.f64s({space.item_factors.data(),
          static_cast<std::size_t>(space.item_factors.size())});
  if (!r.at_end()) throw Error("trailing bytes in " + path.string());
  return space;
}

void write_grid_report(const std::vector<GridEntry>& report, MfModel model,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "model,d,lr,reg,epochs,conf_weight,seed,valid_ndcg\n";
  out << std::setprecision(10);
  for (const auto& e : report) {
    out << to_string(model) << ',' << e.params.d << ',' << e.params.lr << ','
        << e.params.reg << ',' << e.params.epochs << ','
        << e.params.conf_weight << ',' << e.params.seed << ',' << e.valid_ndcg
        << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace statebench
