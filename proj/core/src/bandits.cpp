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

#include "statebench/bandits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "statebench/binary_io.hpp"
#include "statebench/ranking.hpp"

namespace statebench {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kLinUcb:
      return "linucb";
    case PolicyKind::kLinGreedy:
      return "lingreedy";
    case PolicyKind::kLinTs:
      return "lints";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "linucb") return PolicyKind::kLinUcb;
  if (name == "lingreedy") return PolicyKind::kLinGreedy;
  if (name == "lints") return PolicyKind::kLinTs;
  throw ConfigError("unknown bandit policy '" + name + "'");
}

Policy Policy::lin_ucb(double alpha, std::uint64_t seed) {
  Policy p;
  p.kind = PolicyKind::kLinUcb;
  p.alpha = alpha;
  p.seed = seed;
  p.validate();
  return p;
}

Policy Policy::lin_greedy(double epsilon, std::uint64_t seed) {
  Policy p;
  p.kind = PolicyKind::kLinGreedy;
  p.epsilon = epsilon;
  p.seed = seed;
  p.validate();
  return p;
}

Policy Policy::lin_ts(double v, std::uint64_t seed) {
  Policy p;
  p.kind = PolicyKind::kLinTs;
  p.v = v;
  p.seed = seed;
  p.validate();
  return p;
}

double Policy::parameter() const {
  switch (kind) {
    case PolicyKind::kLinUcb:
      return alpha;
    case PolicyKind::kLinGreedy:
      return epsilon;
    case PolicyKind::kLinTs:
      return v;
  }
  return 0.0;
}

void Policy::set_parameter(double value) {
  switch (kind) {
    case PolicyKind::kLinUcb:
      alpha = value;
      break;
    case PolicyKind::kLinGreedy:
      epsilon = value;
      break;
    case PolicyKind::kLinTs:
      v = value;
      break;
  }
  validate();
}

void Policy::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("LinUCB alpha must be finite and >= 0");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("LinGreedy epsilon must lie in [0, 1]");
  }
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError("LinTS v must be finite and > 0");
  }
}

ArmModel::ArmModel(int dim, double lambda)
    : dim_(dim),
      lambda_(lambda),
      gram_(row_offset(dim), 0.0),
      inverse_(row_offset(dim), 0.0),
      b_(Vector::Zero(dim)) {
  if (dim < 0) throw ArgumentError("arm dimension must be >= 0");
  if (!(lambda > 0.0)) throw ConfigError("ridge lambda must be > 0");
  for (int i = 0; i < dim; ++i) {
    gram_[row_offset(i) + static_cast<std::size_t>(i)] = lambda;
    inverse_[row_offset(i) + static_cast<std::size_t>(i)] = 1.0 / lambda;
  }
}

namespace {

Matrix unpack(const std::vector<double>& packed, int dim) {
  Matrix m(dim, dim);
  std::size_t pos = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j <= i; ++j) {
      m(i, j) = packed[pos];
      m(j, i) = packed[pos];
      ++pos;
    }
  }
  return m;
}

std::vector<double> pack(const Matrix& m) {
  const auto dim = static_cast<int>(m.rows());
  std::vector<double> packed;
  packed.reserve(static_cast<std::size_t>(dim) * (dim + 1) / 2);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j <= i; ++j) packed.push_back(0.5 * (m(i, j) + m(j, i)));
  }
  return packed;
}

using ConstMap = Eigen::Map<const Vector>;
using MutMap = Eigen::Map<Vector>;

}  // namespace

Matrix ArmModel::gram() const { return unpack(gram_, dim_); }

Matrix ArmModel::gram_inverse() const { return unpack(inverse_, dim_); }

double ArmModel::quadratic_form(const Vector& x) const {
  double acc = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double* row = inverse_.data() + row_offset(i);
    const double off = ConstMap(row, i).dot(x.head(i));
    acc += x[i] * (2.0 * off + row[i] * x[i]);
  }
  return acc;
}

Vector ArmModel::apply_inverse(const Vector& v) const {
  Vector out = Vector::Zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    const double* row = inverse_.data() + row_offset(i);
    out[i] += ConstMap(row, i + 1).dot(v.head(i + 1));
    out.head(i) += v[i] * ConstMap(row, i);
  }
  return out;
}

void ArmModel::update(const Vector& x, double reward) {
  if (x.size() != dim_) {
    throw ArgumentError("context of size " + std::to_string(x.size()) +
                        " for arm of dimension " + std::to_string(dim_));
  }
  const Vector u = apply_inverse(x);
  const double denom = 1.0 + x.dot(u);
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalError("Sherman-Morrison denominator is not positive");
  }
  const double inv_denom = 1.0 / denom;
  for (int i = 0; i < dim_; ++i) {
    const std::size_t off = row_offset(i);
    MutMap(inverse_.data() + off, i + 1) -= (u[i] * inv_denom) * u.head(i + 1);
    MutMap(gram_.data() + off, i + 1) += x[i] * x.head(i + 1);
  }
  b_ += reward * x;
  ++n_updates_;
}

ArmModel ArmModel::from_state(const Matrix& gram, const Vector& response,
                              double lambda, std::uint64_t n_updates) {
  const auto dim = static_cast<int>(gram.rows());
  ArmModel arm(dim, lambda);
  arm.gram_ = pack(gram);
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("restored Gram matrix is not positive definite");
  }
  arm.inverse_ = pack(llt.solve(Matrix::Identity(dim, dim)));
  arm.b_ = response;
  arm.n_updates_ = n_updates;
  return arm;
}

Vector point_estimate(const ArmModel& arm) {
  return arm.apply_inverse(arm.response());
}

namespace {

double combine(double point, double width, double quad) {
  return point + width * std::sqrt(std::max(quad, 0.0));
}

}  // namespace

double score(const Policy& policy, const ArmModel& arm, const Vector& x,
             double z) {
  if (x.size() != arm.dim()) {
    throw ArgumentError("context size does not match arm dimension");
  }
  const double point = point_estimate(arm).dot(x);
  double s = point;
  switch (policy.kind) {
    case PolicyKind::kLinUcb:
      s = combine(point, policy.alpha, arm.quadratic_form(x));
      break;
    case PolicyKind::kLinGreedy:
      break;
    case PolicyKind::kLinTs:
      s = combine(point, policy.v * z, arm.quadratic_form(x));
      break;
  }
  if (!std::isfinite(s)) throw NumericalError("non-finite arm score");
  return s;
}

Vector sample_theta(const ArmModel& arm, double v, std::mt19937_64& rng) {
  Eigen::LLT<Matrix> llt(arm.gram_inverse());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("inverse Gram matrix is not positive definite");
  }
  std::normal_distribution<double> normal;
  Vector z(arm.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  const Vector lz = llt.matrixL() * z;
  return point_estimate(arm) + v * lz;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_open(std::uint64_t bits) {
  // (0, 1]: never zero, so the log below is finite.
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double substream_normal(std::uint64_t seed, std::uint64_t event,
                        ItemIndex item) {
  const std::uint64_t key =
      splitmix64(splitmix64(seed) ^ splitmix64(event + 0x632be59bd9b4e019ULL) ^
                 splitmix64(static_cast<std::uint64_t>(item) << 1 | 1));
  const double u1 = unit_open(splitmix64(key));
  const double u2 = unit_open(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ArmTable::ArmTable(std::vector<ItemIndex> items, int dim, double lambda)
    : dim_(dim), lambda_(lambda), items_(std::move(items)) {
  if (!(lambda > 0.0)) throw ConfigError("ridge lambda must be > 0");
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
  const std::size_t max_item = items_.empty() ? 0 : items_.back() + 1;
  slot_of_.assign(max_item, -1);
  arms_.reserve(items_.size());
  for (std::size_t s = 0; s < items_.size(); ++s) {
    slot_of_[items_[s]] = static_cast<std::int64_t>(s);
    arms_.emplace_back(dim, lambda);
  }
  thetas_ = FactorMatrix::Zero(static_cast<Eigen::Index>(items_.size()), dim);
}

bool ArmTable::contains(ItemIndex item) const {
  return item < slot_of_.size() && slot_of_[item] >= 0;
}

std::size_t ArmTable::slot(ItemIndex item) const {
  if (!contains(item)) {
    throw LookupError("item " + std::to_string(item) + " has no arm");
  }
  return static_cast<std::size_t>(slot_of_[item]);
}

const ArmModel& ArmTable::arm(ItemIndex item) const { return arms_[slot(item)]; }

std::uint64_t ArmTable::total_updates() const {
  std::uint64_t n = 0;
  for (const auto& a : arms_) n += a.n_updates();
  return n;
}

void ArmTable::update(ItemIndex item, const Vector& x, double reward) {
  const std::size_t s = slot(item);
  arms_[s].update(x, reward);
  thetas_.row(static_cast<Eigen::Index>(s)) =
      point_estimate(arms_[s]).transpose();
}

Vector ArmTable::point_scores(const Vector& x) const {
  if (x.size() != dim_) {
    throw ArgumentError("context size does not match arm dimension");
  }
  return thetas_ * x;
}

namespace {
constexpr std::string_view kArmMagic = "SBARM001";
}

void ArmTable::save(const std::filesystem::path& path,
                    const Policy& policy) const {
  BinaryWriter w(path);
  w.magic(kArmMagic);
  w.u32(static_cast<std::uint32_t>(dim_));
  w.f64(lambda_);
  w.u32(static_cast<std::uint32_t>(policy.kind));
  w.f64(policy.parameter());
  w.u64(arms_.size());
  for (std::size_t s = 0; s < arms_.size(); ++s) {
    w.u32(items_[s]);
    w.f64s(arms_[s].packed_gram());
    w.f64s({arms_[s].response().data(),
            static_cast<std::size_t>(arms_[s].response().size())});
    w.u64(arms_[s].n_updates());
  }
  w.finish();
}

ArmTable ArmTable::load(const std::filesystem::path& path) {
  BinaryReader r(path);
  r.expect_magic(kArmMagic);
  const auto dim = static_cast<int>(r.u32());
  const double lambda = r.f64();
  r.u32();  // policy kind
  r.f64();  // policy parameter
  const auto count = r.u64();
  std::vector<ItemIndex> items;
  std::vector<ArmModel> arms;
  const std::size_t packed = static_cast<std::size_t>(dim) * (dim + 1) / 2;
  for (std::uint64_t a = 0; a < count; ++a) {
    items.push_back(r.u32());
    std::vector<double> lower(packed);
    r.f64s(lower);
    Vector b(dim);
    r.f64s({b.data(), static_cast<std::size_t>(dim)});
    const auto n = r.u64();
    arms.push_back(ArmModel::from_state(unpack(lower, dim), b, lambda, n));
  }
  if (!r.at_end()) throw Error("trailing bytes in " + path.string());
  ArmTable table(items, dim, lambda);
  for (std::size_t s = 0; s < items.size(); ++s) {
    const std::size_t slot = table.slot(items[s]);
    table.arms_[slot] = std::move(arms[s]);
    table.thetas_.row(static_cast<Eigen::Index>(slot)) =
        point_estimate(table.arms_[slot]).transpose();
  }
  return table;
}

ArmTable init_arms(const ItemSet& items, int dim, double lambda_ridge) {
  return ArmTable(std::vector<ItemIndex>(items.begin(), items.end()), dim,
                  lambda_ridge);
}

BanditRanker::BanditRanker(Policy policy)
    : policy_(policy), rng_(policy.seed) {
  policy_.validate();
}

std::vector<ItemIndex> BanditRanker::rank_topk(const ArmTable& arms,
                                               const Vector& x, std::size_t k,
                                               const ItemSet& exclude) {
  if (k == 0) throw ArgumentError("k must be positive");
  const std::uint64_t event = calls_++;
  const auto& items = arms.items();

  std::vector<std::size_t> eligible;
  eligible.reserve(items.size());
  for (std::size_t s = 0; s < items.size(); ++s) {
    if (!exclude.contains(items[s])) eligible.push_back(s);
  }

  if (policy_.kind == PolicyKind::kLinGreedy) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng_) < policy_.epsilon) {
      const std::size_t m = std::min(k, eligible.size());
      for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
        std::swap(eligible[i], eligible[pick(rng_)]);
      }
      std::vector<ItemIndex> out;
      out.reserve(m);
      for (std::size_t i = 0; i < m; ++i) out.push_back(items[eligible[i]]);
      return out;
    }
  }

  const Vector point = arms.point_scores(x);
  if (policy_.kind == PolicyKind::kLinGreedy ||
      (policy_.kind == PolicyKind::kLinUcb && policy_.alpha == 0.0)) {
    std::vector<double> scores(items.empty() ? 0 : items.back() + 1, 0.0);
    std::vector<ItemIndex> candidates;
    candidates.reserve(eligible.size());
    for (std::size_t s : eligible) {
      if (!std::isfinite(point[static_cast<Eigen::Index>(s)])) {
        throw NumericalError("non-finite score for arm " +
                             std::to_string(items[s]));
      }
      scores[items[s]] = point[static_cast<Eigen::Index>(s)];
      candidates.push_back(items[s]);
    }
    return top_k_by_score(scores, std::move(candidates), k);
  }

  // Exact top-k with pruning: x^T A^{-1} x <= |x|^2 / lambda bounds every
  // exploration term, so arms whose bound falls below the current k-th score
  // cannot enter the slate.
  const double cap =
      std::sqrt(x.squaredNorm() / arms.lambda()) * (1.0 + 1e-9) + 1e-300;
  struct Candidate {
    double bound;
    double width;
    std::size_t slot;
  };
  std::vector<Candidate> cands;
  cands.reserve(eligible.size());
  for (std::size_t s : eligible) {
    const double p = point[static_cast<Eigen::Index>(s)];
    const double width =
        policy_.kind == PolicyKind::kLinUcb
            ? policy_.alpha
            : policy_.v * substream_normal(policy_.seed, event, items[s]);
    cands.push_back({p + std::max(width, 0.0) * cap, width, s});
  }
  std::sort(cands.begin(), cands.end(),
            [&](const Candidate& a, const Candidate& b) {
              return ranks_before(a.bound, items[a.slot], b.bound,
                                  items[b.slot]);
            });

  std::vector<std::pair<double, ItemIndex>> best;
  best.reserve(k + 1);
  auto before = [](const std::pair<double, ItemIndex>& a,
                   const std::pair<double, ItemIndex>& b) {
    return ranks_before(a.first, a.second, b.first, b.second);
  };
  for (const auto& c : cands) {
    if (best.size() == k && c.bound < best.back().first) break;
    const ItemIndex item = items[c.slot];
    const double s =
        combine(point[static_cast<Eigen::Index>(c.slot)], c.width,
                arms.arm_at(c.slot).quadratic_form(x));
    if (!std::isfinite(s)) {
      throw NumericalError("non-finite score for arm " + std::to_string(item));
    }
    const std::pair<double, ItemIndex> entry{s, item};
    if (best.size() == k && !before(entry, best.back())) continue;
    best.insert(std::upper_bound(best.begin(), best.end(), entry, before),
                entry);
    if (best.size() > k) best.pop_back();
  }
  std::vector<ItemIndex> out;
  out.reserve(best.size());
  for (const auto& [s, item] : best) out.push_back(item);
  return out;
}

void warm_start(ArmTable& arms, HistoryTable& histories,
                const InteractionLog& warm, const StateSpec& spec,
                const EmbeddingSpace& space) {
  Vector x;
  for (const auto& ev : warm.events) {
    auto& hist = histories.at(ev.user);
    if (arms.contains(ev.item)) {
      build_state_into(spec, space, ev.user, hist, x);
      arms.update(ev.item, x, 1.0);
    }
    update_history(hist, ev.item, space);
  }
}

}  // namespace statebench
