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

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

namespace statebench {
namespace {

Vector random_vector(int d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

// Arms 0..n-1 with a few random reward-1 and reward-0 updates each; the raw
// update vectors are returned so oracles can rebuild every arm densely.
struct TrainedTable {
  ArmTable table;
  std::map<ItemIndex, std::vector<Vector>> xs;
  std::map<ItemIndex, Vector> b;
};

TrainedTable trained_table(std::size_t n, int d, double lambda, std::uint64_t seed,
                           ItemIndex stride = 1) {
  std::mt19937_64 rng(seed);
  std::vector<ItemIndex> items;
  for (std::size_t s = 0; s < n; ++s) items.push_back(static_cast<ItemIndex>(s * stride));
  TrainedTable t{ArmTable(items, d, lambda), {}, {}};
  for (ItemIndex item : items) t.b[item] = Vector::Zero(d);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t e = 0; e < 6 * n; ++e) {
    const ItemIndex item = items[pick(rng)];
    const Vector x = random_vector(d, rng);
    const double reward = e % 3 == 0 ? 0.0 : 1.0;
    t.table.update(item, x, reward);
    t.xs[item].push_back(x);
    t.b[item] += reward * x;
  }
  return t;
}

// Dense scores of every arm under `policy`; z supplies LinTS draws.
std::vector<double> dense_scores(const TrainedTable& t, const Policy& policy,
                                 const Vector& x, std::uint64_t event) {
  const auto& items = t.table.items();
  std::vector<double> scores(items.back() + 1, 0.0);
  for (ItemIndex item : items) {
    auto it = t.xs.find(item);
    const std::vector<Vector> none;
    const Matrix inv = oracle::dense_ridge_inverse(
        it == t.xs.end() ? none : it->second, t.table.lambda());
    const Matrix fixed = inv.rows() == 0
                             ? Matrix(Matrix::Identity(x.size(), x.size()) /
                                      t.table.lambda())
                             : inv;
    const Vector theta = fixed * t.b.at(item);
    const double mean = theta.dot(x);
    const double width = std::sqrt(x.dot(fixed * x));
    switch (policy.kind) {
      case PolicyKind::kLinUcb:
        scores[item] = mean + policy.alpha * width;
        break;
      case PolicyKind::kLinGreedy:
        scores[item] = mean;
        break;
      case PolicyKind::kLinTs:
        scores[item] =
            mean + policy.v * width * substream_normal(policy.seed, event, item);
        break;
    }
  }
  return scores;
}

TEST(ArmModel, ShermanMorrisonTracksDenseInverse) {
  std::mt19937_64 rng(1);
  constexpr int d = 16;
  ArmModel arm(d, 1.0);
  std::vector<Vector> xs;
  for (int t = 0; t < 10000; ++t) {
    xs.push_back(random_vector(d, rng, 0.3));
    arm.update(xs.back(), 1.0);
  }
  const Matrix want = oracle::dense_ridge_inverse(xs, 1.0);
  EXPECT_LT((arm.gram_inverse() - want).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(arm.n_updates(), 10000u);
}

TEST(ArmModel, GramIsLambdaIdentityPlusOuterProducts) {
  std::mt19937_64 rng(2);
  ArmModel arm(4, 0.5);
  Matrix want = 0.5 * Matrix::Identity(4, 4);
  for (int t = 0; t < 7; ++t) {
    const Vector x = random_vector(4, rng);
    arm.update(x, 0.0);
    want += x * x.transpose();
  }
  EXPECT_LT((arm.gram() - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ArmModel, PointEstimateMatchesDenseSolve) {
  std::mt19937_64 rng(3);
  ArmModel arm(5, 2.0);
  std::vector<Vector> xs;
  Vector b = Vector::Zero(5);
  for (int t = 0; t < 12; ++t) {
    xs.push_back(random_vector(5, rng));
    const double r = t % 2;
    arm.update(xs.back(), r);
    b += r * xs.back();
  }
  const Vector want = oracle::dense_ridge_inverse(xs, 2.0) * b;
  EXPECT_LT((point_estimate(arm) - want).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ArmModel, FreshArmScoresZeroMeanWithPriorWidth) {
  ArmModel arm(3, 4.0);
  Vector x(3);
  x << 1, 2, 2;  // |x|^2 = 9
  EXPECT_DOUBLE_EQ(arm.quadratic_form(x), 9.0 / 4.0);
  EXPECT_DOUBLE_EQ(score(Policy::lin_ucb(2.0), arm, x), 3.0);
  EXPECT_DOUBLE_EQ(score(Policy::lin_greedy(0.1), arm, x), 0.0);
  EXPECT_DOUBLE_EQ(score(Policy::lin_ts(0.5), arm, x, -1.0), -0.75);
}

TEST(ArmModel, RejectsBadInput) {
  EXPECT_THROW(ArmModel(3, 0.0), ConfigError);
  ArmModel arm(3, 1.0);
  EXPECT_THROW(arm.update(Vector::Ones(2), 1.0), ArgumentError);
  Vector bad = Vector::Ones(3);
  bad[1] = std::nan("");
  EXPECT_THROW(arm.update(bad, 1.0), NumericalError);
}

TEST(ArmModel, FromStateRestoresTheInverse) {
  std::mt19937_64 rng(4);
  ArmModel arm(4, 1.0);
  for (int t = 0; t < 9; ++t) arm.update(random_vector(4, rng), 1.0);
  const auto back = ArmModel::from_state(arm.gram(), arm.response(), 1.0, 9);
  EXPECT_LT((back.gram_inverse() - arm.gram_inverse()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(back.n_updates(), 9u);
}

TEST(Policy, ValidationAndParameters) {
  EXPECT_THROW(Policy::lin_ucb(-0.1), ConfigError);
  EXPECT_THROW(Policy::lin_greedy(1.5), ConfigError);
  EXPECT_THROW(Policy::lin_ts(0.0), ConfigError);
  Policy p = Policy::lin_greedy(0.2);
  EXPECT_DOUBLE_EQ(p.parameter(), 0.2);
  p.set_parameter(0.05);
  EXPECT_DOUBLE_EQ(p.epsilon, 0.05);
  EXPECT_EQ(parse_policy_kind("lints"), PolicyKind::kLinTs);
  EXPECT_EQ(to_string(PolicyKind::kLinGreedy), "lingreedy");
  EXPECT_THROW(parse_policy_kind("ucb"), ConfigError);
}

TEST(ArmTable, PointScoresMatchPerArmEstimates) {
  auto t = trained_table(9, 4, 1.0, 5, 3);
  std::mt19937_64 rng(6);
  const Vector x = random_vector(4, rng);
  const Vector s = t.table.point_scores(x);
  for (std::size_t slot = 0; slot < t.table.size(); ++slot) {
    EXPECT_NEAR(s[static_cast<Eigen::Index>(slot)],
                point_estimate(t.table.arm_at(slot)).dot(x), 1e-12);
  }
  EXPECT_FALSE(t.table.contains(1));
  EXPECT_THROW(t.table.arm(1), LookupError);
  EXPECT_EQ(t.table.total_updates(), 54u);
}

class RankAgainstBruteForce : public ::testing::TestWithParam<PolicyKind> {};

TEST_P(RankAgainstBruteForce, SlateEqualsFullSort) {
  const auto t = trained_table(40, 6, 1.0, 7, 2);
  Policy policy;
  policy.kind = GetParam();
  policy.alpha = 0.7;
  policy.v = 0.9;
  policy.epsilon = 0.0;
  policy.seed = 11;
  BanditRanker ranker(policy);
  std::mt19937_64 rng(8);
  for (std::uint64_t event = 0; event < 30; ++event) {
    const Vector x = random_vector(6, rng, event % 2 ? 1.0 : 0.05);
    ItemSet exclude;
    for (int e = 0; e < 5; ++e) exclude.insert(static_cast<ItemIndex>(2 * (rng() % 40)));
    const auto got = ranker.rank_topk(t.table, x, 7, exclude);
    const auto want = oracle::brute_topk(dense_scores(t, policy, x, event),
                                         t.table.items(), 7, exclude);
    EXPECT_EQ(got, want) << "event " << event;
  }
}

INSTANTIATE_TEST_SUITE_P(Policies, RankAgainstBruteForce,
                         ::testing::Values(PolicyKind::kLinUcb,
                                           PolicyKind::kLinGreedy,
                                           PolicyKind::kLinTs),
                         [](const auto& info) { return to_string(info.param); });

TEST(Rank, TiesGoToTheLowerItemIndex) {
  ArmTable table({5, 2, 9}, 2, 1.0);
  BanditRanker ranker(Policy::lin_ucb(1.0));
  EXPECT_EQ(ranker.rank_topk(table, Vector::Ones(2), 3, {}),
            (std::vector<ItemIndex>{2, 5, 9}));
  EXPECT_EQ(ranker.rank_topk(table, Vector::Ones(2), 2, {2}),
            (std::vector<ItemIndex>{5, 9}));
  EXPECT_THROW(ranker.rank_topk(table, Vector::Ones(2), 0, {}), ArgumentError);
}

TEST(Rank, ShortSlateWhenFewArmsRemain) {
  ArmTable table({0, 1, 2}, 1, 1.0);
  BanditRanker ranker(Policy::lin_greedy(1.0, 3));
  EXPECT_EQ(ranker.rank_topk(table, Vector::Ones(1), 20, {1}).size(), 2u);
}

TEST(Rank, ArgmaxInvariantUnderPositiveContextScaling) {
  const auto t = trained_table(25, 5, 1.0, 9);
  std::mt19937_64 rng(10);
  for (PolicyKind kind : {PolicyKind::kLinUcb, PolicyKind::kLinGreedy}) {
    Policy p;
    p.kind = kind;
    p.epsilon = 0.0;
    p.alpha = 0.4;
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = random_vector(5, rng);
      BanditRanker a(p), b(p);
      const auto base = a.rank_topk(t.table, x, 1, {});
      const auto scaled = b.rank_topk(t.table, 3.7 * x, 1, {});
      EXPECT_EQ(base, scaled) << to_string(kind);
    }
  }
}

TEST(LinGreedy, FullExplorationIsUniform) {
  ArmTable table({0, 1, 2}, 2, 1.0);
  table.update(0, Vector::Ones(2), 1.0);  // arm 0 would win greedily
  BanditRanker ranker(Policy::lin_greedy(1.0, 12));
  std::array<int, 3> first{};
  constexpr int kTrials = 20000;
  for (int t = 0; t < kTrials; ++t) {
    ++first[ranker.rank_topk(table, Vector::Ones(2), 1, {})[0]];
  }
  for (int c : first) EXPECT_NEAR(double(c) / kTrials, 1.0 / 3, 0.02);
}

TEST(LinGreedy, NoExplorationIsGreedy) {
  ArmTable table({0, 1, 2}, 2, 1.0);
  table.update(1, Vector::Ones(2), 1.0);
  BanditRanker ranker(Policy::lin_greedy(0.0, 12));
  for (int t = 0; t < 100; ++t) {
    EXPECT_EQ(ranker.rank_topk(table, Vector::Ones(2), 1, {})[0], 1u);
  }
}

TEST(LinTs, ScalarDrawMatchesFullPosteriorDistribution) {
  std::mt19937_64 rng(13);
  ArmModel arm(3, 1.0);
  for (int t = 0; t < 8; ++t) arm.update(random_vector(3, rng), t % 2);
  const Vector x = random_vector(3, rng);
  const double v = 0.8;
  const double mean = point_estimate(arm).dot(x);
  const double sd = v * std::sqrt(arm.quadratic_form(x));
  constexpr int n = 40000;
  double s1 = 0, s2 = 0, c1 = 0, c2 = 0;
  for (int i = 0; i < n; ++i) {
    const double a = sample_theta(arm, v, rng).dot(x);
    const double b = score(Policy::lin_ts(v), arm, x,
                           substream_normal(99, static_cast<std::uint64_t>(i), 4));
    s1 += a;
    s2 += a * a;
    c1 += b;
    c2 += b * b;
  }
  const double ma = s1 / n, va = s2 / n - ma * ma;
  const double mb = c1 / n, vb = c2 / n - mb * mb;
  const double se = 4 * sd / std::sqrt(double(n));
  EXPECT_NEAR(ma, mean, se);
  EXPECT_NEAR(mb, mean, se);
  EXPECT_NEAR(va / (sd * sd), 1.0, 0.04);
  EXPECT_NEAR(vb / (sd * sd), 1.0, 0.04);
}

TEST(LinTs, SubstreamIsDeterministicAndStandardNormal) {
  EXPECT_EQ(substream_normal(1, 2, 3), substream_normal(1, 2, 3));
  EXPECT_NE(substream_normal(1, 2, 3), substream_normal(1, 2, 4));
  EXPECT_NE(substream_normal(1, 2, 3), substream_normal(2, 2, 3));
  double s1 = 0, s2 = 0;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = substream_normal(5, static_cast<std::uint64_t>(i / 100),
                                      static_cast<ItemIndex>(i % 100));
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.015);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(WarmStart, EveryEventUpdatesExactlyOneArm) {
  EmbeddingSpace space;
  space.user_factors = FactorMatrix::Ones(3, 2);
  space.item_factors = FactorMatrix::Random(5, 2);
  const auto warm = oracle::random_log(3, 5, 60, 14);
  const StateSpec spec{StateKind::kItemConcat, 2, 2};
  auto arms = init_arms(items_in(warm), spec.dim(), 1.0);
  auto hist = HistoryTable(3, spec);
  warm_start(arms, hist, warm, spec, space);
  EXPECT_EQ(arms.total_updates(), 60u);
}

TEST(WarmStart, ContextIsBuiltBeforeTheHistoryAdvances) {
  EmbeddingSpace space;
  space.user_factors = FactorMatrix::Zero(1, 1);
  space.item_factors.resize(2, 1);
  space.item_factors << 2.0, 3.0;
  const auto warm = oracle::make_log(1, 2, {{0, 0, 1, 0}, {0, 1, 1, 1}});
  const StateSpec spec{StateKind::kItemMean, 1, 1};
  auto arms = init_arms({0, 1}, 1, 1.0);
  auto hist = HistoryTable(1, spec);
  warm_start(arms, hist, warm, spec, space);
  // First event sees the empty history, second sees item 0 only.
  EXPECT_DOUBLE_EQ(arms.arm(0).response()[0], 0.0);
  EXPECT_DOUBLE_EQ(arms.arm(1).response()[0], 2.0);
}

TEST(ArmSnapshot, RoundTrip) {
  testing::TempDir dir;
  const auto t = trained_table(6, 3, 0.5, 15, 4);
  t.table.save(dir / "arms.bin", Policy::lin_ucb(0.5));
  const auto back = ArmTable::load(dir / "arms.bin");
  ASSERT_EQ(back.items(), t.table.items());
  EXPECT_DOUBLE_EQ(back.lambda(), 0.5);
  for (ItemIndex item : back.items()) {
    EXPECT_EQ(back.arm(item).packed_gram(), t.table.arm(item).packed_gram());
    EXPECT_EQ(back.arm(item).response(), t.table.arm(item).response());
    EXPECT_EQ(back.arm(item).n_updates(), t.table.arm(item).n_updates());
    EXPECT_LT((back.arm(item).gram_inverse() - t.table.arm(item).gram_inverse())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-10);
  }
}

}  // namespace
}  // namespace statebench
