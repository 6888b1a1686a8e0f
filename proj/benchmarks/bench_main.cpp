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

#include <benchmark/benchmark.h>

#include <random>

#include "statebench/bandits.hpp"
#include "statebench/embeddings.hpp"
#include "statebench/ingest.hpp"

namespace statebench {
namespace {

Vector random_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector x(dim);
  for (int j = 0; j < dim; ++j) x[j] = n(rng);
  return x;
}

void BM_ArmUpdate(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  ArmModel arm(dim, 1.0);
  const Vector x = random_vector(dim, rng);
  for (auto _ : state) {
    arm.update(x, 1.0);
    benchmark::DoNotOptimize(arm.response().data());
  }
}
BENCHMARK(BM_ArmUpdate)->Arg(16)->Arg(32)->Arg(160)->Arg(320);

void BM_RankTopK(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto n_arms = static_cast<ItemIndex>(state.range(1));
  std::mt19937_64 rng(2);
  ItemSet items;
  for (ItemIndex i = 0; i < n_arms; ++i) items.insert(i);
  ArmTable arms = init_arms(items, dim, 1.0);
  for (ItemIndex i = 0; i < n_arms; ++i) arms.update(i, random_vector(dim, rng), 1.0);
  BanditRanker ranker(Policy::lin_ucb(0.5));
  const Vector x = random_vector(dim, rng);
  const ItemSet exclude;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ranker.rank_topk(arms, x, 20, exclude));
  }
}
BENCHMARK(BM_RankTopK)->Args({32, 1682})->Args({160, 1682})->Unit(benchmark::kMicrosecond);

InteractionLog synthetic_log(std::size_t users, std::size_t items, std::size_t n) {
  InteractionLog log;
  auto u = std::make_shared<IdMap>();
  auto it = std::make_shared<IdMap>();
  for (std::size_t i = 0; i < users; ++i) u->intern("u" + std::to_string(i));
  for (std::size_t i = 0; i < items; ++i) it->intern("i" + std::to_string(i));
  log.users = u;
  log.items = it;
  std::mt19937_64 rng(3);
  for (std::size_t t = 0; t < n; ++t) {
    log.events.push_back({static_cast<UserIndex>(rng() % users),
                          static_cast<ItemIndex>(rng() % items), 1.0,
                          static_cast<Timestamp>(t)});
  }
  return log;
}

void BM_AlsSweep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto log = synthetic_log(900, 1600, 45000);
  const AlsProblem problem(log, 40.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.1);
  FactorMatrix users(900, d), items(1600, d);
  for (Eigen::Index i = 0; i < users.size(); ++i) users.data()[i] = n(rng);
  for (Eigen::Index i = 0; i < items.size(); ++i) items.data()[i] = n(rng);
  for (auto _ : state) {
    problem.solve_users(users, items, 0.01);
    problem.solve_items(users, items, 0.01);
    benchmark::DoNotOptimize(items.data());
  }
}
BENCHMARK(BM_AlsSweep)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace statebench

BENCHMARK_MAIN();
