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

// One PASS/FAIL line per acceptance criterion. Exits non-zero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "statebench/bandits.hpp"
#include "statebench/cli.hpp"
#include "statebench/embeddings.hpp"
#include "statebench/eval.hpp"
#include "statebench/experiment.hpp"
#include "statebench/metrics.hpp"
#include "statebench/results.hpp"
#include "statebench/state.hpp"
#include "statebench/stats.hpp"

namespace fs = std::filesystem;
using namespace statebench;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os << what << " = " << got << " (want " << want << " +/- " << tol << ")";
    expect(std::isfinite(got) && std::abs(got - want) <= tol, os.str());
  }
  void below(double got, double limit, const std::string& what) {
    std::ostringstream os;
    os << what << " = " << got << " (limit " << limit << ")";
    expect(got < limit, os.str());
  }
};

bool report(int id, const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  const bool ok = c.failures.empty();
  std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << name;
  const auto detail = c.detail.str();
  if (!detail.empty()) std::cout << ": " << detail;
  std::cout << '\n';
  for (const auto& f : c.failures) std::cout << "     " << f << '\n';
  std::cout.flush();
  return ok;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

FactorMatrix random_factors(Eigen::Index rows, Eigen::Index d, std::mt19937_64& rng,
                            double sd = 0.5) {
  std::normal_distribution<double> n(0.0, sd);
  FactorMatrix m(rows, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// ---------------------------------------------------------------------------
// 1

void stats_reproduction(Check& c, const fs::path& work) {
  const auto t0 = Clock::now();
  std::ostringstream out, err;
  const int code = run_cli({"stats", "--config",
                            std::string(STATEBENCH_TEST_CONFIGS) + "/reference_stats.cfg",
                            "--out", work.string()},
                           out, err);
  const double elapsed = seconds_since(t0);
  c.expect(code == 0, "stats exit code " + std::to_string(code) + ": " + err.str());
  if (code != 0) return;

  const auto table = read_csv_table(work / "stats.csv");
  const auto col = [&](const char* n) { return table.column(n); };
  std::map<std::string, std::vector<std::string>> state_pairs;
  std::vector<std::string> state_row, emb_row;
  for (const auto& row : table.rows) {
    if (row[col("comparison")] == "state") {
      state_row = row;
      state_pairs[row[col("treatment_a")] + "|" + row[col("treatment_b")]] = row;
    } else if (row[col("comparison")] == "embedding") {
      emb_row = row;
    }
  }
  c.expect(!state_row.empty() && !emb_row.empty(), "both comparisons reported");
  if (state_row.empty() || emb_row.empty()) return;
  const auto num = [&](const std::vector<std::string>& r, const char* n) {
    return std::stod(r[col(n)]);
  };
  const double chi_s = num(state_row, "chi2_r");
  const double p_s = num(state_row, "p_value");
  const double chi_e = num(emb_row, "chi2_r");
  const double p_e = num(emb_row, "p_value");
  const double cd = num(state_row, "cd");
  c.near(chi_s, 16.26, 0.05, "aggregation chi2_r");
  c.near(p_s, 0.00029, 0.0002, "aggregation p");
  c.near(chi_e, 2.67, 0.05, "embedding chi2_r");
  c.near(p_e, 0.102, 0.005, "embedding p");
  c.near(cd, 0.5522, 0.001, "Nemenyi CD");
  c.expect(std::stoul(state_row[col("n_blocks")]) == 36, "aggregation N = 36");
  for (const char* item : {"item_mean", "item_concat"}) {
    auto it = state_pairs.find(std::string(item) + "|user");
    c.expect(it != state_pairs.end() && it->second[col("better")] == item &&
                 it->second[col("significant")] == "yes",
             std::string(item) + " beats user at the CD");
  }
  auto mc = state_pairs.find("item_mean|item_concat");
  c.expect(mc != state_pairs.end() && mc->second[col("significant")] == "no",
           "item_mean vs item_concat not significant");
  c.below(elapsed, 1.0, "seconds");
  c.detail << std::fixed << std::setprecision(4) << "chi2_r=" << chi_s
           << " p=" << std::setprecision(6) << p_s << std::setprecision(4)
           << " | chi2_r=" << chi_e << " p=" << p_e << " | cd=" << cd
           << std::setprecision(3) << " | " << elapsed << "s";
}

// ---------------------------------------------------------------------------
// 2

InteractionLog log_from(const Matrix& r) {
  std::vector<oracle::Event> events;
  Timestamp t = 0;
  for (Eigen::Index u = 0; u < r.rows(); ++u) {
    for (Eigen::Index i = 0; i < r.cols(); ++i) {
      if (r(u, i) != 0) {
        events.emplace_back(static_cast<UserIndex>(u), static_cast<ItemIndex>(i),
                            r(u, i), t++);
      }
    }
  }
  return oracle::make_log(static_cast<std::size_t>(r.rows()),
                          static_cast<std::size_t>(r.cols()), events);
}

void numerical_oracles(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2026);
  std::normal_distribution<double> n(0.0, 1.0);

  // Sherman-Morrison cached inverse against a dense inversion.
  const int dim = 16;
  ArmModel arm(dim, 1.0);
  std::vector<Vector> xs;
  for (int t = 0; t < 10000; ++t) {
    Vector x(dim);
    for (int j = 0; j < dim; ++j) x[j] = n(rng);
    arm.update(x, 1.0);
    xs.push_back(std::move(x));
  }
  const double sm = (arm.gram_inverse() - oracle::dense_ridge_inverse(xs, 1.0))
                        .cwiseAbs()
                        .maxCoeff();
  c.expect(sm < 1e-8, "Sherman-Morrison max diff " + std::to_string(sm));

  // ALS half-steps on a 5x6 toy matrix.
  Matrix r(5, 6);
  r << 5, 0, 3, 0, 1, 0,
       0, 4, 0, 0, 2, 1,
       1, 0, 0, 5, 0, 0,
       0, 0, 2, 0, 0, 4,
       3, 3, 0, 1, 0, 0;
  const AlsProblem problem(log_from(r), 40.0);
  const FactorMatrix items = random_factors(6, 3, rng);
  FactorMatrix users = random_factors(5, 3, rng);
  problem.solve_users(users, items, 0.1);
  double als = (users - oracle::dense_als_user_step(r, items, 0.1, 40.0))
                   .cwiseAbs()
                   .maxCoeff();
  FactorMatrix items2 = items;
  problem.solve_items(users, items2, 0.1);
  als = std::max(als, (items2 - oracle::dense_als_user_step(r.transpose(), users,
                                                             0.1, 40.0))
                          .cwiseAbs()
                          .maxCoeff());
  c.expect(als < 1e-6, "ALS half-step diff " + std::to_string(als));

  // BPR triplet gradient against central differences at d = 4.
  double bpr = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Vector pu(4), qi(4), qj(4);
    for (int j = 0; j < 4; ++j) {
      pu[j] = n(rng);
      qi[j] = n(rng);
      qj[j] = n(rng);
    }
    const double reg = 0.05;
    const auto g = bpr_triplet_gradient(pu, qi, qj, reg);
    const auto fd_u = oracle::central_gradient(
        [&](const Vector& v) { return oracle::bpr_objective(v, qi, qj, reg); }, pu, 1e-5);
    const auto fd_i = oracle::central_gradient(
        [&](const Vector& v) { return oracle::bpr_objective(pu, v, qj, reg); }, qi, 1e-5);
    const auto fd_j = oracle::central_gradient(
        [&](const Vector& v) { return oracle::bpr_objective(pu, qi, v, reg); }, qj, 1e-5);
    for (const auto& [a, b] : {std::pair{&g.user, &fd_u}, std::pair{&g.positive, &fd_i},
                               std::pair{&g.negative, &fd_j}}) {
      bpr = std::max(bpr, (*a - *b).norm() / std::max(b->norm(), 1e-12));
    }
  }
  c.expect(bpr < 1e-4, "BPR relative error " + std::to_string(bpr));

  const double elapsed = seconds_since(t0);
  c.below(elapsed, 30.0, "seconds");
  c.detail << std::scientific << std::setprecision(2) << "sherman-morrison " << sm
           << " | als " << als << " | bpr " << bpr << std::fixed
           << std::setprecision(3) << " | " << elapsed << "s";
}

// ---------------------------------------------------------------------------
// 3

EmbeddingSpace random_space(std::size_t users, std::size_t items, int d,
                            std::mt19937_64& rng) {
  EmbeddingSpace s;
  s.user_factors = random_factors(static_cast<Eigen::Index>(users), d, rng);
  s.item_factors = random_factors(static_cast<Eigen::Index>(items), d, rng);
  return s;
}

void ndcg_suite(Check& c) {
  const auto t0 = Clock::now();
  c.expect(ndcg_at_k(1, 20) == 1.0, "rank 1 -> 1.0");
  c.expect(std::abs(ndcg_at_k(3, 20) - 0.5) < 1e-15, "rank 3 -> 0.5");
  c.expect(ndcg_at_k(std::nullopt, 20) == 0.0, "miss -> 0");

  std::mt19937_64 rng(11);
  const auto space = random_space(12, 16, 3, rng);
  const auto log = oracle::random_log(12, 16, 500, 12);
  const auto s = split(log, SplitPlan{});
  const auto warm = s.warm();
  const ItemSet arm_items = items_in(warm);
  std::vector<Interaction> stream;
  for (const auto& w : filter_cold_items(s.test_windows, arm_items)) {
    stream.insert(stream.end(), w.events.begin(), w.events.end());
  }
  double worst = 0.0;
  std::optional<double> reference;
  for (int trial = 0; trial < 10; ++trial) {
    OnlineSession session(space, {StateKind::kItemMean, 3, 3},
                          init_arms(arm_items, 3, 1.0), Policy::lin_ucb(1.0), {});
    session.warm_up(warm);
    double direct = 0.0;
    std::size_t count = 0;
    session.set_observer([&](const EventRecord& rec, const Vector&) {
      direct += rec.ndcg;
      ++count;
    });
    std::size_t pos = 0, idx = 0;
    double num = 0.0, den = 0.0;
    while (pos < stream.size()) {
      const std::size_t len = std::min<std::size_t>(rng() % 50, stream.size() - pos);
      std::vector<Interaction> part(stream.begin() + static_cast<std::ptrdiff_t>(pos),
                                    stream.begin() + static_cast<std::ptrdiff_t>(pos + len));
      const auto m = session.run_window(log.with_events(part), ++idx);
      num += m.ndcg_mean * double(m.events);
      den += double(m.events);
      worst = std::max(worst, std::abs(m.ndcg_cumulative - num / std::max(den, 1.0)));
      pos += len;
    }
    worst = std::max(worst, std::abs(session.cumulative_ndcg() - direct / double(count)));
    if (!reference) reference = session.cumulative_ndcg();
    worst = std::max(worst, std::abs(session.cumulative_ndcg() - *reference));
  }
  c.expect(worst < 1e-12, "cumulative identity error " + std::to_string(worst));
  const double elapsed = seconds_since(t0);
  c.below(elapsed, 1.0, "seconds");
  c.detail << std::scientific << std::setprecision(1) << "identity error " << worst
           << std::fixed << std::setprecision(3) << " | " << elapsed << "s";
}

// ---------------------------------------------------------------------------
// 4 and 5

ExperimentConfig ml100k_config(const fs::path& data) {
  Config c = Config::from_file(fs::path(STATEBENCH_TEST_CONFIGS) / "ml100k.cfg");
  c.set("dataset.path", fs::absolute(data).string());
  return ExperimentConfig::from_config(c);
}

std::vector<fs::path> csv_files(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() &&
        (name.ends_with(".csv") || name.ends_with(".csv.gz"))) {
      out.push_back(fs::relative(e.path(), root));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void protocol_invariants(Check& c, const fs::path& data, const fs::path& work) {
  c.expect(fs::exists(data), "MovieLens-100K ratings not found at " + data.string());
  if (!fs::exists(data)) return;
  auto cfg = ml100k_config(data);
  cfg.state_kind = StateKind::kUser;

  const auto prepared = prepare_data(cfg);
  const auto& sp = prepared.split;
  c.expect(prepared.log.size() == 100000, "cleaned events " + std::to_string(prepared.log.size()));
  c.expect(sp.warm_train.size() == 45000, "warm_train " + std::to_string(sp.warm_train.size()));
  c.expect(sp.warm_valid.size() == 5000, "warm_valid " + std::to_string(sp.warm_valid.size()));
  bool windows_ok = sp.test_windows.size() == 10;
  for (const auto& w : sp.test_windows) windows_ok &= w.size() == 5000;
  c.expect(windows_ok, "test windows are 10 x 5000");

  std::map<UserIndex, Vector> first_context;
  std::size_t mismatched = 0;
  std::uint64_t observed = 0;
  RunHooks hooks;
  hooks.observer = [&](const EventRecord& rec, const Vector& x) {
    ++observed;
    auto [it, fresh] = first_context.try_emplace(rec.user, x);
    if (!fresh &&
        (it->second.size() != x.size() ||
         std::memcmp(it->second.data(), x.data(),
                     static_cast<std::size_t>(x.size()) * sizeof(double)) != 0)) {
      ++mismatched;
    }
  };
  fs::remove_all(work);
  const auto t0 = Clock::now();
  const auto first = run_experiment(cfg, work / "run1", hooks);
  const double elapsed = seconds_since(t0);
  run_experiment(cfg, work / "run2");

  c.expect(mismatched == 0, std::to_string(mismatched) + " user contexts changed");
  c.expect(first.online_updates == first.summary.events && observed == first.summary.events,
           "arm updates " + std::to_string(first.online_updates) + " vs events " +
               std::to_string(first.summary.events));
  const auto a = csv_files(work / "run1");
  const auto b = csv_files(work / "run2");
  c.expect(!a.empty() && a == b, "same CSV files in both runs");
  std::size_t identical = 0;
  for (const auto& f : a) {
    const bool same = slurp(work / "run1" / f) == slurp(work / "run2" / f);
    c.expect(same, f.string() + " differs between runs");
    identical += same;
  }
  c.below(elapsed, 600.0, "pipeline seconds");
  c.detail << "events " << first.summary.events << ", ndcg "
           << std::setprecision(5) << first.summary.ndcg_final << ", "
           << identical << "/" << a.size() << " CSVs identical, " << std::fixed
           << std::setprecision(1) << elapsed << "s";
}

void directional(Check& c, const fs::path& data, const fs::path& work) {
  c.expect(fs::exists(data), "MovieLens-100K ratings not found at " + data.string());
  if (!fs::exists(data)) return;
  const auto base = ml100k_config(data);
  const auto prepared = prepare_data(base);
  int ratio_votes = 0;
  int mean_votes = 0;
  RunHooks quiet;
  quiet.write_outputs = false;
  for (std::uint64_t seed : {42u, 43u, 44u}) {
    auto cfg = base;
    cfg.override_seed(seed);
    const auto emb = prepare_embeddings(cfg, prepared, MfModel::kAls);
    std::map<StateKind, double> ndcg;
    for (auto kind : {StateKind::kItemConcat, StateKind::kItemMean, StateKind::kUser}) {
      const CellSpec cell{MfModel::kAls, kind, PolicyKind::kLinUcb};
      ndcg[kind] = run_cell(cfg, prepared, emb, cell, work, quiet).summary.ndcg_final;
    }
    const double concat = ndcg[StateKind::kItemConcat];
    ratio_votes += concat >= 2.0 * ndcg[StateKind::kUser];
    mean_votes += concat > ndcg[StateKind::kItemMean];
    if (seed != 42) c.detail << " | ";
    c.detail << std::setprecision(4) << "seed " << seed << ": concat " << concat
             << " mean " << ndcg[StateKind::kItemMean] << " user "
             << ndcg[StateKind::kUser];
  }
  c.expect(ratio_votes >= 2, "concat >= 2x user in " + std::to_string(ratio_votes) + "/3 seeds");
  c.expect(mean_votes >= 2, "concat > mean in " + std::to_string(mean_votes) + "/3 seeds");
}

// ---------------------------------------------------------------------------
// 6

void property_suite(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(6);
  const auto space = random_space(3, 8, 2, rng);

  // FIFO eviction keeps the newest h items, newest first.
  UserHistory h(2, 3);
  for (ItemIndex i : {0u, 1u, 2u, 3u, 4u}) update_history(h, i, space);
  c.expect(std::vector<ItemIndex>(h.recent.begin(), h.recent.end()) ==
               std::vector<ItemIndex>({4, 3, 2}) && h.consumed_count == 5,
           "FIFO eviction");

  // Concatenation is order sensitive, the mean is not.
  const StateSpec concat{StateKind::kItemConcat, 3, 2};
  const StateSpec mean{StateKind::kItemMean, 3, 2};
  UserHistory fwd(2, 3), rev(2, 3);
  for (ItemIndex i : {5u, 6u, 7u}) update_history(fwd, i, space);
  for (ItemIndex i : {7u, 6u, 5u}) update_history(rev, i, space);
  c.expect((build_state(mean, space, 0, fwd) - build_state(mean, space, 0, rev)).norm() < 1e-12,
           "mean invariant under permutation");
  c.expect((build_state(concat, space, 0, fwd) - build_state(concat, space, 0, rev)).norm() > 1e-6,
           "concat sensitive to permutation");

  // Argmax invariance under positive context scaling.
  ItemSet arm_items;
  for (ItemIndex i = 0; i < 40; ++i) arm_items.insert(i);
  ArmTable arms = init_arms(arm_items, 4, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 400; ++t) {
    Vector x(4);
    for (int j = 0; j < 4; ++j) x[j] = n(rng);
    arms.update(static_cast<ItemIndex>(rng() % 40), x, n(rng) > 0 ? 1.0 : 0.0);
  }
  bool scaling_ok = true;
  for (const auto& policy : {Policy::lin_ucb(0.7), Policy::lin_greedy(0.0)}) {
    for (int t = 0; t < 50; ++t) {
      Vector x(4);
      for (int j = 0; j < 4; ++j) x[j] = n(rng);
      BanditRanker a(policy), b(policy);
      const double s = 0.1 + 5.0 * std::uniform_real_distribution<double>()(rng);
      const Vector xs = s * x;
      scaling_ok &= a.rank_topk(arms, x, 1, {}) == b.rank_topk(arms, xs, 1, {});
    }
  }
  c.expect(scaling_ok, "argmax invariant under positive scaling");

  // Rank rows sum to k(k+1)/2 even with ties.
  Matrix scores(30, 5);
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    scores.data()[i] = static_cast<double>(rng() % 4);
  }
  const Matrix ranks = stats::rank_rows(scores);
  c.expect((ranks.rowwise().sum().array() - 15.0).abs().maxCoeff() < 1e-12,
           "rank row sums");
  c.expect((ranks - oracle::count_ranks(scores)).cwiseAbs().maxCoeff() < 1e-12,
           "ranks match counting oracle");

  // Friedman is invariant under a strictly increasing transform.
  stats::ResultTable table;
  for (int b = 0; b < 30; ++b) table.blocks.push_back("b" + std::to_string(b));
  table.treatments = {"t0", "t1", "t2", "t3", "t4"};
  table.scores = scores;
  auto transformed = table;
  transformed.scores = (scores.array() * 0.7).exp() * 3.0 + 1.0;
  const double f0 = stats::friedman(table).chi2_r;
  const double f1 = stats::friedman(transformed).chi2_r;
  c.expect(std::abs(f0 - f1) < 1e-12, "Friedman monotone invariance");
  c.expect(std::abs(f0 - oracle::friedman_statistic(scores)) < 1e-9,
           "Friedman matches rank-sum oracle");

  const double elapsed = seconds_since(t0);
  c.below(elapsed, 120.0, "seconds");
  c.detail << std::fixed << std::setprecision(3) << elapsed << "s";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statebench acceptance checks"};
  std::string ml100k = "data/ml-100k/u.data";
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--ml100k", ml100k, "MovieLens-100K u.data")->capture_default_str();
  app.add_option("--work", work, "Scratch directory")->capture_default_str();
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(work);
  const auto wanted = [&](int id) {
    return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
  };
  bool ok = true;
  const fs::path root(work);
  if (wanted(1)) {
    ok &= report(1, "statistics reproduction",
                 [&](Check& c) { stats_reproduction(c, root / "stats"); });
  }
  if (wanted(2)) ok &= report(2, "numerical oracles", numerical_oracles);
  if (wanted(3)) ok &= report(3, "NDCG analytic suite", ndcg_suite);
  if (wanted(4)) {
    ok &= report(4, "MovieLens-100K protocol invariants",
                 [&](Check& c) { protocol_invariants(c, ml100k, root / "protocol"); });
  }
  if (wanted(5)) {
    ok &= report(5, "directional reproduction (ALS, LinUCB, 3 seeds)",
                 [&](Check& c) { directional(c, ml100k, root / "directional"); });
  }
  if (wanted(6)) ok &= report(6, "property suite", property_suite);
  return ok ? 0 : 1;
}
