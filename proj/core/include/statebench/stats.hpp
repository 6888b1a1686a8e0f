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

#ifndef STATEBENCH_STATS_HPP_
#define STATEBENCH_STATS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "statebench/common.hpp"

namespace statebench::stats {

// N blocks (rows) by K treatments (columns). Higher scores are better.
struct ResultTable {
  std::vector<std::string> blocks;
  std::vector<std::string> treatments;
  Matrix scores;

  void validate() const;
};

struct FriedmanOptions {
  // Divide the statistic by 1 - sum(t^3 - t) / (N (K^3 - K)) over tie
  // groups. Off by default; the uncorrected statistic is the one commonly
  // reported alongside Nemenyi critical differences.
  bool tie_correction = false;
};

struct FriedmanResult {
  double chi2_r = 0.0;
  double p_value = 1.0;
  Vector mean_ranks;
  Matrix ranks;  // per-block ranks, 1 = best
};

// Ranks each row so that the largest score gets rank 1; tied scores share
// the average of the ranks they span.
Matrix rank_rows(const Matrix& scores);

FriedmanResult friedman(const ResultTable& table,
                        const FriedmanOptions& options = {});

// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi2_sf(double x, int df);

// Critical values q_alpha of the studentized range divided by sqrt(2), for
// k = 2..10 treatments and alpha in {0.05, 0.10}.
double nemenyi_q(int k, double alpha);

// q_alpha(k) * sqrt(k (k + 1) / (6 n))
double nemenyi_cd(int k, std::size_t n, double alpha);

struct PairwiseComparison {
  std::size_t a = 0;
  std::size_t b = 0;
  double rank_gap = 0.0;  // mean_rank[b] - mean_rank[a]
  bool significant = false;
};

struct TestReport {
  std::vector<std::string> treatments;
  std::size_t n_blocks = 0;
  double alpha = 0.05;
  FriedmanResult friedman;
  double cd = 0.0;
  std::vector<PairwiseComparison> pairs;
};

TestReport analyze(const ResultTable& table, double alpha,
                   const FriedmanOptions& options = {});

// One row per treatment pair, preceded by `# key = value` stamp lines.
void write_report_csv(const std::vector<std::pair<std::string, TestReport>>& reports,
                      const std::vector<std::string>& stamp,
                      const std::filesystem::path& path);

}  // namespace statebench::stats

#endif  // STATEBENCH_STATS_HPP_
