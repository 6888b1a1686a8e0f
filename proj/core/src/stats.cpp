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

#include "statebench/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

namespace statebench::stats {

void ResultTable::validate() const {
  if (scores.rows() < 2 || scores.cols() < 2) {
    throw ArgumentError("result table needs at least 2 blocks and 2 treatments");
  }
  if (static_cast<Eigen::Index>(blocks.size()) != scores.rows() ||
      static_cast<Eigen::Index>(treatments.size()) != scores.cols()) {
    throw ArgumentError("result table labels do not match its shape");
  }
  if (!scores.allFinite()) throw ArgumentError("result table has missing cells");
}

Matrix rank_rows(const Matrix& scores) {
  Matrix ranks(scores.rows(), scores.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.cols()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return scores(r, a) > scores(r, b);
    });
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() &&
             scores(r, order[j + 1]) == scores(r, order[i])) {
        ++j;
      }
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) ranks(r, order[t]) = avg;
      i = j + 1;
    }
  }
  return ranks;
}

FriedmanResult friedman(const ResultTable& table,
                        const FriedmanOptions& options) {
  table.validate();
  const auto n = static_cast<double>(table.scores.rows());
  const auto k = static_cast<double>(table.scores.cols());

  FriedmanResult out;
  out.ranks = rank_rows(table.scores);
  out.mean_ranks = out.ranks.colwise().mean().transpose();
  const double centre = (k + 1.0) / 2.0;
  double chi2 = 12.0 * n / (k * (k + 1.0)) *
                (out.mean_ranks.array() - centre).square().sum();

  if (options.tie_correction) {
    double tie_sum = 0.0;
    for (Eigen::Index r = 0; r < table.scores.rows(); ++r) {
      std::vector<double> row(table.scores.row(r).begin(),
                              table.scores.row(r).end());
      std::sort(row.begin(), row.end());
      std::size_t i = 0;
      while (i < row.size()) {
        std::size_t j = i;
        while (j + 1 < row.size() && row[j + 1] == row[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
      }
    }
    const double c = 1.0 - tie_sum / (n * (k * k * k - k));
    chi2 = c > 0.0 ? chi2 / c : 0.0;
  }
  out.chi2_r = chi2;
  out.p_value = chi2_sf(chi2, static_cast<int>(k) - 1);
  return out;
}

namespace {

// Regularized lower incomplete gamma P(a, x) by its power series; converges
// quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by its continued fraction
// (modified Lentz); used for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double chi2_sf(double x, int df) {
  if (df < 1) throw ArgumentError("chi-square needs df >= 1");
  if (!(x >= 0.0)) throw ArgumentError("chi-square statistic must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double a = 0.5 * df;
  const double half = 0.5 * x;
  const double q = half < a + 1.0 ? 1.0 - gamma_p_series(a, half)
                                  : gamma_q_continued_fraction(a, half);
  return std::clamp(q, 0.0, 1.0);
}

double nemenyi_q(int k, double alpha) {
  static constexpr std::array<double, 9> q05{1.960, 2.343, 2.569, 2.728, 2.850,
                                             2.949, 3.031, 3.102, 3.164};
  static constexpr std::array<double, 9> q10{1.645, 2.052, 2.291, 2.459, 2.589,
                                             2.693, 2.780, 2.855, 2.920};
  if (k < 2 || k > 10) {
    throw ArgumentError("Nemenyi table covers k = 2..10, got " +
                        std::to_string(k));
  }
  const auto idx = static_cast<std::size_t>(k - 2);
  if (std::abs(alpha - 0.05) < 1e-12) return q05[idx];
  if (std::abs(alpha - 0.10) < 1e-12) return q10[idx];
  throw ArgumentError("Nemenyi table covers alpha = 0.05 and 0.10");
}

double nemenyi_cd(int k, std::size_t n, double alpha) {
  if (n == 0) throw ArgumentError("Nemenyi needs n >= 1");
  const double kk = k;
  return nemenyi_q(k, alpha) *
         std::sqrt(kk * (kk + 1.0) / (6.0 * static_cast<double>(n)));
}

TestReport analyze(const ResultTable& table, double alpha,
                   const FriedmanOptions& options) {
  TestReport report;
  report.treatments = table.treatments;
  report.n_blocks = table.blocks.size();
  report.alpha = alpha;
  report.friedman = friedman(table, options);
  const int k = static_cast<int>(table.treatments.size());
  report.cd = nemenyi_cd(k, report.n_blocks, alpha);
  for (std::size_t a = 0; a < table.treatments.size(); ++a) {
    for (std::size_t b = a + 1; b < table.treatments.size(); ++b) {
      PairwiseComparison pc;
      pc.a = a;
      pc.b = b;
      pc.rank_gap = report.friedman.mean_ranks[static_cast<Eigen::Index>(b)] -
                    report.friedman.mean_ranks[static_cast<Eigen::Index>(a)];
      pc.significant = std::abs(pc.rank_gap) > report.cd;
      report.pairs.push_back(pc);
    }
  }
  return report;
}

void write_report_csv(
    const std::vector<std::pair<std::string, TestReport>>& reports,
    const std::vector<std::string>& stamp, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (const auto& line : stamp) out << "# " << line << '\n';
  out << "comparison,n_blocks,k,chi2_r,p_value,alpha,cd,treatment_a,"
         "treatment_b,mean_rank_a,mean_rank_b,rank_gap,better,significant\n";
  out << std::setprecision(10);
  for (const auto& [name, r] : reports) {
    for (const auto& pc : r.pairs) {
      const double ra = r.friedman.mean_ranks[static_cast<Eigen::Index>(pc.a)];
      const double rb = r.friedman.mean_ranks[static_cast<Eigen::Index>(pc.b)];
      const std::string& better =
          ra < rb ? r.treatments[pc.a]
                  : (rb < ra ? r.treatments[pc.b] : std::string("tie"));
      out << name << ',' << r.n_blocks << ',' << r.treatments.size() << ','
          << r.friedman.chi2_r << ',' << r.friedman.p_value << ',' << r.alpha
          << ',' << r.cd << ',' << r.treatments[pc.a] << ','
          << r.treatments[pc.b] << ',' << ra << ',' << rb << ','
          << pc.rank_gap << ',' << better << ','
          << (pc.significant ? "yes" : "no") << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace statebench::stats
