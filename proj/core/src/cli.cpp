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

#include "statebench/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "statebench/experiment.hpp"
#include "statebench/plot.hpp"
#include "statebench/results.hpp"
#include "statebench/stats.hpp"

namespace statebench {
namespace {

constexpr int kUsageError = 2;

struct Flags {
  std::string config;
  std::string out = "out";
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  // plot
  std::vector<std::string> inputs;
  std::string output;
};

struct UsageError : Error {
  using Error::Error;
};

ExperimentConfig load_experiment(const Flags& f) {
  if (!std::filesystem::exists(f.config)) {
    throw UsageError("config file not found: " + f.config);
  }
  auto cfg = ExperimentConfig::from_config(Config::from_file(f.config));
  if (f.seed) cfg.override_seed(*f.seed);
  return cfg;
}

Logger make_logger(const Flags& f, std::ostream& err) {
  if (f.quiet) return {};
  return [&err](const std::string& line) { err << "statebench: " << line << '\n'; };
}

int cmd_ingest(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = load_experiment(f);
  if (cfg.dataset_path.empty()) throw ConfigError("dataset.path is required");
  const auto raw = load_csv(cfg.dataset_path, cfg.schema);
  const auto cleaned = cfg.clean ? clean(raw) : raw;
  const Config c = Config::from_file(f.config);
  std::filesystem::path stem = c.has("ingest.output")
                                   ? c.resolve_path(c.require_string("ingest.output"))
                                   : std::filesystem::path(f.out) / cfg.dataset_name / "log";
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  save_log(cleaned, stem);
  (void)err;
  out << cfg.dataset_name << ": " << raw.size() << " rows, " << cleaned.size()
      << " events after cleaning, " << cleaned.num_users() << " users, "
      << cleaned.num_items() << " items -> " << stem.string() << ".log\n";
  return 0;
}

int cmd_train(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = load_experiment(f);
  const auto data = prepare_data(cfg);
  const auto bundle = prepare_embeddings(cfg, data, cfg.model, make_logger(f, err));
  const auto dir = std::filesystem::path(f.out) / cfg.dataset_name;
  std::filesystem::create_directories(dir);
  const auto snap = dir / (to_string(cfg.model) + ".emb");
  save_embeddings(bundle.space, snap);
  if (!bundle.from_snapshot) {
    write_grid_report(bundle.report, cfg.model,
                      dir / (to_string(cfg.model) + "-grid.csv"));
  }
  const auto& hp = bundle.space.hyperparams;
  out << to_string(cfg.model) << " d=" << hp.d << " lr=" << hp.lr
      << " reg=" << hp.reg << " epochs=" << hp.epochs << " -> "
      << snap.string() << '\n';
  return 0;
}

int cmd_tune(const Flags& f, std::ostream& out, std::ostream& err) {
  auto cfg = load_experiment(f);
  const auto data = prepare_data(cfg);
  const auto bundle = prepare_embeddings(cfg, data, cfg.model, make_logger(f, err));
  const CellSpec cell{cfg.model, cfg.state_kind, cfg.policy_kind};
  TuneInputs in;
  in.space = &bundle.train_only;
  in.warm_train = &data.split.warm_train;
  in.warm_valid = &data.split.warm_valid;
  in.lambda = cfg.lambda;
  in.max_arms = cfg.max_arms;
  in.settings = cfg.eval;
  Policy base;
  base.kind = cfg.policy_kind;
  base.seed = cfg.bandit_seed;
  const auto fixed = cfg.fixed_parameter(cfg.policy_kind);
  if (fixed) base.set_parameter(*fixed);
  const auto res = tune_bandit(in, cfg.state_kind, base, cfg.bandit_grid,
                               cfg.h.value_or(5), !fixed,
                               !cfg.h && cfg.state_kind == StateKind::kItemConcat);
  const auto dir = std::filesystem::path(f.out) / cfg.dataset_name / cell.name();
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "tuning.csv");
  for (const auto& line : cfg.resolved.lines()) csv << "# " << line << '\n';
  csv << "policy,param,h,valid_ndcg\n" << std::setprecision(17);
  for (const auto& e : res.report) {
    csv << to_string(e.policy.kind) << ',' << e.policy.parameter() << ','
        << e.h << ',' << e.valid_ndcg << '\n';
  }
  out << cell.name() << ": param=" << res.policy.parameter() << " h=" << res.h
      << " -> " << (dir / "tuning.csv").string() << '\n';
  return 0;
}

void print_run(std::ostream& out, const CellResult& r) {
  out << r.cell.name() << ": ndcg=" << std::setprecision(6)
      << r.summary.ndcg_final << " events=" << r.summary.events << " -> "
      << r.dir.string() << '\n';
}

int cmd_run(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = load_experiment(f);
  RunHooks hooks;
  hooks.log = make_logger(f, err);
  print_run(out, run_experiment(cfg, f.out, hooks));
  return 0;
}

int cmd_matrix(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto cfg = load_experiment(f);
  RunHooks hooks;
  hooks.log = make_logger(f, err);
  for (const auto& r : run_matrix(cfg, f.out, f.jobs, hooks)) print_run(out, r);
  return 0;
}

void print_report(std::ostream& out, const std::string& name,
                  const stats::TestReport& rep) {
  const auto& fr = rep.friedman;
  out << name << ": N=" << rep.n_blocks << " k=" << rep.treatments.size()
      << std::fixed << std::setprecision(4) << " chi2_r=" << fr.chi2_r
      << std::setprecision(6) << " p=" << fr.p_value << std::setprecision(4)
      << " cd=" << rep.cd << '\n';
  for (std::size_t t = 0; t < rep.treatments.size(); ++t) {
    out << "  mean rank " << rep.treatments[t] << " = " << fr.mean_ranks[t]
        << '\n';
  }
  for (const auto& p : rep.pairs) {
    out << "  " << rep.treatments[p.a] << " vs " << rep.treatments[p.b]
        << ": gap " << p.rank_gap
        << (p.significant ? " significant" : " not significant") << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

int cmd_stats(const Flags& f, std::ostream& out, std::ostream&) {
  if (!std::filesystem::exists(f.config)) {
    throw UsageError("config file not found: " + f.config);
  }
  const Config c = Config::from_file(f.config);
  c.check_keys(known_config_keys());
  const auto input = c.resolve_path(c.require_string("stats.input"));
  const double alpha = c.get_double("stats.alpha", 0.05);
  stats::FriedmanOptions opts;
  opts.tie_correction = c.get_bool("stats.tie_correction", false);
  std::vector<std::string> comparisons = c.get_list("stats.comparisons");
  if (comparisons.empty()) comparisons = {"state", "embedding"};

  const CsvTable ledger = read_csv_table(input);
  std::vector<std::pair<std::string, stats::TestReport>> reports;
  for (const auto& column : comparisons) {
    TreatmentSpec spec;
    spec.treatment_column = column;
    spec.treatment_order = c.get_list("stats.order." + column);
    const auto table = build_result_table(ledger, spec);
    reports.emplace_back(column, stats::analyze(table, alpha, opts));
    print_report(out, column, reports.back().second);
  }
  std::vector<std::string> stamp;
  stamp.push_back("stats.input = " + input.filename().string());
  for (const auto& line : c.lines()) {
    if (line.rfind("stats.", 0) == 0 && line.rfind("stats.input", 0) != 0) {
      stamp.push_back(line);
    }
  }
  stamp.push_back("stats.alpha.effective = " + std::to_string(alpha));
  stamp.push_back(std::string("stats.tie_correction.effective = ") +
                  (opts.tie_correction ? "true" : "false"));
  const auto dest = c.has("stats.output")
                        ? c.resolve_path(c.require_string("stats.output"))
                        : std::filesystem::path(f.out) / "stats.csv";
  if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
  stats::write_report_csv(reports, stamp, dest);
  out << "report -> " << dest.string() << '\n';
  return 0;
}

int cmd_plot(const Flags& f, std::ostream& out, std::ostream&) {
  std::vector<std::filesystem::path> files(f.inputs.begin(), f.inputs.end());
  std::filesystem::path dest = f.output;
  if (!f.config.empty()) {
    if (!std::filesystem::exists(f.config)) {
      throw UsageError("config file not found: " + f.config);
    }
    const Config c = Config::from_file(f.config);
    c.check_keys(known_config_keys());
    for (const auto& p : c.get_list("plot.inputs")) files.push_back(c.resolve_path(p));
    if (dest.empty() && c.has("plot.output")) {
      dest = c.resolve_path(c.require_string("plot.output"));
    }
  }
  if (dest.empty()) throw UsageError("plot needs --output");
  emit_plot(files, dest);
  out << files.size() << " series -> " << dest.string() << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Contextual bandit state representation benchmark", "statebench"};
  app.require_subcommand(1, 1);
  Flags f;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", f.config, "Configuration file");
    if (config_required) opt->required();
    sub->add_option("--out", f.out, "Output root directory")
        ->capture_default_str();
    sub->add_flag("--quiet", f.quiet, "Suppress progress messages");
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed-override", f.seed,
                    "Replace the embedding and bandit seeds");
  };

  using Handler = int (*)(const Flags&, std::ostream&, std::ostream&);
  std::vector<std::pair<CLI::App*, Handler>> subs;
  auto* ingest = app.add_subcommand("ingest", "Load, clean and persist a dataset");
  add_common(ingest, true);
  subs.emplace_back(ingest, cmd_ingest);
  auto* train = app.add_subcommand("train-embeddings",
                                   "Grid-search and save embedding factors");
  add_common(train, true);
  add_seed(train);
  subs.emplace_back(train, cmd_train);
  auto* tune = app.add_subcommand("tune", "Tune bandit hyperparameters");
  add_common(tune, true);
  add_seed(tune);
  subs.emplace_back(tune, cmd_tune);
  auto* run = app.add_subcommand("run", "Run one experiment cell");
  add_common(run, true);
  add_seed(run);
  subs.emplace_back(run, cmd_run);
  auto* matrix = app.add_subcommand("matrix", "Run every configured cell");
  add_common(matrix, true);
  add_seed(matrix);
  matrix->add_option("--jobs", f.jobs, "Cells run concurrently")
      ->check(CLI::PositiveNumber);
  subs.emplace_back(matrix, cmd_matrix);
  auto* st = app.add_subcommand("stats", "Friedman and Nemenyi tests on a ledger");
  add_common(st, true);
  subs.emplace_back(st, cmd_stats);
  auto* plot = app.add_subcommand("plot", "Cumulative NDCG chart from windows.csv files");
  add_common(plot, false);
  plot->add_option("--output", f.output, "SVG file to write");
  plot->add_option("inputs", f.inputs, "windows.csv files");
  subs.emplace_back(plot, cmd_plot);

  std::vector<std::string> argv_store{"statebench"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  for (const auto& [sub, handler] : subs) {
    if (!sub->parsed()) continue;
    try {
      return handler(f, out, err);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << '\n';
      return kUsageError;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return kUsageError;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace statebench
