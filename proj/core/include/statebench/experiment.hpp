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

#ifndef STATEBENCH_EXPERIMENT_HPP_
#define STATEBENCH_EXPERIMENT_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "statebench/bandits.hpp"
#include "statebench/config.hpp"
#include "statebench/embeddings.hpp"
#include "statebench/eval.hpp"
#include "statebench/ingest.hpp"
#include "statebench/results.hpp"
#include "statebench/state.hpp"

namespace statebench {

// Every config key the experiment pipeline understands.
const std::vector<std::string>& known_config_keys();

struct ExperimentConfig {
  std::string dataset_name = "dataset";
  std::filesystem::path dataset_path;  // raw delimiter-separated file
  std::filesystem::path log_stem;      // or a pre-ingested columnar log
  CsvSchema schema;
  bool clean = true;
  SplitPlan split;

  MfModel model = MfModel::kAls;
  // Grid overrides; an empty list keeps the model's default values.
  std::vector<int> grid_d;
  std::vector<double> grid_lr;
  std::vector<double> grid_reg;
  std::vector<int> grid_epochs;
  double conf_weight = 40.0;
  std::uint64_t mf_seed = 42;
  std::filesystem::path snapshot;  // for `model`
  std::map<MfModel, std::filesystem::path> model_snapshots;
  std::size_t mf_threads = 1;

  StateKind state_kind = StateKind::kItemConcat;
  std::optional<int> h;  // absent: tuned over bandit_grid.h_values

  PolicyKind policy_kind = PolicyKind::kLinUcb;
  // Fixed policy parameters; an absent one is tuned on warm_valid.
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<double> v;
  bool tune = true;  // false: absent parameters keep the Policy defaults
  BanditGrid bandit_grid;
  double lambda = 1.0;
  std::uint64_t bandit_seed = 42;
  std::size_t max_arms = 0;

  EvalSettings eval;

  std::vector<MfModel> matrix_models{MfModel::kAls, MfModel::kBpr};
  std::vector<StateKind> matrix_states{StateKind::kUser, StateKind::kItemMean,
                                       StateKind::kItemConcat};
  std::vector<PolicyKind> matrix_policies{
      PolicyKind::kLinUcb, PolicyKind::kLinGreedy, PolicyKind::kLinTs};

  // Input configuration with every effective default filled in.
  Config resolved;

  static ExperimentConfig from_config(const Config& cfg);
  MfGrid grid_for(MfModel m) const;
  std::filesystem::path snapshot_for(MfModel m) const;
  std::optional<double> fixed_parameter(PolicyKind kind) const;
  // Replaces both the embedding and the bandit seed.
  void override_seed(std::uint64_t seed);
};

struct PreparedData {
  InteractionLog log;  // cleaned
  SplitResult split;
  InteractionLog warm;  // warm_train followed by warm_valid
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct EmbeddingBundle {
  EmbeddingSpace space;       // used online
  EmbeddingSpace train_only;  // used for validation replays
  std::vector<GridEntry> report;
  bool from_snapshot = false;
};

using Logger = std::function<void(const std::string&)>;

EmbeddingBundle prepare_embeddings(const ExperimentConfig& cfg,
                                   const PreparedData& data, MfModel model,
                                   const Logger& log = {});

struct CellSpec {
  MfModel model = MfModel::kAls;
  StateKind state = StateKind::kItemConcat;
  PolicyKind policy = PolicyKind::kLinUcb;

  // `<embedding>-<state>-<policy>`
  std::string name() const;
};

struct RunHooks {
  EventObserver observer;
  bool write_outputs = true;
  Logger log;
};

struct CellResult {
  CellSpec cell;
  RunSummary summary;
  std::optional<TuneResult> tuning;
  std::filesystem::path dir;
  std::vector<std::string> stamp;
  std::uint64_t online_updates = 0;
};

// Tunes (when requested), warms up, and replays the test windows for one
// (embedding, state, policy) cell. Writes windows.csv, events.csv.gz,
// config.cfg and timing.txt under `<out_root>/<dataset>/<cell>/` unless
// hooks.write_outputs is false. The ledger row is left to the caller.
CellResult run_cell(const ExperimentConfig& cfg, const PreparedData& data,
                    const EmbeddingBundle& embeddings, const CellSpec& cell,
                    const std::filesystem::path& out_root,
                    const RunHooks& hooks = {});

// Full single-cell pipeline for the configured model, state and policy;
// appends the ledger row to `<out_root>/summary.csv`.
CellResult run_experiment(const ExperimentConfig& cfg,
                          const std::filesystem::path& out_root,
                          const RunHooks& hooks = {});

// Every configured (embedding x state x policy) cell, sharing data and
// embeddings. Ledger rows are appended in matrix order.
std::vector<CellResult> run_matrix(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_root,
                                   std::size_t jobs, const RunHooks& hooks = {});

}  // namespace statebench

#endif  // STATEBENCH_EXPERIMENT_HPP_
