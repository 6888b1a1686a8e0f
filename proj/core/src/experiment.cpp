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

#include "statebench/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

namespace statebench {
namespace {

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

char parse_delimiter(const std::string& text) {
  if (text == "tab" || text == "\\t" || text == "\t") return '\t';
  if (text == "comma") return ',';
  if (text == "space") return ' ';
  if (text == "semicolon") return ';';
  if (text.size() == 1) return text[0];
  throw ConfigError("ingest.delimiter must be one character or tab, comma, "
                    "space, semicolon; got '" + text + "'");
}

std::string delimiter_name(char c) {
  switch (c) {
    case '\t':
      return "tab";
    case ',':
      return "comma";
    case ' ':
      return "space";
    case ';':
      return "semicolon";
    default:
      return std::string(1, c);
  }
}

void require_exists(const std::filesystem::path& p, const std::string& key) {
  if (!std::filesystem::exists(p)) {
    throw ConfigError(key + ": file not found: " + p.string());
  }
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys{
      "dataset.name",        "dataset.path",        "dataset.log",
      "dataset.clean",       "ingest.user_col",     "ingest.item_col",
      "ingest.rating_col",   "ingest.ts_col",       "ingest.delimiter",
      "ingest.has_header",   "ingest.output",       "split.warm_fraction",
      "split.valid_fraction", "eval.n_windows",     "eval.k",
      "eval.exclude_seen",   "mf.model",            "mf.grid.d",
      "mf.grid.lr",          "mf.grid.reg",         "mf.grid.epochs",
      "mf.seed",             "mf.snapshot",         "mf.snapshot.*",
      "mf.threads",          "als.conf_weight",     "state.kind",
      "state.h",             "state.h_grid",        "bandit.policy",
      "bandit.alpha",        "bandit.epsilon",      "bandit.v",
      "bandit.lambda",       "bandit.seed",         "bandit.max_arms",
      "bandit.neg_samples",  "bandit.tune",         "bandit.grid.alpha",
      "bandit.grid.epsilon", "bandit.grid.v",       "matrix.embeddings",
      "matrix.states",       "matrix.policies",     "stats.input",
      "stats.comparisons",   "stats.alpha",         "stats.tie_correction",
      "stats.output",        "stats.order.*",       "plot.inputs",
      "plot.output",         "plot.title"};
  return keys;
}

ExperimentConfig ExperimentConfig::from_config(const Config& c) {
  c.check_keys(known_config_keys());
  ExperimentConfig e;
  Config& r = e.resolved;
  r = c;

  e.dataset_name = c.get_string("dataset.name", "dataset");
  if (e.dataset_name.empty() ||
      e.dataset_name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("dataset.name must be a plain directory name");
  }
  if (c.has("dataset.path")) {
    e.dataset_path = c.resolve_path(c.require_string("dataset.path"));
    require_exists(e.dataset_path, "dataset.path");
  }
  if (c.has("dataset.log")) {
    e.log_stem = c.resolve_path(c.require_string("dataset.log"));
    auto file = e.log_stem;
    file += ".log";
    require_exists(file, "dataset.log");
  }
  e.clean = c.get_bool("dataset.clean", true);

  auto& s = e.schema;
  s.user_col = c.get_string("ingest.user_col", s.user_col);
  s.item_col = c.get_string("ingest.item_col", s.item_col);
  s.rating_col = c.get_string("ingest.rating_col", s.rating_col);
  s.ts_col = c.get_string("ingest.ts_col", s.ts_col);
  s.delimiter = parse_delimiter(c.get_string("ingest.delimiter", ","));
  s.has_header = c.get_bool("ingest.has_header", true);

  e.split.warm_fraction = c.get_double("split.warm_fraction", 0.5);
  e.split.valid_fraction_of_warm = c.get_double("split.valid_fraction", 0.1);
  e.split.n_windows = c.get_uint("eval.n_windows", 10);
  if (!(e.split.warm_fraction > 0.0 && e.split.warm_fraction < 1.0)) {
    throw ConfigError("split.warm_fraction must lie in (0, 1)");
  }
  if (!(e.split.valid_fraction_of_warm >= 0.0 &&
        e.split.valid_fraction_of_warm < 1.0)) {
    throw ConfigError("split.valid_fraction must lie in [0, 1)");
  }

  e.model = parse_mf_model(c.get_string("mf.model", "als"));
  e.grid_d = c.get_int_list("mf.grid.d");
  e.grid_lr = c.get_double_list("mf.grid.lr");
  e.grid_reg = c.get_double_list("mf.grid.reg");
  e.grid_epochs = c.get_int_list("mf.grid.epochs");
  e.conf_weight = c.get_double("als.conf_weight", 40.0);
  e.mf_seed = c.get_uint("mf.seed", 42);
  e.mf_threads = c.get_uint("mf.threads", 1);
  if (c.has("mf.snapshot")) {
    e.snapshot = c.resolve_path(c.require_string("mf.snapshot"));
    require_exists(e.snapshot, "mf.snapshot");
  }
  for (MfModel m : {MfModel::kAls, MfModel::kBpr}) {
    const std::string key = "mf.snapshot." + to_string(m);
    if (c.has(key)) {
      e.model_snapshots[m] = c.resolve_path(c.require_string(key));
      require_exists(e.model_snapshots[m], key);
    }
  }

  e.state_kind = parse_state_kind(c.get_string("state.kind", "item_concat"));
  if (c.has("state.h")) {
    e.h = static_cast<int>(c.get_int("state.h", 5));
    if (*e.h < 1) throw ConfigError("state.h must be >= 1");
  }
  if (c.has("state.h_grid")) e.bandit_grid.h_values = c.get_int_list("state.h_grid");

  e.policy_kind = parse_policy_kind(c.get_string("bandit.policy", "linucb"));
  if (c.has("bandit.alpha")) e.alpha = c.get_double("bandit.alpha", 1.0);
  if (c.has("bandit.epsilon")) e.epsilon = c.get_double("bandit.epsilon", 0.1);
  if (c.has("bandit.v")) e.v = c.get_double("bandit.v", 0.5);
  e.tune = c.get_bool("bandit.tune", true);
  if (c.has("bandit.grid.alpha")) {
    e.bandit_grid.alpha_values = c.get_double_list("bandit.grid.alpha");
  }
  if (c.has("bandit.grid.epsilon")) {
    e.bandit_grid.epsilon_values = c.get_double_list("bandit.grid.epsilon");
  }
  if (c.has("bandit.grid.v")) {
    e.bandit_grid.v_values = c.get_double_list("bandit.grid.v");
  }
  e.lambda = c.get_double("bandit.lambda", 1.0);
  if (!(e.lambda > 0.0)) throw ConfigError("bandit.lambda must be > 0");
  e.bandit_seed = c.get_uint("bandit.seed", 42);
  e.max_arms = c.get_uint("bandit.max_arms", 0);

  e.eval.k = c.get_uint("eval.k", 20);
  if (e.eval.k == 0) throw ConfigError("eval.k must be >= 1");
  e.eval.exclude_seen = c.get_bool("eval.exclude_seen", true);
  e.eval.neg_samples = c.get_uint("bandit.neg_samples", 0);

  if (c.has("matrix.embeddings")) {
    e.matrix_models.clear();
    for (const auto& v : c.get_list("matrix.embeddings")) {
      e.matrix_models.push_back(parse_mf_model(v));
    }
  }
  if (c.has("matrix.states")) {
    e.matrix_states.clear();
    for (const auto& v : c.get_list("matrix.states")) {
      e.matrix_states.push_back(parse_state_kind(v));
    }
  }
  if (c.has("matrix.policies")) {
    e.matrix_policies.clear();
    for (const auto& v : c.get_list("matrix.policies")) {
      e.matrix_policies.push_back(parse_policy_kind(v));
    }
  }

  // Effective values of everything a run depends on.
  r.set("dataset.name", e.dataset_name);
  r.set("dataset.clean", e.clean ? "true" : "false");
  r.set("ingest.user_col", s.user_col);
  r.set("ingest.item_col", s.item_col);
  r.set("ingest.rating_col", s.rating_col);
  r.set("ingest.ts_col", s.ts_col);
  r.set("ingest.delimiter", delimiter_name(s.delimiter));
  r.set("ingest.has_header", s.has_header ? "true" : "false");
  r.set("split.warm_fraction", fmt(e.split.warm_fraction));
  r.set("split.valid_fraction", fmt(e.split.valid_fraction_of_warm));
  r.set("eval.n_windows", std::to_string(e.split.n_windows));
  r.set("eval.k", std::to_string(e.eval.k));
  r.set("eval.exclude_seen", e.eval.exclude_seen ? "true" : "false");
  r.set("mf.model", to_string(e.model));
  r.set("mf.seed", std::to_string(e.mf_seed));
  r.set("als.conf_weight", fmt(e.conf_weight));
  r.set("state.kind", to_string(e.state_kind));
  r.set("state.h_grid", join(e.bandit_grid.h_values));
  r.set("bandit.policy", to_string(e.policy_kind));
  r.set("bandit.tune", e.tune ? "true" : "false");
  r.set("bandit.grid.alpha", join(e.bandit_grid.alpha_values));
  r.set("bandit.grid.epsilon", join(e.bandit_grid.epsilon_values));
  r.set("bandit.grid.v", join(e.bandit_grid.v_values));
  r.set("bandit.lambda", fmt(e.lambda));
  r.set("bandit.seed", std::to_string(e.bandit_seed));
  r.set("bandit.max_arms", std::to_string(e.max_arms));
  r.set("bandit.neg_samples", std::to_string(e.eval.neg_samples));
  return e;
}

MfGrid ExperimentConfig::grid_for(MfModel m) const {
  MfGrid g = MfGrid::defaults(m);
  if (!grid_d.empty()) g.d_values = grid_d;
  if (!grid_lr.empty()) g.lr_values = grid_lr;
  if (!grid_reg.empty()) g.reg_values = grid_reg;
  if (!grid_epochs.empty()) g.epoch_values = grid_epochs;
  return g;
}

std::filesystem::path ExperimentConfig::snapshot_for(MfModel m) const {
  auto it = model_snapshots.find(m);
  if (it != model_snapshots.end()) return it->second;
  return m == model ? snapshot : std::filesystem::path();
}

std::optional<double> ExperimentConfig::fixed_parameter(PolicyKind kind) const {
  switch (kind) {
    case PolicyKind::kLinUcb:
      return alpha;
    case PolicyKind::kLinGreedy:
      return epsilon;
    case PolicyKind::kLinTs:
      return v;
  }
  return std::nullopt;
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
  mf_seed = seed;
  bandit_seed = seed;
  resolved.set("mf.seed", std::to_string(seed));
  resolved.set("bandit.seed", std::to_string(seed));
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  InteractionLog raw;
  if (!cfg.log_stem.empty()) {
    raw = load_log(cfg.log_stem);
  } else if (!cfg.dataset_path.empty()) {
    raw = load_csv(cfg.dataset_path, cfg.schema);
  } else {
    throw ConfigError("one of dataset.path or dataset.log is required");
  }
  PreparedData data;
  data.log = cfg.clean ? clean(raw) : std::move(raw);
  data.split = split(data.log, cfg.split);
  data.warm = data.split.warm();
  return data;
}

EmbeddingBundle prepare_embeddings(const ExperimentConfig& cfg,
                                   const PreparedData& data, MfModel model,
                                   const Logger& log) {
  EmbeddingBundle bundle;
  const auto snap = cfg.snapshot_for(model);
  if (!snap.empty()) {
    bundle.space = load_embeddings(snap);
    if (bundle.space.model != model) {
      throw ConfigError("snapshot " + snap.string() + " holds " +
                        to_string(bundle.space.model) + " factors, wanted " +
                        to_string(model));
    }
    if (bundle.space.num_users() != data.log.num_users() ||
        bundle.space.num_items() != data.log.num_items()) {
      throw ConfigError("snapshot " + snap.string() +
                        " does not match the dataset's id maps");
    }
    bundle.train_only = bundle.space;
    bundle.from_snapshot = true;
    if (log) log("loaded " + to_string(model) + " factors from " + snap.string());
    return bundle;
  }
  GridSearchOptions opts;
  opts.conf_weight = cfg.conf_weight;
  opts.seed = cfg.mf_seed;
  opts.k = cfg.eval.k;
  opts.threads = cfg.mf_threads;
  if (log) {
    opts.on_config = [&](const GridEntry& g) {
      log(to_string(model) + " d=" + std::to_string(g.params.d) +
          " lr=" + fmt(g.params.lr) + " reg=" + fmt(g.params.reg) +
          " epochs=" + std::to_string(g.params.epochs) +
          " valid_ndcg=" + fmt(g.valid_ndcg));
    };
  }
  auto res = grid_search_embeddings(model, cfg.grid_for(model),
                                    data.split.warm_train,
                                    data.split.warm_valid, opts);
  bundle.space = std::move(res.space);
  bundle.train_only = std::move(res.train_only_space);
  bundle.report = std::move(res.report);
  return bundle;
}

std::string CellSpec::name() const {
  return to_string(model) + "-" + to_string(state) + "-" + to_string(policy);
}

CellResult run_cell(const ExperimentConfig& cfg, const PreparedData& data,
                    const EmbeddingBundle& embeddings, const CellSpec& cell,
                    const std::filesystem::path& out_root,
                    const RunHooks& hooks) {
  const auto start = std::chrono::steady_clock::now();
  const EmbeddingSpace& space = embeddings.space;
  CellResult result;
  result.cell = cell;

  Policy policy;
  policy.kind = cell.policy;
  policy.seed = cfg.bandit_seed;
  const auto fixed = cfg.fixed_parameter(cell.policy);
  if (fixed) policy.set_parameter(*fixed);
  int h = cfg.h.value_or(5);
  const bool tune_policy = cfg.tune && !fixed;
  const bool tune_h =
      cfg.tune && !cfg.h && cell.state == StateKind::kItemConcat;
  if (tune_policy || tune_h) {
    if (hooks.log) hooks.log(cell.name() + ": tuning on warm_valid");
    TuneInputs in;
    in.space = &embeddings.train_only;
    in.warm_train = &data.split.warm_train;
    in.warm_valid = &data.split.warm_valid;
    in.lambda = cfg.lambda;
    in.max_arms = cfg.max_arms;
    in.settings = cfg.eval;
    result.tuning = tune_bandit(in, cell.state, policy, cfg.bandit_grid, h,
                                tune_policy, tune_h);
    policy = result.tuning->policy;
    h = result.tuning->h;
  }
  policy.validate();

  const StateSpec spec{cell.state, h, space.dim()};
  const ItemSet arm_items = select_arm_items(data.warm, cfg.max_arms);
  const auto windows = filter_cold_items(data.split.test_windows, arm_items);
  OnlineSession session(space, spec, init_arms(arm_items, spec.dim(), cfg.lambda),
                        policy, cfg.eval);
  session.warm_up(data.warm);

  const auto& hp = space.hyperparams;
  RunSummary& sum = result.summary;
  sum.dataset = cfg.dataset_name;
  sum.embedding = to_string(cell.model);
  sum.state = to_string(cell.state);
  sum.policy = to_string(cell.policy);
  sum.tuned["h"] = cell.state == StateKind::kItemConcat ? std::to_string(h) : "";
  sum.tuned["policy_param"] = fmt(policy.parameter());
  sum.tuned["mf_d"] = std::to_string(hp.d);
  sum.tuned["mf_lr"] = fmt(hp.lr);
  sum.tuned["mf_reg"] = fmt(hp.reg);
  sum.tuned["mf_epochs"] = std::to_string(hp.epochs);
  sum.tuned["mf_conf_weight"] = fmt(hp.conf_weight);
  sum.tuned["mf_seed"] = std::to_string(hp.seed);
  sum.tuned["bandit_seed"] = std::to_string(policy.seed);
  sum.tuned["lambda"] = fmt(cfg.lambda);

  Config stamp_cfg = cfg.resolved;
  stamp_cfg.set("mf.model", sum.embedding);
  stamp_cfg.set("state.kind", sum.state);
  stamp_cfg.set("bandit.policy", sum.policy);
  stamp_cfg.set("resolved.h", sum.tuned["h"]);
  stamp_cfg.set("resolved.policy_param", sum.tuned["policy_param"]);
  stamp_cfg.set("resolved.mf.d", sum.tuned["mf_d"]);
  stamp_cfg.set("resolved.mf.lr", sum.tuned["mf_lr"]);
  stamp_cfg.set("resolved.mf.reg", sum.tuned["mf_reg"]);
  stamp_cfg.set("resolved.mf.epochs", sum.tuned["mf_epochs"]);
  stamp_cfg.set("resolved.mf.seed", sum.tuned["mf_seed"]);
  stamp_cfg.set("resolved.mf.source",
                embeddings.from_snapshot ? "snapshot" : "grid");
  result.stamp = stamp_cfg.lines();

  result.dir = out_root / cfg.dataset_name / cell.name();
  std::unique_ptr<EventLogWriter> events;
  if (hooks.write_outputs) {
    std::filesystem::create_directories(result.dir);
    events = std::make_unique<EventLogWriter>(result.dir / "events.csv.gz",
                                              result.stamp, *data.log.users,
                                              *data.log.items);
  }
  if (events || hooks.observer) {
    session.set_observer([&](const EventRecord& rec, const Vector& x) {
      if (events) events->write(rec);
      if (hooks.observer) hooks.observer(rec, x);
    });
  }
  for (std::size_t w = 0; w < windows.size(); ++w) {
    sum.windows.push_back(session.run_window(windows[w], w + 1));
  }
  sum.events = session.evaluated_events();
  sum.ndcg_final = session.cumulative_ndcg();
  result.online_updates = session.online_updates();
  sum.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  if (hooks.log) {
    hooks.log(cell.name() + ": ndcg@" + std::to_string(cfg.eval.k) + " = " +
              fmt(sum.ndcg_final) + " over " + std::to_string(sum.events) +
              " events");
  }

  if (hooks.write_outputs) {
    events->close();
    write_windows_csv(sum.windows, result.stamp, result.dir / "windows.csv");
    {
      std::ofstream cfg_out(result.dir / "config.cfg");
      for (const auto& line : result.stamp) cfg_out << line << '\n';
    }
    std::ofstream timing(result.dir / "timing.txt");
    timing << "wall_seconds = " << fmt(sum.wall_seconds) << '\n';
  }
  return result;
}

namespace {

void write_embedding_report(const ExperimentConfig& cfg,
                            const EmbeddingBundle& bundle, MfModel model,
                            const std::filesystem::path& out_root) {
  if (bundle.from_snapshot) return;
  const auto dir = out_root / cfg.dataset_name;
  std::filesystem::create_directories(dir);
  write_grid_report(bundle.report, model, dir / (to_string(model) + "-grid.csv"));
}

}  // namespace

CellResult run_experiment(const ExperimentConfig& cfg,
                          const std::filesystem::path& out_root,
                          const RunHooks& hooks) {
  const PreparedData data = prepare_data(cfg);
  const EmbeddingBundle emb = prepare_embeddings(cfg, data, cfg.model, hooks.log);
  if (hooks.write_outputs) write_embedding_report(cfg, emb, cfg.model, out_root);
  CellResult res = run_cell(cfg, data, emb,
                            {cfg.model, cfg.state_kind, cfg.policy_kind},
                            out_root, hooks);
  if (hooks.write_outputs) {
    append_ledger_row(out_root / "summary.csv", res.summary, res.stamp);
  }
  return res;
}

std::vector<CellResult> run_matrix(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_root,
                                   std::size_t jobs, const RunHooks& hooks) {
  const PreparedData data = prepare_data(cfg);

  std::mutex log_mutex;
  RunHooks shared = hooks;
  if (hooks.log) {
    shared.log = [&](const std::string& line) {
      std::lock_guard<std::mutex> lock(log_mutex);
      hooks.log(line);
    };
  }

  std::map<MfModel, EmbeddingBundle> bundles;
  for (MfModel m : cfg.matrix_models) {
    if (bundles.count(m)) continue;
    bundles[m] = prepare_embeddings(cfg, data, m, shared.log);
    if (hooks.write_outputs) write_embedding_report(cfg, bundles[m], m, out_root);
  }

  std::vector<CellSpec> cells;
  for (MfModel m : cfg.matrix_models) {
    for (StateKind s : cfg.matrix_states) {
      for (PolicyKind p : cfg.matrix_policies) cells.push_back({m, s, p});
    }
  }

  std::vector<std::optional<CellResult>> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        results[i] = run_cell(cfg, data, bundles.at(cells[i].model), cells[i],
                              out_root, shared);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min(jobs, cells.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw Error(cells[i].name() + ": " + e.what());
    }
  }

  std::vector<CellResult> out;
  out.reserve(cells.size());
  for (auto& r : results) {
    if (hooks.write_outputs) {
      append_ledger_row(out_root / "summary.csv", r->summary, r->stamp);
    }
    out.push_back(std::move(*r));
  }
  return out;
}

}  // namespace statebench
