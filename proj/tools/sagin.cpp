// sagin: train, evaluate and compare cooperative link/power/sub-band policies.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sagin/config.hpp"
#include "sagin/harness.hpp"
#include "sagin/learner.hpp"
#include "sagin/oracle.hpp"

namespace fs = std::filesystem;
using namespace sagin;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int verbosity = 0;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? parse_config_text("") : parse_config(c.config_path);
  if (!c.out_dir.empty()) cfg.output_dir = c.out_dir;
  if (c.seed) {
    cfg.seeds = {*c.seed};
    cfg.oracle.seed = *c.seed;
  }
  return cfg;
}

int workers_from_env() {
  const char* v = std::getenv("SAGIN_WORKERS");
  if (v == nullptr || *v == '\0') return 1;
  try {
    return std::max(1, std::stoi(v));
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("SAGIN_WORKERS must be an integer, got '") + v + "'");
  }
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "YAML experiment config (defaults when omitted)");
  app->add_option("-o,--out", c.out_dir, "Output directory (overrides output_dir)");
  app->add_option("-s,--seed", c.seed, "Run a single seed (overrides seeds)");
  app->add_flag("-v,--verbose", c.verbosity, "More output; -vv on eval writes per-step logs")
      ->multi_option_policy(CLI::MultiOptionPolicy::Sum);
}

int cmd_train(const Common& c) {
  ExperimentConfig cfg = load(c);
  const fs::path dir = cfg.output_dir;
  write_run_stamp(dir, cfg);
  fs::create_directories(dir / "checkpoints");
  std::ofstream curve(dir / "learning_curve.csv");
  write_learning_curve_header(curve);
  for (const Combo& combo : cfg.combos) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig t = cfg.train;
      t.seed = seed;
      try {
        const TrainResult r = train(cfg.env_for(combo), t);
        write_learning_curve_rows(curve, combo, seed, r.curve);
        r.nets.gu.save(checkpoint_path(dir, combo, seed, AgentType::gu).string());
        r.nets.uav.save(checkpoint_path(dir, combo, seed, AgentType::uav).string());
        if (c.verbosity > 0 && !r.curve.empty())
          std::cerr << to_string(combo) << " seed " << seed << ": final normalized reward "
                    << r.curve.back().normalized_reward << '\n';
      } catch (const TrainingDiverged& e) {
        std::ofstream(dir / "FAILED") << to_string(combo) << " seed " << seed << ": " << e.what() << '\n';
        std::cerr << "training diverged: " << e.what() << '\n';
        return 1;
      }
    }
  }
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint_dir) {
  ExperimentConfig cfg = load(c);
  const fs::path in = checkpoint_dir.empty() ? fs::path(cfg.output_dir) : fs::path(checkpoint_dir);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  std::ofstream eval(out / "eval_metrics.csv");
  std::ofstream base(out / "baseline_metrics.csv");
  write_metrics_header(eval);
  write_metrics_header(base);
  std::ofstream trajectory;
  std::ofstream radio;
  EvalOptions opts;
  opts.entropy_window = cfg.train.entropy_window;
  if (c.verbosity >= 2) {
    trajectory.open(out / "trajectory.jsonl");
    radio.open(out / "radio_debug.csv");
    opts.trajectory_log = &trajectory;
    opts.radio_debug_log = &radio;
  }
  for (const Combo& combo : cfg.combos) {
    for (std::uint64_t seed : cfg.seeds) {
      TypeNets nets{ValueNet::load(checkpoint_path(in, combo, seed, AgentType::gu).string()),
                    ValueNet::load(checkpoint_path(in, combo, seed, AgentType::uav).string())};
      const EnvConfig env = cfg.env_for(combo);
      const Metrics trained = evaluate(env, nets, cfg.eval_episodes, derive_seed(seed, 7), opts);
      opts.trajectory_log = nullptr;
      opts.radio_debug_log = nullptr;
      const Metrics random = evaluate(env, uniform_random_policy(), cfg.eval_episodes, derive_seed(seed, 8), opts);
      write_metrics_rows(eval, combo, seed, trained);
      write_metrics_rows(base, combo, seed, random);
      if (c.verbosity > 0)
        std::cerr << to_string(combo) << " seed " << seed << ": vehicle " << trained.gu_rate_mbps << " Mbps / "
                  << trained.gu_success << ", uav " << trained.uav_rate_mbps << " Mbps / " << trained.uav_success
                  << '\n';
    }
  }
  return 0;
}

int cmd_oracle(const Common& c) {
  ExperimentConfig cfg = load(c);
  const fs::path dir = cfg.output_dir;
  write_run_stamp(dir, cfg);
  const EnvConfig env = cfg.oracle_env();
  const std::uint64_t profiles = count_profiles(env);
  const OracleComparison cmp = oracle_compare(cfg, profiles <= 10'000);
  if (profiles <= 10'000) {
    std::ofstream table(dir / "oracle_table.csv");
    write_oracle_table(table, env, AmbiguitySet{cfg.oracle.omega}, cmp.oracle.table);
  }
  std::ofstream out(dir / "oracle_compare.csv");
  write_oracle_comparison_header(out);
  write_oracle_comparison_row(out, cmp);
  if (c.verbosity > 0) {
    std::cerr << "profiles " << profiles << ", oracle " << cmp.oracle_value_bps << " bps, trained "
              << cmp.trained_rate_bps << " bps, random " << cmp.random_rate_bps << " bps\n";
  }
  return 0;
}

int cmd_sweep(const Common& c) {
  const RunArtifact artifact = run_experiment(load(c), workers_from_env());
  if (c.verbosity > 0) {
    for (const CellResult& cell : artifact.cells) {
      std::cerr << to_string(cell.combo) << " seed " << cell.seed;
      if (cell.failed) {
        std::cerr << ": FAILED " << cell.error << '\n';
        continue;
      }
      std::cerr << ": reward " << cell.trained.mean_normalized_reward() << " (random "
                << cell.random.mean_normalized_reward() << "), vehicle " << cell.trained.gu_rate_mbps << " Mbps / "
                << cell.trained.gu_success << ", uav " << cell.trained.uav_rate_mbps << " Mbps / "
                << cell.trained.uav_success << '\n';
    }
  }
  return artifact.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-air-ground network simulator and multi-agent trainer"};
  app.set_version_flag("--version", std::string("sagin ") + version_string());
  app.require_subcommand(1);

  Common train_opts;
  Common eval_opts;
  Common oracle_opts;
  Common sweep_opts;
  std::string checkpoint_dir;
  CLI::App* train_cmd = app.add_subcommand("train", "Train every (combo, seed) cell and save checkpoints");
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate saved checkpoints and the random baseline");
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Solve the robust problem on the tiny frozen instance");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Train, evaluate and baseline every cell (SAGIN_WORKERS threads)");
  add_common(train_cmd, train_opts);
  add_common(eval_cmd, eval_opts);
  add_common(oracle_cmd, oracle_opts);
  add_common(sweep_cmd, sweep_opts);
  eval_cmd->add_option("--checkpoints", checkpoint_dir, "Run directory holding checkpoints/ (default: --out)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train_cmd) return cmd_train(train_opts);
    if (*eval_cmd) return cmd_eval(eval_opts, checkpoint_dir);
    if (*oracle_cmd) return cmd_oracle(oracle_opts);
    if (*sweep_cmd) return cmd_sweep(sweep_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
