#include "sagin/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "sagin/oracle.hpp"

#ifndef SAGIN_VERSION
#define SAGIN_VERSION "0.0.0"
#endif

namespace sagin {

const char* version_string() { return SAGIN_VERSION; }

namespace {

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

CellResult run_cell(const ExperimentConfig& config, const Combo& combo, std::uint64_t seed) {
  CellResult cell;
  cell.combo = combo;
  cell.seed = seed;
  const EnvConfig env = config.env_for(combo);
  TrainConfig train_cfg = config.train;
  train_cfg.seed = seed;
  try {
    cell.train = train(env, train_cfg);
    EvalOptions opts;
    opts.entropy_window = train_cfg.entropy_window;
    cell.trained = evaluate(env, cell.train.nets, config.eval_episodes, derive_seed(seed, 7), opts);
    cell.random = evaluate(env, uniform_random_policy(), config.eval_episodes, derive_seed(seed, 8), opts);
  } catch (const TrainingDiverged& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  return cell;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const Combo& combo, std::uint64_t seed,
                                      AgentType type) {
  return dir / "checkpoints" / (to_string(combo) + "_s" + std::to_string(seed) + "_" + to_string(type) + ".qnet");
}

void write_learning_curve_header(std::ostream& out) { out << "combo,seed,episode,normalized_reward,epsilon,loss\n"; }

void write_learning_curve_rows(std::ostream& out, const Combo& combo, std::uint64_t seed,
                               const std::vector<EpisodeRecord>& curve) {
  for (const EpisodeRecord& r : curve)
    out << to_string(combo) << ',' << seed << ',' << r.episode << ',' << fmt(r.normalized_reward) << ','
        << fmt(r.epsilon) << ',' << fmt(r.loss) << '\n';
}

void write_metrics_header(std::ostream& out) { out << "combo,seed,group,avg_rate_mbps,success_rate\n"; }

void write_metrics_rows(std::ostream& out, const Combo& combo, std::uint64_t seed, const Metrics& m) {
  out << to_string(combo) << ',' << seed << ",vehicle," << fmt(m.gu_rate_mbps) << ',' << fmt(m.gu_success) << '\n';
  out << to_string(combo) << ',' << seed << ",uav," << fmt(m.uav_rate_mbps) << ',' << fmt(m.uav_success) << '\n';
}

void write_run_stamp(const std::filesystem::path& dir, const ExperimentConfig& config) {
  std::filesystem::create_directories(dir);
  open_out(dir / "config.yaml") << emit_config(config);
  open_out(dir / "VERSION") << "sagin " << version_string() << '\n';
}

RunArtifact run_experiment(const ExperimentConfig& config, int workers) {
  config.validate();
  RunArtifact artifact;
  artifact.directory = config.output_dir;
  const auto& dir = artifact.directory;
  write_run_stamp(dir, config);
  std::filesystem::create_directories(dir / "checkpoints");
  std::filesystem::remove(dir / "FAILED");

  struct Job {
    Combo combo;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const Combo& c : config.combos)
    for (std::uint64_t s : config.seeds) jobs.push_back({c, s});
  artifact.cells.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      artifact.cells[i] = run_cell(config, jobs[i].combo, jobs[i].seed);
  };
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ofstream curve = open_out(dir / "learning_curve.csv");
  std::ofstream eval = open_out(dir / "eval_metrics.csv");
  std::ofstream base = open_out(dir / "baseline_metrics.csv");
  write_learning_curve_header(curve);
  write_metrics_header(eval);
  write_metrics_header(base);
  std::string failures;
  for (const CellResult& cell : artifact.cells) {
    write_learning_curve_rows(curve, cell.combo, cell.seed, cell.train.curve);
    if (cell.failed) {
      failures += to_string(cell.combo) + " seed " + std::to_string(cell.seed) + ": " + cell.error + "\n";
      continue;
    }
    write_metrics_rows(eval, cell.combo, cell.seed, cell.trained);
    write_metrics_rows(base, cell.combo, cell.seed, cell.random);
    cell.train.nets.gu.save(checkpoint_path(dir, cell.combo, cell.seed, AgentType::gu).string());
    cell.train.nets.uav.save(checkpoint_path(dir, cell.combo, cell.seed, AgentType::uav).string());
  }
  if (!failures.empty()) {
    open_out(dir / "FAILED") << failures;
    artifact.exit_code = 1;
  }
  return artifact;
}

// ---------------------------------------------------------------------------

OracleComparison oracle_compare(const ExperimentConfig& config, bool keep_table) {
  config.validate();
  const EnvConfig env_config = config.oracle_env();
  const OracleConfig& oc = config.oracle;
  OracleComparison cmp;
  cmp.combo = oc.combo;
  cmp.profiles = count_profiles(env_config);

  OracleOptions options;
  options.omega.scenarios = oc.omega;
  options.n_samples = oc.n_samples;
  options.seed = derive_seed(oc.seed, 11);
  options.cap = oc.cap;
  options.keep_table = keep_table;
  Env env(env_config);
  cmp.oracle = solve(env_config, env.world(), options);
  cmp.oracle_value_bps = cmp.oracle.value;
  cmp.oracle_stderr_bps = cmp.oracle.value_stderr;

  const RobustEvaluator evaluator(env.world(), env_config.channel, env_config.bands, options.omega, oc.n_samples,
                                  options.seed, env_config.silence_dbm);

  // Uniform random policy: every profile equally likely, so its expected
  // rate under each scenario is the mean over the enumeration.
  std::vector<double> sums(oc.omega.size(), 0.0);
  std::vector<double> var_sums(oc.omega.size(), 0.0);
  std::uint64_t count = 0;
  enumerate_profiles(
      env_config,
      [&](std::uint64_t, const std::vector<int>&, const DecisionProfile& profile) {
        const std::vector<double> means = evaluator.scenario_means(profile);
        const std::vector<double> errs = evaluator.scenario_stderrs(profile);
        for (std::size_t s = 0; s < means.size(); ++s) {
          sums[s] += means[s];
          var_sums[s] += errs[s] * errs[s];
        }
        ++count;
      },
      oc.cap);
  std::size_t worst = 0;
  for (std::size_t s = 0; s < sums.size(); ++s)
    if (sums[s] < sums[worst]) worst = s;
  cmp.random_rate_bps = sums[worst] / static_cast<double>(count);
  // Profile estimates share samples, so the error of the mean is bounded by
  // the mean of the per-profile errors; use the root-mean-square as a proxy.
  cmp.random_stderr_bps = std::sqrt(var_sums[worst] / static_cast<double>(count));

  TrainConfig train_cfg = config.train;
  train_cfg.episodes = oc.train_episodes;
  train_cfg.seed = oc.seed;
  cmp.nets = train(env_config, train_cfg).nets;

  // Greedy decisions along rollouts in the frozen world, each scored by its
  // worst-case expected sum rate.
  std::map<std::vector<int>, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::vector<double> per_scenario(oc.omega.size(), 0.0);
  std::vector<double> mc_var(oc.omega.size(), 0.0);
  long steps = 0;
  for (int episode = 0; episode < oc.eval_episodes; ++episode) {
    std::vector<std::vector<double>> obs = env.reset(derive_seed(oc.seed, 3000 + static_cast<std::uint64_t>(episode)));
    while (!env.done()) {
      const std::vector<int> actions = greedy_joint_actions(env, obs, cmp.nets);
      const DecisionProfile profile = env.profile_from_actions(actions);
      auto it = cache.find(actions);
      if (it == cache.end())
        it = cache.emplace(actions, std::make_pair(evaluator.scenario_means(profile), evaluator.scenario_stderrs(profile)))
                 .first;
      for (std::size_t s = 0; s < per_scenario.size(); ++s) {
        per_scenario[s] += it->second.first[s];
        mc_var[s] += it->second.second[s] * it->second.second[s];
      }
      ++steps;
      StepResult r = env.step(profile);
      obs = std::move(r.observations);
    }
  }
  if (steps > 0) {
    worst = 0;
    for (std::size_t s = 0; s < per_scenario.size(); ++s)
      if (per_scenario[s] < per_scenario[worst]) worst = s;
    cmp.trained_rate_bps = per_scenario[worst] / static_cast<double>(steps);
    cmp.trained_stderr_bps = std::sqrt(mc_var[worst] / static_cast<double>(steps));
  }
  return cmp;
}

void write_oracle_comparison_header(std::ostream& out) {
  out << "combo,profiles,oracle_value_bps,oracle_stderr_bps,trained_rate_bps,trained_stderr_bps,random_rate_bps,"
         "random_stderr_bps\n";
}

void write_oracle_comparison_row(std::ostream& out, const OracleComparison& r) {
  out << to_string(r.combo) << ',' << r.profiles << ',' << fmt(r.oracle_value_bps) << ',' << fmt(r.oracle_stderr_bps)
      << ',' << fmt(r.trained_rate_bps) << ',' << fmt(r.trained_stderr_bps) << ',' << fmt(r.random_rate_bps) << ','
      << fmt(r.random_stderr_bps) << '\n';
}

}  // namespace sagin
