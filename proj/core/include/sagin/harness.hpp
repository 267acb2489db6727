#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sagin/config.hpp"
#include "sagin/learner.hpp"

namespace sagin {

const char* version_string();

struct CellResult {
  Combo combo;
  std::uint64_t seed = 0;
  TrainResult train;
  Metrics trained;
  Metrics random;
  bool failed = false;
  std::string error;
};

struct RunArtifact {
  std::filesystem::path directory;
  std::vector<CellResult> cells;
  int exit_code = 0;
};

/// Train, evaluate greedily and evaluate the random baseline for one cell.
CellResult run_cell(const ExperimentConfig& config, const Combo& combo, std::uint64_t seed);

/// Every (combo, seed) cell on up to `workers` threads, then writes
/// learning_curve.csv, eval_metrics.csv, baseline_metrics.csv, config.yaml,
/// VERSION and checkpoints/ under config.output_dir. A failed cell leaves a
/// FAILED marker and a nonzero exit code.
RunArtifact run_experiment(const ExperimentConfig& config, int workers = 1);

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, const Combo& combo, std::uint64_t seed,
                                      AgentType type);

void write_learning_curve_header(std::ostream& out);
void write_learning_curve_rows(std::ostream& out, const Combo& combo, std::uint64_t seed,
                               const std::vector<EpisodeRecord>& curve);
void write_metrics_header(std::ostream& out);
void write_metrics_rows(std::ostream& out, const Combo& combo, std::uint64_t seed, const Metrics& metrics);
void write_run_stamp(const std::filesystem::path& dir, const ExperimentConfig& config);

struct OracleComparison {
  Combo combo;
  std::uint64_t profiles = 0;
  double oracle_value_bps = 0.0;
  double oracle_stderr_bps = 0.0;
  double trained_rate_bps = 0.0;
  double trained_stderr_bps = 0.0;
  double random_rate_bps = 0.0;
  double random_stderr_bps = 0.0;
  OracleResult oracle;
  TypeNets nets;
};

/// On the frozen oracle instance: the robust optimum, and the worst-case
/// expected per-step sum rate of the trained greedy policy (averaged over
/// its rollout decisions) and of the uniform random policy.
OracleComparison oracle_compare(const ExperimentConfig& config, bool keep_table = false);

void write_oracle_comparison_header(std::ostream& out);
void write_oracle_comparison_row(std::ostream& out, const OracleComparison& row);

}  // namespace sagin
