#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sagin/env.hpp"
#include "sagin/learner.hpp"
#include "sagin/oracle.hpp"

namespace sagin {

struct Combo {
  int gus = 2;
  int uavs = 1;

  friend bool operator==(const Combo&, const Combo&) = default;
};

std::string to_string(const Combo& combo);

struct OracleConfig {
  Combo combo{1, 1};
  int subbands = 1;
  int n_samples = 1000;
  std::uint64_t seed = 0;
  std::uint64_t cap = kDefaultEnumerationCap;
  std::vector<FadingModel> omega = AmbiguitySet::nakagami_default().scenarios;
  int train_episodes = 300;
  int eval_episodes = 50;

  friend bool operator==(const OracleConfig&, const OracleConfig&) = default;
};

struct ExperimentConfig {
  std::vector<Combo> combos = {{2, 1}};
  std::vector<std::uint64_t> seeds = {0};
  int eval_episodes = 100;
  std::string output_dir = "runs";
  TrainConfig train;
  // Scenario counts are overridden per combo.
  EnvConfig env;
  OracleConfig oracle;

  void validate() const;
  [[nodiscard]] EnvConfig env_for(const Combo& combo) const;
  /// The frozen tiny instance used by the oracle comparison.
  [[nodiscard]] EnvConfig oracle_env() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses YAML text. Omitted fields keep their defaults; unknown keys and
/// invalid values raise ConfigError with the offending line.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);
std::string emit_config(const ExperimentConfig& config);

}  // namespace sagin
