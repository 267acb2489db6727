#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sagin/channel.hpp"
#include "sagin/env.hpp"
#include "sagin/radio.hpp"
#include "sagin/world.hpp"

namespace sagin {

/// Finite family of fading laws; the robust value is the worst case over it.
struct AmbiguitySet {
  std::vector<FadingModel> scenarios;

  /// Unit-mean Nakagami m in {0.5, 1, 2}.
  static AmbiguitySet nakagami_default();
  void validate() const;
};

std::string describe(const FadingModel& model);

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// Number of feasible profiles: the product over agents of their valid
/// (destination, power, sub-band) choices.
std::uint64_t count_profiles(const EnvConfig& config);

/// Calls `visit(index, actions, profile)` for every feasible profile in
/// lexicographic order of per-agent action indices (last agent fastest).
void enumerate_profiles(const EnvConfig& config,
                        const std::function<void(std::uint64_t, const std::vector<int>&, const DecisionProfile&)>& visit,
                        std::uint64_t cap = kDefaultEnumerationCap);

/// Monte Carlo estimates of E_M[sum of agent rates] for every M in the
/// ambiguity set, sharing one set of uniforms across scenarios.
class RobustEvaluator {
 public:
  RobustEvaluator(const World& world, const ChannelParams& params, const BandPlan& plan, AmbiguitySet omega,
                  int n_samples, std::uint64_t seed, double silence_dbm = kSilenceDbm);

  /// Mean sum rate per scenario (bps).
  [[nodiscard]] std::vector<double> scenario_means(const DecisionProfile& profile) const;
  /// Standard error of the sum-rate mean per scenario.
  [[nodiscard]] std::vector<double> scenario_stderrs(const DecisionProfile& profile) const;
  /// min over scenarios of the mean sum rate.
  [[nodiscard]] double value(const DecisionProfile& profile) const;

  [[nodiscard]] const AmbiguitySet& omega() const { return omega_; }
  [[nodiscard]] int n_samples() const { return n_samples_; }
  [[nodiscard]] const ChannelState& mean_channel() const { return mean_; }
  /// Fading multipliers applied to the mean gains for scenario s, sample k
  /// (layout of ChannelState::raw_gains()).
  [[nodiscard]] std::span<const double> multipliers(std::size_t scenario, int sample) const;

 private:
  [[nodiscard]] std::vector<double> sample_rates(const DecisionProfile& profile, std::size_t scenario) const;

  World world_;
  BandPlan plan_;
  AmbiguitySet omega_;
  int n_samples_;
  double silence_dbm_;
  ChannelState mean_;
  std::vector<std::vector<double>> multipliers_;  // [scenario * n_samples + k]
  std::vector<ChannelState> faded_;
};

double worst_case_expected_rate(const DecisionProfile& profile, const World& world, const ChannelParams& params,
                                const BandPlan& plan, const AmbiguitySet& omega, int n_samples, std::uint64_t seed);

struct ProfileValue {
  std::uint64_t index = 0;
  std::vector<int> actions;
  std::vector<double> scenario_means;
  double value = 0.0;
};

struct OracleResult {
  DecisionProfile profile;
  std::vector<int> actions;
  std::uint64_t index = 0;
  double value = 0.0;
  double value_stderr = 0.0;
  std::vector<ProfileValue> table;  // filled when requested
};

struct OracleOptions {
  AmbiguitySet omega = AmbiguitySet::nakagami_default();
  int n_samples = 1000;
  std::uint64_t seed = 0;
  std::uint64_t cap = kDefaultEnumerationCap;
  bool keep_table = false;
};

/// Exhaustive argmax of the worst-case expected sum rate on the frozen
/// world built from config.scenario; ties keep the first enumerated profile.
OracleResult solve(const EnvConfig& config, const OracleOptions& options);
OracleResult solve(const EnvConfig& config, const World& world, const OracleOptions& options);

/// Columns: profile,actions,value,<one column per scenario>.
void write_oracle_table(std::ostream& out, const EnvConfig& config, const AmbiguitySet& omega,
                        const std::vector<ProfileValue>& table);

}  // namespace sagin
