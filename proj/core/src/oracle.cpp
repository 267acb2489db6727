#include "sagin/oracle.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sagin {

AmbiguitySet AmbiguitySet::nakagami_default() {
  return {{FadingModel::nakagami(0.5), FadingModel::nakagami(1.0), FadingModel::nakagami(2.0)}};
}

void AmbiguitySet::validate() const {
  if (scenarios.empty()) throw std::invalid_argument("ambiguity set is empty");
  for (const FadingModel& m : scenarios) m.validate();
}

std::string describe(const FadingModel& model) {
  std::ostringstream os;
  switch (model.family) {
    case FadingFamily::rayleigh: os << "rayleigh"; break;
    case FadingFamily::nakagami: os << "nakagami_m" << model.m; break;
    case FadingFamily::deterministic: os << "fixed"; break;
  }
  if (model.mean_power != 1.0) os << "_mean" << model.mean_power;
  return os.str();
}

namespace {

std::vector<ActionSpace> agent_spaces(const EnvConfig& config) {
  const int p = static_cast<int>(config.power_levels_dbm.size());
  std::vector<ActionSpace> spaces;
  for (int i = 0; i < config.scenario.num_gus; ++i)
    spaces.emplace_back(AgentType::gu, config.scenario.num_uavs, p, config.bands);
  for (int j = 0; j < config.scenario.num_uavs; ++j)
    spaces.emplace_back(AgentType::uav, config.scenario.num_uavs, p, config.bands);
  return spaces;
}

std::vector<int> valid_actions(const ActionSpace& space) {
  std::vector<int> out;
  for (int a = 0; a < space.size(); ++a)
    if (space.valid(a)) out.push_back(a);
  return out;
}

// Uniform strictly inside (0, 1).
double open_uniform(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

std::uint64_t count_profiles(const EnvConfig& config) {
  std::uint64_t total = 1;
  for (const ActionSpace& space : agent_spaces(config)) {
    const auto k = static_cast<std::uint64_t>(space.num_valid());
    if (total > std::numeric_limits<std::uint64_t>::max() / k) return std::numeric_limits<std::uint64_t>::max();
    total *= k;
  }
  return total;
}

void enumerate_profiles(const EnvConfig& config,
                        const std::function<void(std::uint64_t, const std::vector<int>&, const DecisionProfile&)>& visit,
                        std::uint64_t cap) {
  if (config.scenario.num_gus < 1 || config.scenario.num_uavs < 1)
    throw std::invalid_argument("at least one GU and one UAV are required");
  const std::uint64_t total = count_profiles(config);
  if (total > cap)
    throw std::length_error("profile space has " + std::to_string(total) + " profiles, above the enumeration cap of " +
                            std::to_string(cap) + "; use a smaller instance");
  const std::vector<ActionSpace> spaces = agent_spaces(config);
  std::vector<std::vector<int>> choices;
  for (const ActionSpace& s : spaces) choices.push_back(valid_actions(s));

  const std::size_t n = spaces.size();
  std::vector<std::size_t> digit(n, 0);
  std::vector<int> actions(n);
  DecisionProfile profile;
  profile.agents.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    actions[a] = choices[a][0];
    profile.agents[a] = spaces[a].decision(actions[a], config.power_levels_dbm);
  }
  for (std::uint64_t index = 0; index < total; ++index) {
    visit(index, actions, profile);
    // Mixed-radix increment, last agent fastest.
    for (std::size_t a = n; a-- > 0;) {
      if (++digit[a] < choices[a].size()) {
        actions[a] = choices[a][digit[a]];
        profile.agents[a] = spaces[a].decision(actions[a], config.power_levels_dbm);
        break;
      }
      digit[a] = 0;
      actions[a] = choices[a][0];
      profile.agents[a] = spaces[a].decision(actions[a], config.power_levels_dbm);
    }
  }
}

// ---------------------------------------------------------------------------

RobustEvaluator::RobustEvaluator(const World& world, const ChannelParams& params, const BandPlan& plan,
                                 AmbiguitySet omega, int n_samples, std::uint64_t seed, double silence_dbm)
    : world_(world),
      plan_(plan),
      omega_(std::move(omega)),
      n_samples_(n_samples),
      silence_dbm_(silence_dbm),
      mean_(ChannelState::mean(world, params, plan)) {
  omega_.validate();
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const std::size_t links = mean_.raw_gains().size();
  // One uniform per (sample, tx, rx, sub-band), shared by every scenario.
  std::vector<std::vector<double>> uniforms(static_cast<std::size_t>(n_samples), std::vector<double>(links));
  Rng rng(seed);
  for (auto& row : uniforms)
    for (double& u : row) u = open_uniform(rng);

  multipliers_.reserve(omega_.scenarios.size() * static_cast<std::size_t>(n_samples));
  faded_.reserve(multipliers_.capacity());
  for (const FadingModel& model : omega_.scenarios) {
    for (const auto& row : uniforms) {
      std::vector<double> mult(links);
      for (std::size_t k = 0; k < links; ++k) mult[k] = model.mean_power == 0.0 ? 0.0 : model.quantile(row[k]);
      faded_.push_back(mean_.with_fading(mult));
      multipliers_.push_back(std::move(mult));
    }
  }
}

std::span<const double> RobustEvaluator::multipliers(std::size_t scenario, int sample) const {
  return multipliers_.at(scenario * static_cast<std::size_t>(n_samples_) + static_cast<std::size_t>(sample));
}

std::vector<double> RobustEvaluator::sample_rates(const DecisionProfile& profile, std::size_t scenario) const {
  const AssignmentMap map = collect_assignments(world_, profile, plan_, silence_dbm_);
  std::vector<double> rates(static_cast<std::size_t>(n_samples_));
  for (int k = 0; k < n_samples_; ++k) {
    const ChannelState& ch = faded_[scenario * static_cast<std::size_t>(n_samples_) + static_cast<std::size_t>(k)];
    double sum = 0.0;
    for (const LinkResult& link : evaluate_links(map, ch, plan_))
      if (link.active) sum += link.rate_bps;
    rates[static_cast<std::size_t>(k)] = sum;
  }
  return rates;
}

std::vector<double> RobustEvaluator::scenario_means(const DecisionProfile& profile) const {
  std::vector<double> out;
  for (std::size_t s = 0; s < omega_.scenarios.size(); ++s) {
    const std::vector<double> r = sample_rates(profile, s);
    double sum = 0.0;
    for (double x : r) sum += x;
    out.push_back(sum / static_cast<double>(n_samples_));
  }
  return out;
}

std::vector<double> RobustEvaluator::scenario_stderrs(const DecisionProfile& profile) const {
  std::vector<double> out;
  for (std::size_t s = 0; s < omega_.scenarios.size(); ++s) {
    const std::vector<double> r = sample_rates(profile, s);
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= static_cast<double>(n_samples_);
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    var = n_samples_ > 1 ? var / (n_samples_ - 1) : 0.0;
    out.push_back(std::sqrt(var / n_samples_));
  }
  return out;
}

double RobustEvaluator::value(const DecisionProfile& profile) const {
  const std::vector<double> means = scenario_means(profile);
  double v = std::numeric_limits<double>::infinity();
  for (double m : means) v = std::min(v, m);
  return v;
}

double worst_case_expected_rate(const DecisionProfile& profile, const World& world, const ChannelParams& params,
                                const BandPlan& plan, const AmbiguitySet& omega, int n_samples, std::uint64_t seed) {
  return RobustEvaluator(world, params, plan, omega, n_samples, seed).value(profile);
}

// ---------------------------------------------------------------------------

OracleResult solve(const EnvConfig& config, const OracleOptions& options) {
  return solve(config, World::build(config.scenario), options);
}

OracleResult solve(const EnvConfig& config, const World& world, const OracleOptions& options) {
  const RobustEvaluator evaluator(world, config.channel, config.bands, options.omega, options.n_samples, options.seed,
                                  config.silence_dbm);
  OracleResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::size_t best_scenario = 0;
  enumerate_profiles(
      config,
      [&](std::uint64_t index, const std::vector<int>& actions, const DecisionProfile& profile) {
        ProfileValue row;
        row.index = index;
        row.actions = actions;
        row.scenario_means = evaluator.scenario_means(profile);
        row.value = std::numeric_limits<double>::infinity();
        std::size_t worst = 0;
        for (std::size_t s = 0; s < row.scenario_means.size(); ++s) {
          if (row.scenario_means[s] < row.value) {
            row.value = row.scenario_means[s];
            worst = s;
          }
        }
        if (row.value > best.value) {
          best.value = row.value;
          best.index = index;
          best.actions = actions;
          best.profile = profile;
          best_scenario = worst;
        }
        if (options.keep_table) best.table.push_back(std::move(row));
      },
      options.cap);
  best.value_stderr = evaluator.scenario_stderrs(best.profile).at(best_scenario);
  return best;
}

void write_oracle_table(std::ostream& out, const EnvConfig& config, const AmbiguitySet& omega,
                        const std::vector<ProfileValue>& table) {
  const std::vector<ActionSpace> spaces = agent_spaces(config);
  out << "profile,actions,value";
  for (const FadingModel& m : omega.scenarios) out << ',' << describe(m);
  out << '\n';
  out.precision(std::numeric_limits<double>::max_digits10);
  for (const ProfileValue& row : table) {
    out << row.index << ',';
    for (std::size_t a = 0; a < row.actions.size(); ++a) {
      const ActionSpace::Choice c = spaces[a].decode(row.actions[a]);
      if (a) out << ';';
      switch (c.target.kind) {
        case TargetKind::uav: out << "UAV" << c.target.uav; break;
        case TargetKind::bs: out << "BS"; break;
        case TargetKind::sat: out << "SAT"; break;
      }
      out << '/' << config.power_levels_dbm[static_cast<std::size_t>(c.power_level)] << "dBm/h" << c.subband;
    }
    out << ',' << row.value;
    for (double v : row.scenario_means) out << ',' << v;
    out << '\n';
  }
}

}  // namespace sagin
