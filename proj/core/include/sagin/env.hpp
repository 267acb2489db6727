#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "sagin/channel.hpp"
#include "sagin/radio.hpp"
#include "sagin/random.hpp"
#include "sagin/world.hpp"

namespace sagin {

enum class AgentType { gu, uav };

const char* to_string(AgentType type);

/// Weights of the shared reward r = a1*r_L + a2*r_coo + a3*r_exp. Unset
/// kappa defaults to 1/(N*deadline); unset w defaults to 1/N.
struct RewardWeights {
  double alpha_latency = 1.0;
  double alpha_coordination = 0.5;
  double alpha_exploration = 0.1;
  std::optional<double> kappa_gu;
  std::optional<double> kappa_uav;
  std::optional<double> w_gu;
  std::optional<double> w_uav;
  double zeta_gu = 0.01;
  double zeta_uav = 0.01;

  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

struct EnvConfig {
  ScenarioConfig scenario;
  ChannelParams channel;
  BandPlan bands;
  FadingModel fading = FadingModel::rayleigh();
  std::vector<double> power_levels_dbm = {23.0, 10.0, 5.0, kSilenceDbm};
  double silence_dbm = kSilenceDbm;
  double gu_packet_bits = 40e3;
  double uav_packet_bits = 80e3;
  int relay_queue_cap = 4;
  int deadline_steps = 100;
  double step_s = 1e-3;
  RewardWeights reward;
  // Static geometry: no mobility and GU placement fixed by scenario.seed
  // instead of being redrawn on every reset.
  bool frozen_world = false;

  void validate() const;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

/// Cross product destination x power level x sub-band; combinations whose
/// sub-band does not exist in the destination's band are masked out.
class ActionSpace {
 public:
  ActionSpace(AgentType type, int num_uavs, int num_power_levels, const BandPlan& plan);

  [[nodiscard]] int size() const { return static_cast<int>(mask_.size()); }
  [[nodiscard]] int num_valid() const { return num_valid_; }
  [[nodiscard]] const std::vector<std::uint8_t>& mask() const { return mask_; }
  [[nodiscard]] bool valid(int index) const { return mask_.at(static_cast<std::size_t>(index)) != 0; }

  struct Choice {
    Target target;
    int power_level = 0;
    int subband = 0;
  };
  [[nodiscard]] Choice decode(int index) const;
  [[nodiscard]] int encode(const Choice& choice) const;
  [[nodiscard]] AgentDecision decision(int index, std::span<const double> power_levels_dbm) const;

 private:
  [[nodiscard]] Target destination(int d) const;

  AgentType type_;
  int num_uavs_;
  int num_destinations_;
  int num_powers_;
  int num_subbands_;
  std::vector<std::uint8_t> mask_;
  int num_valid_ = 0;
};

enum class Origin { gu, uav };

struct Packet {
  int owner = 0;
  Origin origin = Origin::gu;
  double size_bits = 0.0;
  double bits_remaining = 0.0;
  int born_step = 0;
  std::optional<int> delivered_step;
  bool relay_hop = false;
  bool dropped = false;
  int holder = 0;
};

struct RewardBreakdown {
  double latency = 0.0;       // r_L
  double coordination = 0.0;  // r_coo
  double exploration = 0.0;   // r_exp
  double total = 0.0;
};

/// Per-packet latency penalty; latencies are in steps.
double latency_reward(std::span<const double> gu_latencies, std::span<const double> uav_latencies, double kappa_gu,
                      double kappa_uav);

/// Global gate: 1 when average latency strictly dropped. Each agent's delta
/// is the gate AND whether that agent transmitted this step.
double coordination_reward(double avg_latency_before, double avg_latency_after, std::span<const double> weights,
                           std::span<const std::uint8_t> transmitted);

double shannon_entropy_bits(std::span<const double> distribution);

double exploration_reward(std::span<const double> gu_entropies, std::span<const double> uav_entropies,
                          double zeta_gu, double zeta_uav);

RewardBreakdown total_reward(double r_latency, double r_coordination, double r_exploration,
                             const RewardWeights& weights);

/// Analytic per-episode return bounds: best is every packet delivered on the
/// first step with every agent transmitting at maximal action entropy; worst
/// is every packet still queued at the deadline.
struct ReturnBounds {
  double best = 0.0;
  double worst = 0.0;
};

/// (G - worst) / (best - worst), clamped into [0, 1].
double normalize_return(double episode_return, const ReturnBounds& bounds);

struct EnvState {
  World world;
  int t = 0;
  std::vector<Packet> packets;
  std::vector<std::vector<int>> queues;  // per agent, head first
  std::vector<double> last_sinr;         // linear, 0 when silent
  std::vector<std::vector<double>> last_interference_w;  // per agent, low sub-bands then high sub-bands
  double avg_latency = 0.0;
  Rng rng;
};

struct StepInfo {
  std::vector<LinkResult> links;
  std::vector<std::uint8_t> transmitted;
  std::vector<std::uint8_t> relay_denied;
  std::vector<double> bits_sent;
  std::vector<int> delivered;  // packet ids finalised this step
  double sum_rate_bps = 0.0;
};

struct StepResult {
  std::vector<std::vector<double>> observations;
  RewardBreakdown reward;
  bool done = false;
  StepInfo info;
};

/// Running tallies for the current episode.
struct EpisodeStats {
  double gu_bits_sent = 0.0;
  double uav_bits_sent = 0.0;
  int gu_generated = 0;
  int uav_generated = 0;
  int gu_delivered = 0;
  int uav_delivered = 0;
  double episode_return = 0.0;
  int steps = 0;
};

class Env {
 public:
  explicit Env(EnvConfig config);

  std::vector<std::vector<double>> reset(std::uint64_t seed);
  StepResult step(const DecisionProfile& joint_action, std::span<const double> entropies = {});

  /// [last SINR, interference at the BS per low sub-band, interference at
  /// the SAT per high sub-band, head-packet bits, relay queue, x, y, t/deadline].
  [[nodiscard]] std::vector<double> observe(int agent) const;
  [[nodiscard]] std::size_t observation_size() const;

  /// Accept iff the UAV's relay queue is shorter than the cap.
  [[nodiscard]] bool relay_admission(int uav) const;
  [[nodiscard]] int relay_queue_length(int uav) const;

  [[nodiscard]] const EnvConfig& config() const { return config_; }
  [[nodiscard]] const EnvState& state() const { return state_; }
  [[nodiscard]] const World& world() const { return state_.world; }
  [[nodiscard]] const EpisodeStats& stats() const { return stats_; }
  [[nodiscard]] bool done() const { return done_; }

  [[nodiscard]] int num_agents() const { return world().num_agents(); }
  [[nodiscard]] AgentType agent_type(int agent) const;
  [[nodiscard]] const ActionSpace& action_space(AgentType type) const;
  [[nodiscard]] bool has_packet(int agent) const;

  [[nodiscard]] double kappa(AgentType type) const;
  [[nodiscard]] double weight(AgentType type) const;
  [[nodiscard]] ReturnBounds return_bounds() const;

  /// Decode per-agent action indices into a profile.
  [[nodiscard]] DecisionProfile profile_from_actions(std::span<const int> actions) const;

  /// Silence every agent (uses the lowest power level and a valid destination).
  [[nodiscard]] DecisionProfile silent_profile() const;

  /// Current latency of a packet (steps); final latency once delivered.
  [[nodiscard]] int packet_latency(const Packet& packet) const;

  /// Optional per-step logs; null disables.
  void set_trajectory_log(std::ostream* out) { trajectory_log_ = out; }
  void set_radio_debug_log(std::ostream* out);

 private:
  void finalize_deadline();
  [[nodiscard]] double average_latency() const;
  [[nodiscard]] bool all_delivered() const;
  void log_trajectory(const DecisionProfile& profile, const StepInfo& info, const RewardBreakdown& reward) const;

  EnvConfig config_;
  EnvState state_;
  ActionSpace gu_actions_;
  ActionSpace uav_actions_;
  EpisodeStats stats_;
  bool done_ = true;
  std::ostream* trajectory_log_ = nullptr;
  std::ostream* radio_log_ = nullptr;
};

}  // namespace sagin
