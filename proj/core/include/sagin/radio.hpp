#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sagin/band_plan.hpp"
#include "sagin/channel.hpp"
#include "sagin/world.hpp"

namespace sagin {

inline constexpr double kSilenceDbm = -100.0;

enum class TargetKind { uav, bs, sat };

struct Target {
  TargetKind kind = TargetKind::bs;
  int uav = -1;  // only for TargetKind::uav

  friend bool operator==(const Target&, const Target&) = default;
};

/// One agent's object-power-channel decision. `x` holds the destination
/// indicators [x_{i,UAV_0} .. x_{i,UAV_{N2-1}}, x_{i,B}, x_{i,S}].
struct AgentDecision {
  std::vector<std::uint8_t> x;
  double power_dbm = kSilenceDbm;
  int subband = 0;

  static AgentDecision make(Target target, double power_dbm, int subband, int num_uavs);

  friend bool operator==(const AgentDecision&, const AgentDecision&) = default;
};

/// Joint decision of every agent, indexed GUs first then UAVs (same order as World).
struct DecisionProfile {
  std::vector<AgentDecision> agents;

  friend bool operator==(const DecisionProfile&, const DecisionProfile&) = default;
};

/// Decode the destination of `agent`, enforcing the unicast constraints:
/// GUs pick exactly one of {UAV_j, BS, SAT}; UAVs exactly one of {BS, SAT}.
Target decode_target(const World& world, int agent, const AgentDecision& decision);

NodeId receiver_node(const World& world, Target target);

struct Transmission {
  int agent = 0;
  NodeId tx = 0;
  NodeId rx = 0;
  LinkClass cls = LinkClass::g2b;
  Band band = Band::low;
  int subband = 0;
  double power_w = 0.0;
};

/// Active transmissions grouped by (band, sub-band). Silent agents are absent.
class AssignmentMap {
 public:
  [[nodiscard]] const std::vector<Transmission>& active() const { return active_; }
  /// Indices into active() sharing (band, subband).
  [[nodiscard]] const std::vector<int>& slot(Band band, int subband) const;
  [[nodiscard]] const Transmission* find(int agent) const;
  [[nodiscard]] bool is_active(int agent) const { return find(agent) != nullptr; }
  [[nodiscard]] int num_agents() const { return static_cast<int>(agent_index_.size()); }

 private:
  friend AssignmentMap collect_assignments(const World&, const DecisionProfile&, const BandPlan&, double);

  std::vector<Transmission> active_;
  std::vector<std::vector<int>> slots_;
  std::vector<int> agent_index_;
  int max_subbands_ = 1;
};

/// Validate the profile and group the transmitting agents by sub-band.
/// Throws std::invalid_argument naming the offending agent on any violation.
AssignmentMap collect_assignments(const World& world, const DecisionProfile& profile, const BandPlan& plan,
                                  double silence_dbm = kSilenceDbm);

/// Aggregate co-sub-band power arriving at agent's receiver from every other
/// active transmitter. A UAV's own transmission never interferes with what it receives.
double interference(int agent, const AssignmentMap& map, const ChannelState& channel);

double sinr(int agent, const AssignmentMap& map, const ChannelState& channel);

/// Shannon rate in bit/s over one sub-band.
double rate(double sinr_linear, double subband_width_hz);

/// Total power received at `rx` on (band, subband) from active transmitters
/// other than `exclude_agent` (pass -1 to include everyone).
double received_power(const AssignmentMap& map, const ChannelState& channel, NodeId rx, Band band, int subband,
                      int exclude_agent = -1);

struct LinkResult {
  bool active = false;
  NodeId rx = 0;
  LinkClass cls = LinkClass::g2b;
  Band band = Band::low;
  int subband = 0;
  double power_w = 0.0;
  double gain = 0.0;
  double interference_w = 0.0;
  double sinr = 0.0;
  double rate_bps = 0.0;
};

std::vector<LinkResult> evaluate_links(const AssignmentMap& map, const ChannelState& channel, const BandPlan& plan);

/// Debug rows: step,agent,class,band,subband,power_dbm,gain_db,interference_dbm,sinr_db,rate_bps
void write_radio_debug_header(std::ostream& out);
void write_radio_debug_rows(std::ostream& out, int step, const std::vector<LinkResult>& links);

}  // namespace sagin
