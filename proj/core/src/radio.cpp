#include "sagin/radio.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sagin/units.hpp"

namespace sagin {

namespace {

[[noreturn]] void reject(int agent, const std::string& what) {
  throw std::invalid_argument("agent " + std::to_string(agent) + ": " + what);
}

std::size_t slot_index(Band band, int subband, int max_subbands) {
  return static_cast<std::size_t>((band == Band::low ? 0 : max_subbands) + subband);
}

}  // namespace

AgentDecision AgentDecision::make(Target target, double power_dbm, int subband, int num_uavs) {
  AgentDecision d;
  d.x.assign(static_cast<std::size_t>(num_uavs) + 2, 0);
  switch (target.kind) {
    case TargetKind::uav:
      if (target.uav < 0 || target.uav >= num_uavs) throw std::out_of_range("UAV target out of range");
      d.x[static_cast<std::size_t>(target.uav)] = 1;
      break;
    case TargetKind::bs: d.x[static_cast<std::size_t>(num_uavs)] = 1; break;
    case TargetKind::sat: d.x[static_cast<std::size_t>(num_uavs) + 1] = 1; break;
  }
  d.power_dbm = power_dbm;
  d.subband = subband;
  return d;
}

Target decode_target(const World& world, int agent, const AgentDecision& decision) {
  const int n_uavs = world.num_uavs();
  if (decision.x.size() != static_cast<std::size_t>(n_uavs) + 2)
    reject(agent, "indicator vector must have " + std::to_string(n_uavs + 2) + " entries");
  int selected = 0;
  Target target;
  for (std::size_t k = 0; k < decision.x.size(); ++k) {
    const auto v = decision.x[k];
    if (v > 1) reject(agent, "destination indicators must be binary");
    if (v == 0) continue;
    ++selected;
    const int idx = static_cast<int>(k);
    if (idx < n_uavs) {
      target = {TargetKind::uav, idx};
    } else if (idx == n_uavs) {
      target = {TargetKind::bs, -1};
    } else {
      target = {TargetKind::sat, -1};
    }
  }
  if (selected != 1) reject(agent, "must select exactly one destination, selected " + std::to_string(selected));
  const bool is_uav = agent >= world.num_gus();
  if (is_uav && target.kind == TargetKind::uav) reject(agent, "a UAV may only transmit to the BS or the SAT");
  return target;
}

NodeId receiver_node(const World& world, Target target) {
  switch (target.kind) {
    case TargetKind::uav: return world.uav(target.uav);
    case TargetKind::bs: return world.bs();
    case TargetKind::sat: return world.sat();
  }
  return world.bs();
}

const std::vector<int>& AssignmentMap::slot(Band band, int subband) const {
  if (subband < 0 || subband >= max_subbands_) throw std::out_of_range("sub-band out of range");
  return slots_[slot_index(band, subband, max_subbands_)];
}

const Transmission* AssignmentMap::find(int agent) const {
  if (agent < 0 || agent >= num_agents()) return nullptr;
  const int idx = agent_index_[static_cast<std::size_t>(agent)];
  return idx < 0 ? nullptr : &active_[static_cast<std::size_t>(idx)];
}

AssignmentMap collect_assignments(const World& world, const DecisionProfile& profile, const BandPlan& plan,
                                  double silence_dbm) {
  const int n = world.num_agents();
  if (static_cast<int>(profile.agents.size()) != n)
    throw std::invalid_argument("profile has " + std::to_string(profile.agents.size()) + " decisions for " +
                                std::to_string(n) + " agents");
  AssignmentMap map;
  map.max_subbands_ = plan.max_subbands();
  map.slots_.assign(2 * static_cast<std::size_t>(map.max_subbands_), {});
  map.agent_index_.assign(static_cast<std::size_t>(n), -1);

  for (int agent = 0; agent < n; ++agent) {
    const AgentDecision& d = profile.agents[static_cast<std::size_t>(agent)];
    const Target target = decode_target(world, agent, d);
    if (!std::isfinite(d.power_dbm)) reject(agent, "transmit power must be finite");
    const NodeId tx = static_cast<NodeId>(agent);
    const NodeId rx = receiver_node(world, target);
    const LinkClass cls = *classify(world.kind(tx), world.kind(rx));
    const Band band = band_of(cls);
    if (d.subband < 0 || d.subband >= plan.subbands(band))
      reject(agent, "sub-band " + std::to_string(d.subband) + " outside the " +
                        (band == Band::low ? std::string("low") : std::string("high")) + " band");
    if (d.power_dbm <= silence_dbm) continue;

    map.agent_index_[static_cast<std::size_t>(agent)] = static_cast<int>(map.active_.size());
    map.slots_[slot_index(band, d.subband, map.max_subbands_)].push_back(static_cast<int>(map.active_.size()));
    map.active_.push_back({agent, tx, rx, cls, band, d.subband, dbm_to_watts(d.power_dbm)});
  }
  return map;
}

double received_power(const AssignmentMap& map, const ChannelState& channel, NodeId rx, Band band, int subband,
                      int exclude_agent) {
  double total = 0.0;
  for (int idx : map.slot(band, subband)) {
    const Transmission& t = map.active()[static_cast<std::size_t>(idx)];
    if (t.agent == exclude_agent || t.tx == rx) continue;
    total += t.power_w * channel.gain(t.tx, rx, subband);
  }
  return total;
}

double interference(int agent, const AssignmentMap& map, const ChannelState& channel) {
  const Transmission* self = map.find(agent);
  if (self == nullptr) throw std::invalid_argument("agent " + std::to_string(agent) + " is not transmitting");
  return received_power(map, channel, self->rx, self->band, self->subband, agent);
}

double sinr(int agent, const AssignmentMap& map, const ChannelState& channel) {
  const Transmission* self = map.find(agent);
  if (self == nullptr) throw std::invalid_argument("agent " + std::to_string(agent) + " is not transmitting");
  const double signal = self->power_w * channel.gain(self->tx, self->rx, self->subband);
  return signal / (channel.noise_w(self->rx) + interference(agent, map, channel));
}

double rate(double sinr_linear, double subband_width_hz) {
  if (!(sinr_linear >= 0.0)) throw std::invalid_argument("SINR must be non-negative");
  return subband_width_hz * std::log2(1.0 + sinr_linear);
}

std::vector<LinkResult> evaluate_links(const AssignmentMap& map, const ChannelState& channel, const BandPlan& plan) {
  std::vector<LinkResult> out(static_cast<std::size_t>(map.num_agents()));
  for (const Transmission& t : map.active()) {
    LinkResult& r = out[static_cast<std::size_t>(t.agent)];
    r.active = true;
    r.rx = t.rx;
    r.cls = t.cls;
    r.band = t.band;
    r.subband = t.subband;
    r.power_w = t.power_w;
    r.gain = channel.gain(t.tx, t.rx, t.subband);
    r.interference_w = received_power(map, channel, t.rx, t.band, t.subband, t.agent);
    r.sinr = r.power_w * r.gain / (channel.noise_w(t.rx) + r.interference_w);
    r.rate_bps = rate(r.sinr, plan.subband_width_hz(t.band));
  }
  return out;
}

void write_radio_debug_header(std::ostream& out) {
  out << "step,agent,class,band,subband,power_dbm,gain_db,interference_dbm,sinr_db,rate_bps\n";
}

void write_radio_debug_rows(std::ostream& out, int step, const std::vector<LinkResult>& links) {
  for (std::size_t agent = 0; agent < links.size(); ++agent) {
    const LinkResult& r = links[agent];
    if (!r.active) continue;
    out << step << ',' << agent << ',' << to_string(r.cls) << ',' << (r.band == Band::low ? "low" : "high") << ','
        << r.subband << ',' << watts_to_dbm(r.power_w) << ',' << linear_to_db(r.gain) << ','
        << (r.interference_w > 0.0 ? watts_to_dbm(r.interference_w) : -HUGE_VAL) << ','
        << linear_to_db(r.sinr) << ',' << r.rate_bps << '\n';
  }
}

}  // namespace sagin
