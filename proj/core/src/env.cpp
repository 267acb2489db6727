#include "sagin/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "sagin/units.hpp"

namespace sagin {

namespace {

constexpr double kSinrFloorDb = -30.0;
constexpr double kSinrCeilDb = 60.0;
constexpr double kInterferenceFloorDbm = -130.0;
constexpr double kInterferenceCeilDbm = -20.0;

double to_unit_range(double v, double lo, double hi) {
  const double c = std::clamp(v, lo, hi);
  return 2.0 * (c - lo) / (hi - lo) - 1.0;
}

}  // namespace

const char* to_string(AgentType type) { return type == AgentType::gu ? "GU" : "UAV"; }

void EnvConfig::validate() const {
  channel.validate();
  bands.validate();
  fading.validate();
  if (power_levels_dbm.empty()) throw std::invalid_argument("at least one power level is required");
  for (double p : power_levels_dbm)
    if (!std::isfinite(p)) throw std::invalid_argument("power levels must be finite");
  if (!(gu_packet_bits >= 0.0) || !(uav_packet_bits >= 0.0)) throw std::invalid_argument("packet sizes must be >= 0");
  if (relay_queue_cap < 0) throw std::invalid_argument("relay queue cap must be >= 0");
  if (deadline_steps < 1) throw std::invalid_argument("deadline must be at least one step");
  if (!(step_s > 0.0)) throw std::invalid_argument("step duration must be positive");
  if (reward.alpha_latency < 0.0 || reward.alpha_coordination < 0.0 || reward.alpha_exploration < 0.0)
    throw std::invalid_argument("reward alphas must be non-negative");
  if (reward.zeta_gu < 0.0 || reward.zeta_uav < 0.0) throw std::invalid_argument("zeta weights must be >= 0");
  for (const auto& v : {reward.kappa_gu, reward.kappa_uav, reward.w_gu, reward.w_uav})
    if (v && !(*v >= 0.0)) throw std::invalid_argument("kappa and w weights must be >= 0");
}

// ---------------------------------------------------------------------------
// Action space

ActionSpace::ActionSpace(AgentType type, int num_uavs, int num_power_levels, const BandPlan& plan)
    : type_(type),
      num_uavs_(num_uavs),
      num_destinations_(type == AgentType::gu ? num_uavs + 2 : 2),
      num_powers_(num_power_levels),
      num_subbands_(plan.max_subbands()) {
  mask_.assign(static_cast<std::size_t>(num_destinations_ * num_powers_ * num_subbands_), 0);
  for (int index = 0; index < size(); ++index) {
    const Choice c = decode(index);
    const Band band = c.target.kind == TargetKind::sat ? Band::high : Band::low;
    if (c.subband < plan.subbands(band)) {
      mask_[static_cast<std::size_t>(index)] = 1;
      ++num_valid_;
    }
  }
}

Target ActionSpace::destination(int d) const {
  if (type_ == AgentType::gu && d < num_uavs_) return {TargetKind::uav, d};
  const int rest = type_ == AgentType::gu ? d - num_uavs_ : d;
  return rest == 0 ? Target{TargetKind::bs, -1} : Target{TargetKind::sat, -1};
}

ActionSpace::Choice ActionSpace::decode(int index) const {
  if (index < 0 || index >= static_cast<int>(num_destinations_ * num_powers_ * num_subbands_))
    throw std::out_of_range("action index " + std::to_string(index));
  const int h = index % num_subbands_;
  const int p = (index / num_subbands_) % num_powers_;
  const int d = index / (num_subbands_ * num_powers_);
  return {destination(d), p, h};
}

int ActionSpace::encode(const Choice& choice) const {
  int d = 0;
  switch (choice.target.kind) {
    case TargetKind::uav:
      if (type_ != AgentType::gu) throw std::invalid_argument("UAV agents cannot target a UAV");
      d = choice.target.uav;
      break;
    case TargetKind::bs: d = type_ == AgentType::gu ? num_uavs_ : 0; break;
    case TargetKind::sat: d = type_ == AgentType::gu ? num_uavs_ + 1 : 1; break;
  }
  return (d * num_powers_ + choice.power_level) * num_subbands_ + choice.subband;
}

AgentDecision ActionSpace::decision(int index, std::span<const double> power_levels_dbm) const {
  const Choice c = decode(index);
  return AgentDecision::make(c.target, power_levels_dbm[static_cast<std::size_t>(c.power_level)], c.subband,
                             num_uavs_);
}

// ---------------------------------------------------------------------------
// Reward terms

double latency_reward(std::span<const double> gu_latencies, std::span<const double> uav_latencies, double kappa_gu,
                      double kappa_uav) {
  const double gu = std::accumulate(gu_latencies.begin(), gu_latencies.end(), 0.0);
  const double uav = std::accumulate(uav_latencies.begin(), uav_latencies.end(), 0.0);
  return -(kappa_gu * gu + kappa_uav * uav);
}

double coordination_reward(double avg_latency_before, double avg_latency_after, std::span<const double> weights,
                           std::span<const std::uint8_t> transmitted) {
  if (weights.size() != transmitted.size()) throw std::invalid_argument("one weight per agent is required");
  if (!std::isfinite(avg_latency_before) || !std::isfinite(avg_latency_after))
    throw std::invalid_argument("average latency must be finite");
  const bool improved = avg_latency_before - avg_latency_after > 0.0;
  if (!improved) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    if (transmitted[k]) total += weights[k];
  return total;
}

double shannon_entropy_bits(std::span<const double> distribution) {
  double sum = 0.0;
  double h = 0.0;
  for (double p : distribution) {
    if (p < 0.0) throw std::invalid_argument("probabilities must be non-negative");
    sum += p;
    if (p > 0.0) h -= p * std::log2(p);
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("distribution does not sum to 1");
  return h;
}

double exploration_reward(std::span<const double> gu_entropies, std::span<const double> uav_entropies,
                          double zeta_gu, double zeta_uav) {
  return zeta_gu * std::accumulate(gu_entropies.begin(), gu_entropies.end(), 0.0) +
         zeta_uav * std::accumulate(uav_entropies.begin(), uav_entropies.end(), 0.0);
}

RewardBreakdown total_reward(double r_latency, double r_coordination, double r_exploration,
                             const RewardWeights& weights) {
  RewardBreakdown r;
  r.latency = r_latency;
  r.coordination = r_coordination;
  r.exploration = r_exploration;
  r.total = weights.alpha_latency * r_latency + weights.alpha_coordination * r_coordination +
            weights.alpha_exploration * r_exploration;
  return r;
}

double normalize_return(double episode_return, const ReturnBounds& bounds) {
  if (!(bounds.best > bounds.worst)) return 1.0;
  return std::clamp((episode_return - bounds.worst) / (bounds.best - bounds.worst), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Environment

Env::Env(EnvConfig config)
    : config_((config.validate(), std::move(config))),
      gu_actions_(AgentType::gu, config_.scenario.num_uavs, static_cast<int>(config_.power_levels_dbm.size()),
                  config_.bands),
      uav_actions_(AgentType::uav, config_.scenario.num_uavs, static_cast<int>(config_.power_levels_dbm.size()),
                   config_.bands) {
  state_.world = World::build(config_.scenario);
}

AgentType Env::agent_type(int agent) const {
  if (agent < 0 || agent >= num_agents()) throw std::out_of_range("agent " + std::to_string(agent));
  return agent < world().num_gus() ? AgentType::gu : AgentType::uav;
}

const ActionSpace& Env::action_space(AgentType type) const {
  return type == AgentType::gu ? gu_actions_ : uav_actions_;
}

double Env::kappa(AgentType type) const {
  const auto& v = type == AgentType::gu ? config_.reward.kappa_gu : config_.reward.kappa_uav;
  return v.value_or(1.0 / (static_cast<double>(num_agents()) * config_.deadline_steps));
}

double Env::weight(AgentType type) const {
  const auto& v = type == AgentType::gu ? config_.reward.w_gu : config_.reward.w_uav;
  return v.value_or(1.0 / static_cast<double>(num_agents()));
}

ReturnBounds Env::return_bounds() const {
  const double n1 = world().num_gus();
  const double n2 = world().num_uavs();
  const double t = config_.deadline_steps;
  const double kappa_sum = kappa(AgentType::gu) * n1 + kappa(AgentType::uav) * n2;
  const RewardWeights& w = config_.reward;
  const double max_entropy = w.zeta_gu * n1 * std::log2(static_cast<double>(gu_actions_.num_valid())) +
                             w.zeta_uav * n2 * std::log2(static_cast<double>(uav_actions_.num_valid()));
  ReturnBounds b;
  b.best = w.alpha_latency * -kappa_sum +
           w.alpha_coordination * (weight(AgentType::gu) * n1 + weight(AgentType::uav) * n2) +
           w.alpha_exploration * max_entropy;
  b.worst = w.alpha_latency * -kappa_sum * t * (t + 1.0) / 2.0;
  return b;
}

bool Env::has_packet(int agent) const { return !state_.queues.at(static_cast<std::size_t>(agent)).empty(); }

int Env::relay_queue_length(int uav) const {
  const auto& q = state_.queues.at(static_cast<std::size_t>(world().uav(uav)));
  return static_cast<int>(std::count_if(q.begin(), q.end(), [&](int id) {
    return state_.packets[static_cast<std::size_t>(id)].relay_hop;
  }));
}

bool Env::relay_admission(int uav) const { return relay_queue_length(uav) < config_.relay_queue_cap; }

int Env::packet_latency(const Packet& packet) const {
  if (packet.delivered_step) return *packet.delivered_step - packet.born_step + 1;
  return std::min(state_.t - packet.born_step, config_.deadline_steps);
}

double Env::average_latency() const {
  if (state_.packets.empty()) return 0.0;
  double sum = 0.0;
  for (const Packet& p : state_.packets)
    sum += p.delivered_step ? packet_latency(p) : static_cast<double>(config_.deadline_steps);
  return sum / static_cast<double>(state_.packets.size());
}

bool Env::all_delivered() const {
  return std::all_of(state_.packets.begin(), state_.packets.end(),
                     [](const Packet& p) { return p.delivered_step.has_value(); });
}

std::vector<std::vector<double>> Env::reset(std::uint64_t seed) {
  ScenarioConfig scenario = config_.scenario;
  if (!config_.frozen_world) scenario.seed = derive_seed(seed, 1);
  state_ = EnvState{};
  state_.world = World::build(scenario);
  state_.rng.seed(derive_seed(seed, 2));
  state_.t = 0;

  const int n = num_agents();
  const int n1 = world().num_gus();
  state_.queues.assign(static_cast<std::size_t>(n), {});
  stats_ = EpisodeStats{};
  for (int agent = 0; agent < n; ++agent) {
    Packet p;
    p.owner = agent;
    p.origin = agent < n1 ? Origin::gu : Origin::uav;
    p.size_bits = agent < n1 ? config_.gu_packet_bits : config_.uav_packet_bits;
    p.bits_remaining = p.size_bits;
    p.born_step = 0;
    p.holder = agent;
    if (p.size_bits <= 0.0) {
      p.delivered_step = 0;
      (agent < n1 ? stats_.gu_delivered : stats_.uav_delivered)++;
    } else {
      state_.queues[static_cast<std::size_t>(agent)].push_back(static_cast<int>(state_.packets.size()));
    }
    (agent < n1 ? stats_.gu_generated : stats_.uav_generated)++;
    state_.packets.push_back(p);
  }
  state_.last_sinr.assign(static_cast<std::size_t>(n), 0.0);
  state_.last_interference_w.assign(
      static_cast<std::size_t>(n),
      std::vector<double>(static_cast<std::size_t>(config_.bands.low_subbands + config_.bands.high_subbands), 0.0));
  state_.avg_latency = average_latency();
  done_ = all_delivered();

  std::vector<std::vector<double>> obs;
  obs.reserve(static_cast<std::size_t>(n));
  for (int agent = 0; agent < n; ++agent) obs.push_back(observe(agent));
  return obs;
}

std::size_t Env::observation_size() const {
  return static_cast<std::size_t>(1 + config_.bands.low_subbands + config_.bands.high_subbands + 6);
}

std::vector<double> Env::observe(int agent) const {
  const auto a = static_cast<std::size_t>(agent);
  if (agent < 0 || agent >= num_agents()) throw std::out_of_range("agent " + std::to_string(agent));
  std::vector<double> obs;
  obs.reserve(observation_size());

  const double sinr = state_.last_sinr[a];
  obs.push_back(to_unit_range(sinr > 0.0 ? linear_to_db(sinr) : kSinrFloorDb, kSinrFloorDb, kSinrCeilDb));
  for (double w : state_.last_interference_w[a])
    obs.push_back(to_unit_range(w > 0.0 ? watts_to_dbm(w) : kInterferenceFloorDbm, kInterferenceFloorDbm,
                                kInterferenceCeilDbm));

  const double max_bits = std::max(config_.gu_packet_bits, config_.uav_packet_bits);
  const auto& queue = state_.queues[a];
  const double head_bits = queue.empty() ? 0.0 : state_.packets[static_cast<std::size_t>(queue.front())].bits_remaining;
  obs.push_back(max_bits > 0.0 ? std::clamp(head_bits / max_bits, 0.0, 1.0) : 0.0);

  double queue_norm = 0.0;
  if (agent_type(agent) == AgentType::uav && config_.relay_queue_cap > 0)
    queue_norm = std::min(1.0, static_cast<double>(relay_queue_length(agent - world().num_gus())) /
                                   config_.relay_queue_cap);
  obs.push_back(queue_norm);

  const Vec3& pos = world().node(static_cast<NodeId>(agent)).position;
  obs.push_back(to_unit_range(pos.x, 0.0, config_.scenario.area_x_m));
  obs.push_back(to_unit_range(pos.y, 0.0, config_.scenario.area_y_m));
  obs.push_back(std::min(1.0, static_cast<double>(state_.t) / config_.deadline_steps));
  const int n_type = agent_type(agent) == AgentType::gu ? world().num_gus() : world().num_uavs();
  const int index = agent_type(agent) == AgentType::gu ? agent : agent - world().num_gus();
  obs.push_back(n_type > 1 ? static_cast<double>(index) / (n_type - 1) : 0.0);
  return obs;
}

DecisionProfile Env::profile_from_actions(std::span<const int> actions) const {
  if (static_cast<int>(actions.size()) != num_agents())
    throw std::invalid_argument("expected " + std::to_string(num_agents()) + " actions, got " +
                                std::to_string(actions.size()));
  DecisionProfile profile;
  profile.agents.reserve(actions.size());
  for (int agent = 0; agent < num_agents(); ++agent) {
    const ActionSpace& space = action_space(agent_type(agent));
    const int a = actions[static_cast<std::size_t>(agent)];
    if (!space.valid(a)) throw std::invalid_argument("agent " + std::to_string(agent) + ": action " +
                                                     std::to_string(a) + " is masked");
    profile.agents.push_back(space.decision(a, config_.power_levels_dbm));
  }
  return profile;
}

DecisionProfile Env::silent_profile() const {
  DecisionProfile profile;
  for (int agent = 0; agent < num_agents(); ++agent)
    profile.agents.push_back(
        AgentDecision::make({TargetKind::bs, -1}, config_.silence_dbm, 0, world().num_uavs()));
  return profile;
}

void Env::set_radio_debug_log(std::ostream* out) {
  radio_log_ = out;
  if (radio_log_ != nullptr) write_radio_debug_header(*radio_log_);
}

StepResult Env::step(const DecisionProfile& joint_action, std::span<const double> entropies) {
  if (done_) throw std::logic_error("episode is over; call reset()");
  const int n = num_agents();
  const int n1 = world().num_gus();
  // Validates the submitted profile as a whole, including agents that are idle.
  (void)collect_assignments(world(), joint_action, config_.bands, config_.silence_dbm);
  if (!entropies.empty() && static_cast<int>(entropies.size()) != n)
    throw std::invalid_argument("expected one entropy per agent");

  if (!config_.frozen_world) state_.world = state_.world.advanced(config_.step_s);
  const ChannelState channel =
      ChannelState::sample(world(), config_.channel, config_.bands, config_.fading, state_.rng);

  StepResult result;
  StepInfo& info = result.info;
  info.transmitted.assign(static_cast<std::size_t>(n), 0);
  info.relay_denied.assign(static_cast<std::size_t>(n), 0);
  info.bits_sent.assign(static_cast<std::size_t>(n), 0.0);

  DecisionProfile effective = joint_action;
  for (int agent = 0; agent < n; ++agent) {
    AgentDecision& d = effective.agents[static_cast<std::size_t>(agent)];
    if (!has_packet(agent)) {
      d.power_dbm = config_.silence_dbm;
      continue;
    }
    const Target target = decode_target(world(), agent, d);
    if (target.kind == TargetKind::uav && d.power_dbm > config_.silence_dbm && !relay_admission(target.uav)) {
      d.power_dbm = config_.silence_dbm;
      info.relay_denied[static_cast<std::size_t>(agent)] = 1;
    }
  }

  const AssignmentMap map = collect_assignments(world(), effective, config_.bands, config_.silence_dbm);
  info.links = evaluate_links(map, channel, config_.bands);

  const int t = state_.t;
  std::vector<std::pair<int, int>> handoffs;  // (packet id, uav agent)
  for (const Transmission& tr : map.active()) {
    const auto a = static_cast<std::size_t>(tr.agent);
    info.transmitted[a] = 1;
    const LinkResult& link = info.links[a];
    info.sum_rate_bps += link.rate_bps;
    auto& queue = state_.queues[a];
    const int id = queue.front();
    Packet& packet = state_.packets[static_cast<std::size_t>(id)];
    const double sent = std::min(packet.bits_remaining, link.rate_bps * config_.step_s);
    packet.bits_remaining -= sent;
    info.bits_sent[a] = sent;
    (tr.agent < n1 ? stats_.gu_bits_sent : stats_.uav_bits_sent) += sent;
    if (packet.bits_remaining > 1e-9 * packet.size_bits) continue;

    packet.bits_remaining = 0.0;
    queue.erase(queue.begin());
    if (world().kind(tr.rx) == NodeKind::uav) {
      handoffs.emplace_back(id, static_cast<int>(tr.rx));
    } else {
      packet.delivered_step = t;
      info.delivered.push_back(id);
      (packet.origin == Origin::gu ? stats_.gu_delivered : stats_.uav_delivered)++;
    }
  }
  for (const auto& [id, uav_agent] : handoffs) {
    Packet& packet = state_.packets[static_cast<std::size_t>(id)];
    packet.relay_hop = true;
    packet.bits_remaining = packet.size_bits;
    packet.holder = uav_agent;
    state_.queues[static_cast<std::size_t>(uav_agent)].push_back(id);
  }

  // Latency term: every live packet's age after this step plus the final
  // latency of packets finalised this step; both equal t + 1 - born.
  std::vector<double> gu_lat;
  std::vector<double> uav_lat;
  for (const Packet& p : state_.packets) {
    if (p.delivered_step && *p.delivered_step != t) continue;
    (p.origin == Origin::gu ? gu_lat : uav_lat).push_back(static_cast<double>(t + 1 - p.born_step));
  }
  const double r_latency = latency_reward(gu_lat, uav_lat, kappa(AgentType::gu), kappa(AgentType::uav));

  const double before = state_.avg_latency;
  state_.avg_latency = average_latency();
  std::vector<double> weights(static_cast<std::size_t>(n));
  for (int agent = 0; agent < n; ++agent) weights[static_cast<std::size_t>(agent)] = weight(agent_type(agent));
  const double r_coordination = coordination_reward(before, state_.avg_latency, weights, info.transmitted);

  double r_exploration = 0.0;
  if (!entropies.empty()) {
    r_exploration = exploration_reward(entropies.subspan(0, static_cast<std::size_t>(n1)),
                                       entropies.subspan(static_cast<std::size_t>(n1)), config_.reward.zeta_gu,
                                       config_.reward.zeta_uav);
  }
  result.reward = total_reward(r_latency, r_coordination, r_exploration, config_.reward);

  state_.t = t + 1;
  if (all_delivered()) {
    done_ = true;
  } else if (state_.t >= config_.deadline_steps) {
    finalize_deadline();
    done_ = true;
  }
  result.done = done_;

  const NodeId bs = world().bs();
  const NodeId sat = world().sat();
  for (int agent = 0; agent < n; ++agent) {
    const auto a = static_cast<std::size_t>(agent);
    state_.last_sinr[a] = info.links[a].active ? info.links[a].sinr : 0.0;
    auto& phi = state_.last_interference_w[a];
    for (int h = 0; h < config_.bands.low_subbands; ++h)
      phi[static_cast<std::size_t>(h)] = received_power(map, channel, bs, Band::low, h, agent);
    for (int h = 0; h < config_.bands.high_subbands; ++h)
      phi[static_cast<std::size_t>(config_.bands.low_subbands + h)] =
          received_power(map, channel, sat, Band::high, h, agent);
  }

  stats_.episode_return += result.reward.total;
  stats_.steps += 1;

  result.observations.reserve(static_cast<std::size_t>(n));
  for (int agent = 0; agent < n; ++agent) result.observations.push_back(observe(agent));

  if (radio_log_ != nullptr) write_radio_debug_rows(*radio_log_, t, info.links);
  if (trajectory_log_ != nullptr) log_trajectory(joint_action, info, result.reward);
  return result;
}

void Env::finalize_deadline() {
  for (Packet& p : state_.packets)
    if (!p.delivered_step) p.dropped = true;
  for (auto& q : state_.queues) q.clear();
}

void Env::log_trajectory(const DecisionProfile& profile, const StepInfo& info, const RewardBreakdown& reward) const {
  using nlohmann::json;
  const int t = state_.t - 1;
  for (int agent = 0; agent < num_agents(); ++agent) {
    const auto a = static_cast<std::size_t>(agent);
    const AgentDecision& d = profile.agents[a];
    const Target target = decode_target(world(), agent, d);
    const LinkResult& link = info.links[a];
    json row;
    row["t"] = t;
    row["agent"] = agent;
    row["type"] = to_string(agent_type(agent));
    row["action"] = {{"destination", target.kind == TargetKind::uav ? "UAV" + std::to_string(target.uav)
                                     : target.kind == TargetKind::bs ? std::string("BS")
                                                                      : std::string("SAT")},
                     {"power_dbm", d.power_dbm},
                     {"subband", d.subband}};
    row["transmitted"] = info.transmitted[a] != 0;
    row["relay_denied"] = info.relay_denied[a] != 0;
    if (link.active) {
      row["gamma_db"] = linear_to_db(link.sinr);
      row["phi_dbm"] = link.interference_w > 0.0 ? json(watts_to_dbm(link.interference_w)) : json(nullptr);
      row["R_bps"] = link.rate_bps;
    } else {
      row["gamma_db"] = nullptr;
      row["phi_dbm"] = nullptr;
      row["R_bps"] = 0.0;
    }
    row["reward"] = {{"r_L", reward.latency}, {"r_coo", reward.coordination}, {"r_exp", reward.exploration},
                     {"r", reward.total}};
    *trajectory_log_ << row.dump() << '\n';
  }
}

}  // namespace sagin
