#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "sagin/env.hpp"

using namespace sagin;

namespace {

const Target kBs{TargetKind::bs, -1};
const Target kSat{TargetKind::sat, -1};
const Target kUav0{TargetKind::uav, 0};

// Static geometry and no fading so traces are hand-checkable.
EnvConfig quiet_config(int gus = 2, int uavs = 1) {
  EnvConfig c;
  c.scenario.num_gus = gus;
  c.scenario.num_uavs = uavs;
  c.scenario.seed = 5;
  c.fading = FadingModel::fixed();
  c.frozen_world = true;
  return c;
}

AgentDecision dec(Target t, double dbm, int h, int uavs = 1) { return AgentDecision::make(t, dbm, h, uavs); }

std::vector<int> random_actions(const Env& env, Rng& rng) {
  std::vector<int> out;
  for (int a = 0; a < env.num_agents(); ++a) {
    const ActionSpace& space = env.action_space(env.agent_type(a));
    std::vector<int> valid;
    for (int k = 0; k < space.size(); ++k)
      if (space.valid(k)) valid.push_back(k);
    out.push_back(valid[std::uniform_int_distribution<std::size_t>(0, valid.size() - 1)(rng)]);
  }
  return out;
}

int count_queued(const Env& env) {
  int n = 0;
  for (const auto& q : env.state().queues) n += static_cast<int>(q.size());
  return n;
}

}  // namespace

TEST(Reset, OnePacketPerAgent) {
  Env env(quiet_config());
  const auto obs = env.reset(1);
  EXPECT_EQ(obs.size(), 3u);
  EXPECT_EQ(env.state().packets.size(), 3u);
  for (const auto& q : env.state().queues) EXPECT_EQ(q.size(), 1u);
  EXPECT_EQ(env.state().t, 0);
  EXPECT_FALSE(env.done());
}

TEST(Reset, SameSeedSameObservations) {
  EnvConfig c = quiet_config();
  c.frozen_world = false;
  c.fading = FadingModel::rayleigh();
  Env a(c), b(c);
  EXPECT_EQ(a.reset(77), b.reset(77));
  Rng rng(1);
  for (int t = 0; t < 20 && !a.done(); ++t) {
    const auto acts = random_actions(a, rng);
    const auto ra = a.step(a.profile_from_actions(acts));
    const auto rb = b.step(b.profile_from_actions(acts));
    EXPECT_EQ(ra.observations, rb.observations);
    EXPECT_EQ(ra.reward.total, rb.reward.total);
  }
}

TEST(Reset, ZeroSizePacketsAreDeliveredImmediately) {
  EnvConfig c = quiet_config();
  c.gu_packet_bits = 0;
  c.uav_packet_bits = 0;
  Env env(c);
  env.reset(0);
  EXPECT_TRUE(env.done());
  EXPECT_EQ(count_queued(env), 0);
  for (const Packet& p : env.state().packets) {
    ASSERT_TRUE(p.delivered_step.has_value());
    EXPECT_EQ(*p.delivered_step, 0);
  }
  EXPECT_EQ(env.stats().gu_delivered, 2);
  EXPECT_EQ(env.stats().uav_delivered, 1);
}

TEST(Step, FullDrainDeliversThisStep) {
  EnvConfig c = quiet_config();
  c.gu_packet_bits = 1;
  Env env(c);
  env.reset(0);
  const auto r = env.step({{dec(kBs, 23, 0), dec(kBs, -100, 0), dec(kBs, -100, 0)}});
  ASSERT_EQ(r.info.delivered.size(), 1u);
  const Packet& p = env.state().packets[static_cast<std::size_t>(r.info.delivered[0])];
  EXPECT_EQ(p.owner, 0);
  EXPECT_EQ(*p.delivered_step, 0);
  EXPECT_EQ(env.packet_latency(p), 1);
  EXPECT_DOUBLE_EQ(r.info.bits_sent[0], 1.0);
}

TEST(Step, TwoHopLatencyIsEndToEnd) {
  EnvConfig c = quiet_config();
  c.gu_packet_bits = 1;
  c.uav_packet_bits = 1;
  Env env(c);
  env.reset(0);
  const auto silent = dec(kBs, -100, 0);
  // t=0: GU0 hands its packet to the UAV.
  auto r = env.step({{dec(kUav0, 23, 0), silent, silent}});
  EXPECT_TRUE(r.info.delivered.empty());
  EXPECT_EQ(env.relay_queue_length(0), 1);
  // t=1: the UAV sends its own packet first.
  r = env.step({{silent, silent, dec(kBs, 23, 0)}});
  ASSERT_EQ(r.info.delivered.size(), 1u);
  EXPECT_EQ(env.state().packets[static_cast<std::size_t>(r.info.delivered[0])].owner, 2);
  // t=2 idle, t=3: relayed packet to the SAT.
  env.step({{silent, silent, silent}});
  r = env.step({{silent, silent, dec(kSat, 23, 0)}});
  ASSERT_EQ(r.info.delivered.size(), 1u);
  const Packet& p = env.state().packets[static_cast<std::size_t>(r.info.delivered[0])];
  EXPECT_EQ(p.owner, 0);
  EXPECT_TRUE(p.relay_hop);
  EXPECT_EQ(env.packet_latency(p), 3 - 0 + 1);
  EXPECT_NE(env.packet_latency(p), 3 - 0);  // not measured from the hand-off
}

TEST(Step, AllSilentStalls) {
  Env env(quiet_config());
  env.reset(0);
  const auto r = env.step(env.silent_profile());
  EXPECT_LT(r.reward.latency, 0.0);
  for (const auto& q : env.state().queues) EXPECT_EQ(q.size(), 1u);
  for (const Packet& p : env.state().packets) EXPECT_EQ(p.bits_remaining, p.size_bits);
}

TEST(Step, RejectsMalformedActions) {
  Env env(quiet_config());
  env.reset(0);
  EXPECT_THROW(env.step({{dec(kBs, 23, 0)}}), std::invalid_argument);
  EXPECT_THROW(env.step({{dec(kBs, 23, 0), dec(kBs, 23, 0), dec(kUav0, 23, 0)}}), std::invalid_argument);
  const std::vector<int> too_many(4, 0);
  EXPECT_THROW((void)env.profile_from_actions(too_many), std::invalid_argument);
}

TEST(Step, AfterDoneThrows) {
  EnvConfig c = quiet_config();
  c.deadline_steps = 2;
  Env env(c);
  env.reset(0);
  env.step(env.silent_profile());
  EXPECT_TRUE(env.step(env.silent_profile()).done);
  EXPECT_THROW(env.step(env.silent_profile()), std::logic_error);
}

TEST(RelayAdmission, EmptyQueueAcceptsFullQueueDenies) {
  EnvConfig c = quiet_config();
  c.gu_packet_bits = 1;
  c.relay_queue_cap = 1;
  Env env(c);
  env.reset(0);
  EXPECT_TRUE(env.relay_admission(0));
  const auto silent = dec(kBs, -100, 0);
  env.step({{dec(kUav0, 23, 0), silent, silent}});
  EXPECT_FALSE(env.relay_admission(0));
  const auto r = env.step({{silent, dec(kUav0, 23, 1), silent}});
  EXPECT_EQ(r.info.relay_denied[1], 1);
  EXPECT_EQ(r.info.transmitted[1], 0);
  EXPECT_EQ(r.info.bits_sent[1], 0.0);
}

TEST(RelayAdmission, CapZeroDeniesEveryG2U) {
  EnvConfig c = quiet_config(3, 1);
  c.relay_queue_cap = 0;
  c.fading = FadingModel::rayleigh();
  c.frozen_world = false;
  Env env(c);
  Rng rng(3);
  for (int ep = 0; ep < 5; ++ep) {
    env.reset(static_cast<std::uint64_t>(ep));
    while (!env.done()) {
      const auto r = env.step(env.profile_from_actions(random_actions(env, rng)));
      for (const auto& link : r.info.links) EXPECT_FALSE(link.active && link.cls == LinkClass::g2u);
    }
  }
}

TEST(RewardTerms, LatencyExamples) {
  const std::vector<double> gu = {2, 3}, uav = {1};
  EXPECT_DOUBLE_EQ(latency_reward(gu, uav, 1, 1), -6.0);
  EXPECT_DOUBLE_EQ(latency_reward({}, {}, 1, 1), 0.0);
  EXPECT_DOUBLE_EQ(latency_reward(gu, uav, 0, 1), -1.0);
}

TEST(RewardTerms, CoordinationExamples) {
  const std::vector<double> w = {1, 1};
  const std::vector<std::uint8_t> both = {1, 1}, one = {1, 0};
  EXPECT_DOUBLE_EQ(coordination_reward(5.0, 4.0, w, both), 2.0);
  EXPECT_DOUBLE_EQ(coordination_reward(4.0, 4.0, w, both), 0.0);
  EXPECT_DOUBLE_EQ(coordination_reward(5.0, 4.0, w, one), 1.0);
  EXPECT_DOUBLE_EQ(coordination_reward(4.0, 5.0, w, both), 0.0);
  EXPECT_THROW((void)coordination_reward(NAN, 4.0, w, both), std::invalid_argument);
}

TEST(RewardTerms, EntropyExamples) {
  const std::vector<double> uniform8(8, 0.125);
  EXPECT_NEAR(shannon_entropy_bits(uniform8), 3.0, 1e-12);
  const std::vector<double> point = {0, 1, 0};
  EXPECT_EQ(shannon_entropy_bits(point), 0.0);
  const std::vector<double> bad = {0.5, 0.4};
  EXPECT_THROW((void)shannon_entropy_bits(bad), std::invalid_argument);
  const std::vector<double> gu = {3, 3}, uav = {2};
  EXPECT_NEAR(exploration_reward(gu, uav, 0.01, 0.01), 0.08, 1e-15);
}

TEST(RewardTerms, TotalExamples) {
  RewardWeights w;
  w.alpha_latency = 1;
  w.alpha_coordination = 0.5;
  w.alpha_exploration = 0.1;
  EXPECT_NEAR(total_reward(-6, 2, 3, w).total, -4.7, 1e-12);
  w.alpha_coordination = w.alpha_exploration = 0;
  EXPECT_EQ(total_reward(-6, 2, 3, w).total, -6.0);
}

TEST(RewardTerms, BestCaseEpisodeNormalizesToOne) {
  EnvConfig c = quiet_config();
  c.gu_packet_bits = 1;
  c.uav_packet_bits = 1;
  Env env(c);
  env.reset(0);
  const ReturnBounds b = env.return_bounds();
  const std::vector<double> h = {std::log2(env.action_space(AgentType::gu).num_valid()),
                                 std::log2(env.action_space(AgentType::gu).num_valid()),
                                 std::log2(env.action_space(AgentType::uav).num_valid())};
  const auto r = env.step({{dec(kBs, 23, 0), dec(kBs, 23, 1), dec(kSat, 23, 0)}}, h);
  EXPECT_TRUE(r.done);
  EXPECT_NEAR(env.stats().episode_return, b.best, 1e-12);
  EXPECT_NEAR(normalize_return(env.stats().episode_return, b), 1.0, 1e-12);
  // Hand-computed bound: kappa = 1/(3*100), w = 1/3, 3 agents.
  const double expect = -3.0 / 300.0 + 0.5 * 1.0 + 0.1 * 0.01 * (h[0] + h[1] + h[2]);
  EXPECT_NEAR(b.best, expect, 1e-12);
}

TEST(RewardTerms, AllSilentEpisodeHitsTheWorstBound) {
  Env env(quiet_config());
  env.reset(0);
  double r_latency_sum = 0.0;
  while (!env.done()) r_latency_sum += env.step(env.silent_profile()).reward.latency;
  const ReturnBounds b = env.return_bounds();
  EXPECT_NEAR(env.stats().episode_return, b.worst, 1e-9);
  EXPECT_NEAR(r_latency_sum, -(3.0 / 300.0) * 100 * 101 / 2.0, 1e-9);
  EXPECT_EQ(normalize_return(env.stats().episode_return, b), 0.0);
  EXPECT_EQ(env.stats().gu_delivered + env.stats().uav_delivered, 0);
}

TEST(Observe, AfterResetHistoryIsAtTheFloor) {
  Env env(quiet_config());
  const auto obs = env.reset(0);
  ASSERT_EQ(obs[0].size(), env.observation_size());
  EXPECT_EQ(env.observation_size(), 1u + 4 + 4 + 6);
  for (const auto& o : obs) {
    for (std::size_t k = 0; k < 9; ++k) EXPECT_EQ(o[k], -1.0) << k;
  }
  EXPECT_DOUBLE_EQ(obs[0][9], 40e3 / 80e3);
  EXPECT_DOUBLE_EQ(obs[2][9], 1.0);
}

TEST(Observe, PureAndBounded) {
  EnvConfig c = quiet_config(4, 2);
  c.frozen_world = false;
  c.fading = FadingModel::rayleigh();
  Env env(c);
  Rng rng(8);
  for (int ep = 0; ep < 3; ++ep) {
    env.reset(static_cast<std::uint64_t>(ep));
    while (!env.done()) {
      const auto r = env.step(env.profile_from_actions(random_actions(env, rng)));
      for (int a = 0; a < env.num_agents(); ++a) {
        EXPECT_EQ(env.observe(a), env.observe(a));
        EXPECT_EQ(env.observe(a), r.observations[static_cast<std::size_t>(a)]);
        for (double v : r.observations[static_cast<std::size_t>(a)]) {
          EXPECT_TRUE(std::isfinite(v));
          EXPECT_GE(v, -1.0);
          EXPECT_LE(v, 1.0);
        }
      }
    }
  }
}

TEST(ActionSpace, MasksSubbandsOutsideTheBand) {
  BandPlan plan;
  plan.low_subbands = 2;
  plan.high_subbands = 3;
  const ActionSpace gu(AgentType::gu, 2, 4, plan);
  EXPECT_EQ(gu.size(), 4 * 4 * 3);
  EXPECT_EQ(gu.num_valid(), 3 * 4 * 2 + 4 * 3);
  for (int k = 0; k < gu.size(); ++k) {
    const auto c = gu.decode(k);
    EXPECT_EQ(gu.encode(c), k);
    EXPECT_EQ(gu.valid(k), c.subband < (c.target.kind == TargetKind::sat ? 3 : 2));
  }
  const ActionSpace uav(AgentType::uav, 2, 4, plan);
  EXPECT_EQ(uav.size(), 2 * 4 * 3);
  EXPECT_THROW((void)uav.encode({kUav0, 0, 0}), std::invalid_argument);
}

TEST(EnvProperties, PacketConservationEveryStep) {
  EnvConfig c = quiet_config(5, 2);
  c.frozen_world = false;
  c.fading = FadingModel::rayleigh();
  c.gu_packet_bits = 2e3;
  c.uav_packet_bits = 4e3;
  Env env(c);
  Rng rng(31);
  for (int ep = 0; ep < 10; ++ep) {
    env.reset(static_cast<std::uint64_t>(ep));
    while (!env.done()) {
      env.step(env.profile_from_actions(random_actions(env, rng)));
      int delivered = 0, dropped = 0;
      for (const Packet& p : env.state().packets) {
        delivered += p.delivered_step.has_value();
        dropped += p.dropped;
        EXPECT_GE(p.bits_remaining, 0.0);
        EXPECT_LE(p.bits_remaining, p.size_bits);
        if (p.delivered_step) EXPECT_GE(*p.delivered_step, p.born_step);
      }
      const int generated = env.stats().gu_generated + env.stats().uav_generated;
      EXPECT_EQ(generated, delivered + dropped + count_queued(env));
      EXPECT_EQ(delivered, env.stats().gu_delivered + env.stats().uav_delivered);
    }
  }
}

TEST(EnvProperties, RewardDecompositionAndNormalizedRange) {
  EnvConfig c = quiet_config(3, 2);
  c.frozen_world = false;
  c.fading = FadingModel::rayleigh();
  c.gu_packet_bits = 5e3;
  Env env(c);
  Rng rng(4);
  const RewardWeights& w = env.config().reward;
  for (int ep = 0; ep < 10; ++ep) {
    env.reset(static_cast<std::uint64_t>(ep));
    const std::vector<double> h = {2.0, 1.0, 0.5, 3.0, 0.0};
    while (!env.done()) {
      const auto r = env.step(env.profile_from_actions(random_actions(env, rng)), h);
      const double expect = w.alpha_latency * r.reward.latency + w.alpha_coordination * r.reward.coordination +
                            w.alpha_exploration * r.reward.exploration;
      EXPECT_NEAR(r.reward.total, expect, 1e-12);
      EXPECT_GE(r.reward.coordination, 0.0);
      EXPECT_LE(r.reward.coordination, 1.0 + 1e-12);
      EXPECT_GE(r.reward.exploration, 0.0);
    }
    const double n = normalize_return(env.stats().episode_return, env.return_bounds());
    EXPECT_GE(n, 0.0);
    EXPECT_LE(n, 1.0);
  }
}

// Same action sequence, shrinking relay cap: average latency never improves.
TEST(EnvProperties, LatencyNonDecreasingAsCapShrinks) {
  auto avg_latency = [](int cap) {
    EnvConfig c = quiet_config(4, 1);
    c.gu_packet_bits = 50;
    c.uav_packet_bits = 50;
    c.relay_queue_cap = cap;
    Env env(c);
    env.reset(0);
    while (!env.done()) {
      DecisionProfile p;
      for (int g = 0; g < 4; ++g) p.agents.push_back(dec(kUav0, 23, g));
      p.agents.push_back(dec(kSat, 23, 0));
      env.step(p);
    }
    double sum = 0.0;
    for (const Packet& pk : env.state().packets) sum += env.packet_latency(pk);
    return sum / static_cast<double>(env.state().packets.size());
  };
  double prev = avg_latency(4);
  for (int cap : {3, 2, 1, 0}) {
    const double cur = avg_latency(cap);
    EXPECT_GE(cur, prev) << "cap " << cap;
    prev = cur;
  }
}

// Relayed packet: end-to-end latency is at least either hop on its own.
TEST(EnvProperties, RelayedLatencyCoversBothHops) {
  EnvConfig c = quiet_config();
  c.gu_packet_bits = 1;
  c.uav_packet_bits = 1;
  Env env(c);
  env.reset(0);
  const auto silent = dec(kBs, -100, 0);
  env.step({{silent, silent, dec(kBs, 23, 0)}});  // UAV clears its own packet at t=0
  env.step({{silent, silent, silent}});
  env.step({{dec(kUav0, 23, 0), silent, silent}});  // hop 1 ends at t=2
  env.step({{silent, silent, silent}});
  const auto r = env.step({{silent, silent, dec(kBs, 23, 0)}});  // hop 2 ends at t=4
  ASSERT_EQ(r.info.delivered.size(), 1u);
  const int e2e = env.packet_latency(env.state().packets[0]);
  EXPECT_EQ(e2e, 5);
  EXPECT_GE(e2e, 2 - 0 + 1);
  EXPECT_GE(e2e, 4 - 3 + 1);
}

TEST(TrajectoryLog, OneJsonLinePerAgentPerStep) {
  Env env(quiet_config());
  std::ostringstream out;
  env.set_trajectory_log(&out);
  env.reset(0);
  env.step(env.silent_profile());
  env.step({{dec(kBs, 23, 0), dec(kSat, 10, 1), dec(kSat, 5, 2)}});
  const std::string s = out.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 6);
  EXPECT_NE(s.find("\"r_L\""), std::string::npos);
  EXPECT_NE(s.find("\"gamma_db\""), std::string::npos);
}
