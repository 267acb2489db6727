#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sagin/channel.hpp"
#include "sagin/units.hpp"

using namespace sagin;

namespace {

LinkClass parse_class(const std::string& s) {
  for (LinkClass c : kAllLinkClasses)
    if (s == to_string(c)) return c;
  throw std::runtime_error("bad class " + s);
}

World two_gu_world() {
  ScenarioConfig c;
  c.num_gus = 2;
  c.num_uavs = 1;
  c.seed = 11;
  return World::build(c);
}

}  // namespace

TEST(Pathloss, G2bAt100mAnd2GHz) {
  // 41 + 22.7*2 + 20*log10(2/5)
  EXPECT_NEAR(pathloss_db(LinkClass::g2b, 100.0, 2e9), 78.4412, 1e-4);
}

TEST(Pathloss, U2sFreeSpaceAt1200kmAnd30GHz) {
  ChannelParams p;
  p.row(LinkClass::u2s).intercept_db -= 2.0;  // strip the atmospheric constant
  const double fspl = 32.45 + 20.0 * std::log10(1200.0) + 20.0 * std::log10(30000.0);
  EXPECT_NEAR(pathloss_db(LinkClass::u2s, 1.2e6, 30e9, p), fspl, 1e-9);
  EXPECT_NEAR(fspl, 183.6, 0.05);
  EXPECT_NEAR(pathloss_db(LinkClass::u2s, 1.2e6, 30e9), fspl + 2.0, 1e-9);
}

TEST(Pathloss, DoublingDistanceAddsSlopeTimesLog2) {
  const ChannelParams p;
  for (LinkClass c : kAllLinkClasses) {
    for (double d : {3.0, 80.0, 1e4}) {
      const double diff = pathloss_db(c, 2 * d, 2e9) - pathloss_db(c, d, 2e9);
      EXPECT_NEAR(diff, p.row(c).slope_db_per_decade * std::log10(2.0), 1e-9) << to_string(c);
    }
  }
}

TEST(Pathloss, RejectsNonPositiveDistance) {
  EXPECT_THROW(pathloss_db(LinkClass::g2b, 0.0, 2e9), std::invalid_argument);
  EXPECT_THROW(pathloss_db(LinkClass::g2s, -1.0, 30e9), std::invalid_argument);
}

TEST(Pathloss, GoldenGrid) {
  std::ifstream in(std::string(SAGIN_TEST_DATA_DIR) + "/pathloss_golden.csv");
  ASSERT_TRUE(in) << "missing golden file";
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cls, d, f, pl;
    std::getline(ss, cls, ',');
    std::getline(ss, d, ',');
    std::getline(ss, f, ',');
    std::getline(ss, pl, ',');
    EXPECT_NEAR(pathloss_db(parse_class(cls), std::stod(d), std::stod(f)), std::stod(pl), 1e-6) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 100);
}

TEST(LinkClasses, BandsAndClassification) {
  EXPECT_EQ(band_of(LinkClass::g2b), Band::low);
  EXPECT_EQ(band_of(LinkClass::g2u), Band::low);
  EXPECT_EQ(band_of(LinkClass::u2b), Band::low);
  EXPECT_EQ(band_of(LinkClass::g2s), Band::high);
  EXPECT_EQ(band_of(LinkClass::u2s), Band::high);
  EXPECT_EQ(classify(NodeKind::gu, NodeKind::bs), LinkClass::g2b);
  EXPECT_EQ(classify(NodeKind::gu, NodeKind::uav), LinkClass::g2u);
  EXPECT_EQ(classify(NodeKind::uav, NodeKind::bs), LinkClass::u2b);
  EXPECT_EQ(classify(NodeKind::gu, NodeKind::sat), LinkClass::g2s);
  EXPECT_EQ(classify(NodeKind::uav, NodeKind::sat), LinkClass::u2s);
  EXPECT_FALSE(classify(NodeKind::uav, NodeKind::uav).has_value());
  EXPECT_FALSE(classify(NodeKind::bs, NodeKind::sat).has_value());
}

TEST(Fading, RayleighMeanIsOne) {
  Rng rng(1);
  const FadingModel m = FadingModel::rayleigh();
  double sum = 0.0;
  const int n = 1'000'000;
  for (int k = 0; k < n; ++k) sum += sample_fading(m, rng);
  EXPECT_NEAR(sum / n, 1.0, 0.01);
}

TEST(Fading, NakagamiMeanIsOne) {
  Rng rng(2);
  for (double m : {0.5, 2.0, 5.0}) {
    double sum = 0.0;
    const int n = 200'000;
    for (int k = 0; k < n; ++k) sum += sample_fading(FadingModel::nakagami(m), rng);
    EXPECT_NEAR(sum / n, 1.0, 0.02) << "m=" << m;
  }
}

// Two-sample Kolmogorov-Smirnov statistic against the alpha = 0.001 critical value.
TEST(Fading, NakagamiM1MatchesRayleighInDistribution) {
  Rng a(7);
  Rng b(8);
  const int n = 20'000;
  std::vector<double> x(n), y(n);
  for (double& v : x) v = sample_fading(FadingModel::nakagami(1.0), a);
  for (double& v : y) v = sample_fading(FadingModel::rayleigh(), b);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] <= y[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / n));
  }
  const double critical = 1.95 * std::sqrt(2.0 / n);
  EXPECT_LT(d, critical);
}

TEST(Fading, SeededSequenceRepeats) {
  Rng a(99), b(99);
  for (int k = 0; k < 100; ++k)
    EXPECT_EQ(sample_fading(FadingModel::nakagami(2.0), a), sample_fading(FadingModel::nakagami(2.0), b));
}

TEST(Fading, SamplesArePositive) {
  Rng rng(3);
  for (int k = 0; k < 100'000; ++k) ASSERT_GT(sample_fading(FadingModel::nakagami(0.5), rng), 0.0);
}

TEST(Fading, RejectsNonPositiveM) {
  Rng rng(0);
  EXPECT_THROW(sample_fading(FadingModel::nakagami(0.0), rng), std::invalid_argument);
  EXPECT_THROW(sample_fading(FadingModel::nakagami(-1.0), rng), std::invalid_argument);
}

TEST(Fading, QuantileInvertsTheCdf) {
  // Rayleigh power is exponential: F(x) = 1 - exp(-x).
  EXPECT_NEAR(FadingModel::rayleigh().quantile(0.5), std::log(2.0), 1e-12);
  EXPECT_NEAR(FadingModel::nakagami(1.0).quantile(0.3), -std::log(0.7), 1e-12);
  EXPECT_EQ(FadingModel::fixed(2.5).quantile(0.9), 2.5);
  EXPECT_THROW((void)FadingModel::rayleigh().quantile(0.0), std::invalid_argument);
}

TEST(ChannelGain, ArithmeticExample) {
  // GU directly below the BS: BS at (100, 50, 100), GU at (100, 50, 0), d = 100 m.
  const World w = two_gu_world().with_gu_state(0, {100.0, 50.0, 0.0}, {100.0, 50.0, 0.0}, 0.0);
  ChannelParams p;
  const BandPlan plan;
  const double pl = pathloss_db(LinkClass::g2b, 100.0, 2e9);
  EXPECT_NEAR(pl, 78.4, 0.05);
  const double g = channel_gain(w, w.gu(0), w.bs(), LinkClass::g2b, 1.0, p, plan);
  EXPECT_NEAR(g / std::pow(10.0, (3.0 + 8.0 - pl) / 10.0), 1.0, 1e-12);
  // With the pathloss pinned to exactly 78.4 dB: 10^(-67.4/10).
  p.row(LinkClass::g2b).intercept_db += 78.4 - pl;
  const double g784 = channel_gain(w, w.gu(0), w.bs(), LinkClass::g2b, 1.0, p, plan);
  EXPECT_NEAR(g784, 1.82e-7, 0.005e-7);
}

TEST(ChannelGain, LinearInFadingAndPositive) {
  const World w = two_gu_world();
  const ChannelParams p;
  const BandPlan plan;
  const double g1 = channel_gain(w, w.gu(0), w.uav(0), LinkClass::g2u, 1.0, p, plan);
  const double g2 = channel_gain(w, w.gu(0), w.uav(0), LinkClass::g2u, 2.0, p, plan);
  EXPECT_DOUBLE_EQ(g2, 2.0 * g1);
  const double tiny = channel_gain(w, w.gu(0), w.uav(0), LinkClass::g2u, 1e-300, p, plan);
  EXPECT_GT(tiny, 0.0);
  EXPECT_LT(tiny, 1e-290);
  EXPECT_THROW(channel_gain(w, w.gu(0), w.uav(0), LinkClass::g2u, 0.0, p, plan), std::invalid_argument);
}

TEST(ChannelGain, RejectsClassMismatch) {
  const World w = two_gu_world();
  const ChannelParams p;
  const BandPlan plan;
  EXPECT_THROW(channel_gain(w, w.gu(0), w.bs(), LinkClass::g2u, 1.0, p, plan), std::invalid_argument);
  EXPECT_THROW(channel_gain(w, w.uav(0), w.bs(), LinkClass::g2b, 1.0, p, plan), std::invalid_argument);
  EXPECT_THROW(channel_gain(w, w.bs(), w.sat(), LinkClass::g2s, 1.0, p, plan), std::invalid_argument);
}

TEST(ChannelGain, DecreasesWithDistance) {
  const World base = two_gu_world();
  const ChannelParams p;
  const BandPlan plan;
  double prev = std::numeric_limits<double>::infinity();
  for (double x = 100.0; x >= 0.0; x -= 5.0) {
    const World w = base.with_gu_state(0, {x, 50.0, 1.5}, {x, 50.0, 1.5}, 0.0);
    const double g = channel_gain(w, w.gu(0), w.bs(), LinkClass::g2b, 1.0, p, plan);
    EXPECT_LT(g, prev);
    EXPECT_TRUE(std::isfinite(g));
    prev = g;
  }
}

TEST(NoisePower, Examples) {
  EXPECT_NEAR(watts_to_dbm(noise_power_w(1e6, 0.0)), -114.0, 1e-9);
  EXPECT_NEAR(watts_to_dbm(noise_power_w(1e6, 5.0)), -109.0, 1e-9);
  EXPECT_NEAR(watts_to_dbm(noise_power_w(100e6, 9.0)), -85.0, 1e-9);
  EXPECT_THROW(noise_power_w(0.0, 0.0), std::invalid_argument);
}

TEST(Units, DbRoundTrip) {
  for (double v : {1e-15, 3.7e-9, 0.5, 1.0, 42.0, 1e12}) {
    EXPECT_NEAR(db_to_linear(linear_to_db(v)) / v, 1.0, 1e-9);
    EXPECT_NEAR(dbm_to_watts(watts_to_dbm(v)) / v, 1.0, 1e-9);
  }
}

TEST(ChannelState, GainsPositiveFiniteAndBandScoped) {
  ScenarioConfig c;
  c.num_gus = 3;
  c.num_uavs = 2;
  const World w = World::build(c);
  const ChannelParams p;
  BandPlan plan;
  plan.low_subbands = 2;
  plan.high_subbands = 3;
  Rng rng(5);
  const ChannelState ch = ChannelState::sample(w, p, plan, FadingModel::rayleigh(), rng);
  for (NodeId tx = 0; tx < static_cast<NodeId>(w.num_agents()); ++tx) {
    for (NodeId rx = 0; rx < w.num_nodes(); ++rx) {
      if (!ChannelState::is_link(w, tx, rx)) continue;
      const int h_count = w.kind(rx) == NodeKind::sat ? 3 : 2;
      for (int h = 0; h < h_count; ++h) {
        EXPECT_GT(ch.gain(tx, rx, h), 0.0);
        EXPECT_TRUE(std::isfinite(ch.gain(tx, rx, h)));
      }
      for (int h = h_count; h < plan.max_subbands(); ++h) EXPECT_EQ(ch.gain(tx, rx, h), 0.0);
    }
  }
  for (NodeId rx = static_cast<NodeId>(w.num_gus()); rx < w.num_nodes(); ++rx) EXPECT_GT(ch.noise_w(rx), 0.0);
  EXPECT_NEAR(watts_to_dbm(ch.noise_w(w.bs())), -174.0 + 10 * std::log10(0.5e6) + 5.0, 1e-9);
  EXPECT_NEAR(watts_to_dbm(ch.noise_w(w.uav(0))), -174.0 + 10 * std::log10(0.5e6) + 9.0, 1e-9);
  EXPECT_NEAR(watts_to_dbm(ch.noise_w(w.sat())), -174.0 + 10 * std::log10(100e6 / 3) + 5.0, 1e-9);
}
