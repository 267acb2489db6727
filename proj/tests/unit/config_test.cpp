#include <gtest/gtest.h>

#include <string>

#include "sagin/config.hpp"

using namespace sagin;

TEST(ParseConfig, EmptyTextIsTheDefault) {
  const ExperimentConfig c = parse_config_text("");
  EXPECT_EQ(c, ExperimentConfig{});
  ASSERT_EQ(c.combos.size(), 1u);
  EXPECT_EQ(c.combos[0], (Combo{2, 1}));
  EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{0});
}

TEST(ParseConfig, OverridesAndKeepsOtherDefaults) {
  const ExperimentConfig c = parse_config_text(
      "combos: [[5, 2], [10, 5]]\n"
      "seeds: [3, 4]\n"
      "train:\n"
      "  episodes: 12\n"
      "channel:\n"
      "  sat_antenna_gain_dbi: 35\n"
      "  pathloss:\n"
      "    G2B: {intercept_db: 40}\n"
      "env:\n"
      "  fading: {family: nakagami, m: 2}\n"
      "  relay_queue_cap: 0\n");
  EXPECT_EQ(c.combos, (std::vector<Combo>{{5, 2}, {10, 5}}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_EQ(c.train.episodes, 12);
  EXPECT_EQ(c.train.batch_size, 64);
  EXPECT_EQ(c.env.channel.sat_antenna_gain_dbi, 35.0);
  EXPECT_EQ(c.env.channel.row(LinkClass::g2b).intercept_db, 40.0);
  EXPECT_EQ(c.env.channel.row(LinkClass::g2b).slope_db_per_decade, 22.7);
  EXPECT_EQ(c.env.fading, FadingModel::nakagami(2.0));
  EXPECT_EQ(c.env.relay_queue_cap, 0);
  EXPECT_EQ(c.env_for({5, 2}).scenario.num_gus, 5);
  EXPECT_EQ(c.env_for({5, 2}).scenario.num_uavs, 2);
}

TEST(ParseConfig, RejectsZeroGuCombo) {
  EXPECT_THROW((void)parse_config_text("combos: [[0, 1]]\n"), ConfigError);
  EXPECT_THROW((void)parse_config_text("combos: [[1, 0]]\n"), ConfigError);
  EXPECT_THROW((void)parse_config_text("seeds: []\n"), ConfigError);
}

TEST(ParseConfig, UnknownKeyNamesTheLine) {
  try {
    (void)parse_config_text("seeds: [1]\ntrain:\n  episodes: 3\n  warp_factor: 9\n");
    FAIL() << "accepted an unknown key";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("warp_factor"), std::string::npos) << msg;
  }
  EXPECT_THROW((void)parse_config_text("bogus: 1\n"), ConfigError);
  EXPECT_THROW((void)parse_config_text("channel:\n  pathloss:\n    X2Y: {}\n"), ConfigError);
}

TEST(ParseConfig, MalformedAndInvalidValues) {
  EXPECT_THROW((void)parse_config_text("combos: [[2, 1]\n"), ConfigError);
  EXPECT_THROW((void)parse_config_text("train:\n  episodes: many\n"), ConfigError);
  EXPECT_THROW((void)parse_config_text("train:\n  discount: 1.5\n"), ConfigError);
  EXPECT_THROW((void)parse_config_text("bands:\n  low_subbands: 0\n"), ConfigError);
  EXPECT_THROW((void)parse_config_text("env:\n  fading: {family: nakagami, m: 0}\n"), ConfigError);
  EXPECT_THROW((void)parse_config_text("scenario:\n  area_x_m: -5\n"), ConfigError);
  EXPECT_THROW((void)parse_config("/nonexistent/sagin.yaml"), ConfigError);
}

TEST(EmitConfig, RoundTripIsIdentity) {
  ExperimentConfig c;
  c.combos = {{2, 1}, {30, 15}};
  c.seeds = {0, 7, 18446744073709551615ULL};
  c.eval_episodes = 17;
  c.output_dir = "some/dir";
  c.train.learning_rate = 3.3e-4;
  c.train.discount = 0.9;
  c.env.channel.row(LinkClass::u2s).intercept_db = -25.55 + 0.1;
  c.env.bands.low_subbands = 3;
  c.env.fading = FadingModel::nakagami(0.7);
  c.env.reward.kappa_gu = 0.125;
  c.env.reward.w_uav = 1.0 / 3.0;
  c.env.frozen_world = true;
  c.oracle.omega = {FadingModel::rayleigh(), FadingModel::fixed(0.5)};
  c.oracle.seed = 99;
  const ExperimentConfig back = parse_config_text(emit_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(emit_config(back), emit_config(c));
  EXPECT_EQ(parse_config_text(emit_config(ExperimentConfig{})), ExperimentConfig{});
}

TEST(OracleEnv, FrozenTinyInstance) {
  ExperimentConfig c;
  c.oracle.combo = {1, 1};
  c.oracle.subbands = 1;
  c.oracle.seed = 12;
  const EnvConfig e = c.oracle_env();
  EXPECT_TRUE(e.frozen_world);
  EXPECT_EQ(e.scenario.num_gus, 1);
  EXPECT_EQ(e.bands.low_subbands, 1);
  EXPECT_EQ(e.bands.high_subbands, 1);
  EXPECT_EQ(e.scenario.seed, 12u);
}

TEST(ComboName, Format) { EXPECT_EQ(to_string(Combo{10, 5}), "10x5"); }
