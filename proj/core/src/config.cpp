#include "sagin/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace sagin {

std::string to_string(const Combo& combo) { return std::to_string(combo.gus) + "x" + std::to_string(combo.uavs); }

void ExperimentConfig::validate() const {
  if (combos.empty()) throw ConfigError("at least one combo is required");
  for (const Combo& c : combos)
    if (c.gus < 1 || c.uavs < 1) throw ConfigError("combo " + to_string(c) + ": need at least one GU and one UAV");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (eval_episodes < 0) throw ConfigError("eval_episodes must be >= 0");
  if (oracle.combo.gus < 1 || oracle.combo.uavs < 1) throw ConfigError("oracle combo needs at least one GU and one UAV");
  if (oracle.subbands < 1) throw ConfigError("oracle subbands must be >= 1");
  if (oracle.n_samples < 1) throw ConfigError("oracle n_samples must be >= 1");
  if (oracle.omega.empty()) throw ConfigError("oracle omega must not be empty");
  try {
    train.validate();
    for (const Combo& c : combos) {
      const EnvConfig env = env_for(c);
      env.validate();
      (void)World::build(env.scenario);  // geometry checks
    }
    for (const FadingModel& m : oracle.omega) m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

EnvConfig ExperimentConfig::env_for(const Combo& combo) const {
  EnvConfig e = env;
  e.scenario.num_gus = combo.gus;
  e.scenario.num_uavs = combo.uavs;
  return e;
}

EnvConfig ExperimentConfig::oracle_env() const {
  EnvConfig e = env_for(oracle.combo);
  e.bands.low_subbands = oracle.subbands;
  e.bands.high_subbands = oracle.subbands;
  e.frozen_world = true;
  e.scenario.seed = oracle.seed;
  return e;
}

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) throw ConfigError(what);
  throw ConfigError("line " + std::to_string(mark.line + 1) + ": " + what);
}

void check_keys(const YAML::Node& node, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) fail(node, "'" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; }))
      fail(kv.first, "unknown key '" + key + "' in " + section);
  }
}

template <class T>
void get(const YAML::Node& node, const char* key, T& out) {
  const YAML::Node v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    fail(v, std::string("invalid value for '") + key + "'");
  }
}

template <class T>
void get(const YAML::Node& node, const char* key, std::optional<T>& out) {
  const YAML::Node v = node[key];
  if (!v) return;
  if (v.IsNull()) {
    out.reset();
    return;
  }
  T tmp{};
  get(node, key, tmp);
  out = tmp;
}

Combo parse_combo(const YAML::Node& node) {
  if (!node.IsSequence() || node.size() != 2) fail(node, "a combo is a [gus, uavs] pair");
  Combo c;
  try {
    c.gus = node[0].as<int>();
    c.uavs = node[1].as<int>();
  } catch (const YAML::Exception&) {
    fail(node, "combo entries must be integers");
  }
  if (c.gus < 1 || c.uavs < 1) fail(node, "combo " + to_string(c) + ": need at least one GU and one UAV");
  return c;
}

FadingModel parse_fading(const YAML::Node& node, const std::string& section) {
  check_keys(node, section, {"family", "m", "mean_power"});
  FadingModel m;
  std::string family = "rayleigh";
  get(node, "family", family);
  if (family == "rayleigh") {
    m.family = FadingFamily::rayleigh;
  } else if (family == "nakagami") {
    m.family = FadingFamily::nakagami;
  } else if (family == "fixed") {
    m.family = FadingFamily::deterministic;
  } else {
    fail(node["family"], "unknown fading family '" + family + "'");
  }
  get(node, "m", m.m);
  get(node, "mean_power", m.mean_power);
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    fail(node, e.what());
  }
  return m;
}

const char* family_name(FadingFamily f) {
  switch (f) {
    case FadingFamily::rayleigh: return "rayleigh";
    case FadingFamily::nakagami: return "nakagami";
    case FadingFamily::deterministic: return "fixed";
  }
  return "rayleigh";
}

void parse_train(const YAML::Node& n, TrainConfig& t) {
  check_keys(n, "train",
             {"episodes", "discount", "learning_rate", "batch_size", "target_sync_steps", "epsilon_start",
              "epsilon_end", "epsilon_decay_fraction", "entropy_window", "replay_capacity", "hidden_units",
              "grad_clip_norm", "train_every", "seed"});
  get(n, "episodes", t.episodes);
  get(n, "discount", t.discount);
  get(n, "learning_rate", t.learning_rate);
  get(n, "batch_size", t.batch_size);
  get(n, "target_sync_steps", t.target_sync_steps);
  get(n, "epsilon_start", t.epsilon_start);
  get(n, "epsilon_end", t.epsilon_end);
  get(n, "epsilon_decay_fraction", t.epsilon_decay_fraction);
  get(n, "entropy_window", t.entropy_window);
  get(n, "replay_capacity", t.replay_capacity);
  get(n, "hidden_units", t.hidden_units);
  get(n, "grad_clip_norm", t.grad_clip_norm);
  get(n, "train_every", t.train_every);
  get(n, "seed", t.seed);
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    fail(n, e.what());
  }
}

void parse_scenario(const YAML::Node& n, ScenarioConfig& s) {
  check_keys(n, "scenario",
             {"area_x_m", "area_y_m", "gu_height_m", "uav_height_m", "bs_height_m", "sat_altitude_m",
              "sat_elevation_deg", "gu_min_speed_mps", "gu_max_speed_mps", "seed"});
  get(n, "area_x_m", s.area_x_m);
  get(n, "area_y_m", s.area_y_m);
  get(n, "gu_height_m", s.gu_height_m);
  get(n, "uav_height_m", s.uav_height_m);
  get(n, "bs_height_m", s.bs_height_m);
  get(n, "sat_altitude_m", s.sat_altitude_m);
  get(n, "sat_elevation_deg", s.sat_elevation_deg);
  get(n, "gu_min_speed_mps", s.gu_min_speed_mps);
  get(n, "gu_max_speed_mps", s.gu_max_speed_mps);
  get(n, "seed", s.seed);
}

void parse_bands(const YAML::Node& n, BandPlan& b) {
  check_keys(n, "bands",
             {"low_bandwidth_hz", "low_carrier_hz", "low_subbands", "high_bandwidth_hz", "high_carrier_hz",
              "high_subbands"});
  get(n, "low_bandwidth_hz", b.low_bandwidth_hz);
  get(n, "low_carrier_hz", b.low_carrier_hz);
  get(n, "low_subbands", b.low_subbands);
  get(n, "high_bandwidth_hz", b.high_bandwidth_hz);
  get(n, "high_carrier_hz", b.high_carrier_hz);
  get(n, "high_subbands", b.high_subbands);
}

void parse_channel(const YAML::Node& n, ChannelParams& c) {
  check_keys(n, "channel",
             {"gu_antenna_gain_dbi", "uav_antenna_gain_dbi", "bs_antenna_gain_dbi", "sat_antenna_gain_dbi",
              "gu_noise_figure_db", "uav_noise_figure_db", "bs_noise_figure_db", "sat_noise_figure_db", "pathloss"});
  get(n, "gu_antenna_gain_dbi", c.gu_antenna_gain_dbi);
  get(n, "uav_antenna_gain_dbi", c.uav_antenna_gain_dbi);
  get(n, "bs_antenna_gain_dbi", c.bs_antenna_gain_dbi);
  get(n, "sat_antenna_gain_dbi", c.sat_antenna_gain_dbi);
  get(n, "gu_noise_figure_db", c.gu_noise_figure_db);
  get(n, "uav_noise_figure_db", c.uav_noise_figure_db);
  get(n, "bs_noise_figure_db", c.bs_noise_figure_db);
  get(n, "sat_noise_figure_db", c.sat_noise_figure_db);
  if (const YAML::Node pl = n["pathloss"]) {
    check_keys(pl, "channel.pathloss", {"G2B", "G2U", "U2B", "G2S", "U2S"});
    for (LinkClass cls : kAllLinkClasses) {
      const YAML::Node row = pl[to_string(cls)];
      if (!row) continue;
      const std::string section = std::string("channel.pathloss.") + to_string(cls);
      check_keys(row, section, {"intercept_db", "slope_db_per_decade", "freq_coeff_db", "freq_ref_hz"});
      PathlossRow& r = c.row(cls);
      get(row, "intercept_db", r.intercept_db);
      get(row, "slope_db_per_decade", r.slope_db_per_decade);
      get(row, "freq_coeff_db", r.freq_coeff_db);
      get(row, "freq_ref_hz", r.freq_ref_hz);
    }
  }
}

void parse_reward(const YAML::Node& n, RewardWeights& w) {
  check_keys(n, "reward",
             {"alpha_latency", "alpha_coordination", "alpha_exploration", "kappa_gu", "kappa_uav", "w_gu", "w_uav",
              "zeta_gu", "zeta_uav"});
  get(n, "alpha_latency", w.alpha_latency);
  get(n, "alpha_coordination", w.alpha_coordination);
  get(n, "alpha_exploration", w.alpha_exploration);
  get(n, "kappa_gu", w.kappa_gu);
  get(n, "kappa_uav", w.kappa_uav);
  get(n, "w_gu", w.w_gu);
  get(n, "w_uav", w.w_uav);
  get(n, "zeta_gu", w.zeta_gu);
  get(n, "zeta_uav", w.zeta_uav);
}

void parse_env(const YAML::Node& n, EnvConfig& e) {
  check_keys(n, "env",
             {"power_levels_dbm", "silence_dbm", "gu_packet_bits", "uav_packet_bits", "relay_queue_cap",
              "deadline_steps", "step_s", "frozen_world", "fading"});
  get(n, "power_levels_dbm", e.power_levels_dbm);
  get(n, "silence_dbm", e.silence_dbm);
  get(n, "gu_packet_bits", e.gu_packet_bits);
  get(n, "uav_packet_bits", e.uav_packet_bits);
  get(n, "relay_queue_cap", e.relay_queue_cap);
  get(n, "deadline_steps", e.deadline_steps);
  get(n, "step_s", e.step_s);
  get(n, "frozen_world", e.frozen_world);
  if (const YAML::Node f = n["fading"]) e.fading = parse_fading(f, "env.fading");
}

void parse_oracle(const YAML::Node& n, OracleConfig& o) {
  check_keys(n, "oracle", {"combo", "subbands", "n_samples", "seed", "cap", "omega", "train_episodes", "eval_episodes"});
  if (const YAML::Node c = n["combo"]) o.combo = parse_combo(c);
  get(n, "subbands", o.subbands);
  get(n, "n_samples", o.n_samples);
  get(n, "seed", o.seed);
  get(n, "cap", o.cap);
  get(n, "train_episodes", o.train_episodes);
  get(n, "eval_episodes", o.eval_episodes);
  if (const YAML::Node omega = n["omega"]) {
    if (!omega.IsSequence() || omega.size() == 0) fail(omega, "oracle.omega must be a non-empty list");
    o.omega.clear();
    for (const auto& m : omega) o.omega.push_back(parse_fading(m, "oracle.omega"));
  }
}

// --- emit ------------------------------------------------------------------

void emit_fading(YAML::Emitter& out, const FadingModel& m) {
  out << YAML::BeginMap << YAML::Key << "family" << YAML::Value << family_name(m.family) << YAML::Key << "m"
      << YAML::Value << m.m << YAML::Key << "mean_power" << YAML::Value << m.mean_power << YAML::EndMap;
}

template <class T>
void kv(YAML::Emitter& out, const char* key, const T& value) {
  out << YAML::Key << key << YAML::Value << value;
}

template <class T>
void kv(YAML::Emitter& out, const char* key, const std::optional<T>& value) {
  if (value) kv(out, key, *value);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  check_keys(root, "config",
             {"combos", "seeds", "eval_episodes", "output_dir", "train", "scenario", "bands", "channel", "reward",
              "env", "oracle"});
  if (const YAML::Node combos = root["combos"]) {
    if (!combos.IsSequence() || combos.size() == 0) fail(combos, "combos must be a non-empty list");
    cfg.combos.clear();
    for (const auto& c : combos) cfg.combos.push_back(parse_combo(c));
  }
  if (const YAML::Node seeds = root["seeds"]) {
    if (!seeds.IsSequence() || seeds.size() == 0) fail(seeds, "seeds must be a non-empty list");
    get(root, "seeds", cfg.seeds);
  }
  get(root, "eval_episodes", cfg.eval_episodes);
  get(root, "output_dir", cfg.output_dir);
  if (const YAML::Node n = root["train"]) parse_train(n, cfg.train);
  if (const YAML::Node n = root["scenario"]) parse_scenario(n, cfg.env.scenario);
  if (const YAML::Node n = root["bands"]) parse_bands(n, cfg.env.bands);
  if (const YAML::Node n = root["channel"]) parse_channel(n, cfg.env.channel);
  if (const YAML::Node n = root["reward"]) parse_reward(n, cfg.env.reward);
  if (const YAML::Node n = root["env"]) parse_env(n, cfg.env);
  if (const YAML::Node n = root["oracle"]) parse_oracle(n, cfg.oracle);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string emit_config(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(std::numeric_limits<double>::max_digits10);
  out << YAML::BeginMap;

  out << YAML::Key << "combos" << YAML::Value << YAML::BeginSeq;
  for (const Combo& c : cfg.combos) out << YAML::Flow << YAML::BeginSeq << c.gus << c.uavs << YAML::EndSeq;
  out << YAML::EndSeq;
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << cfg.seeds;
  kv(out, "eval_episodes", cfg.eval_episodes);
  kv(out, "output_dir", cfg.output_dir);

  const TrainConfig& t = cfg.train;
  out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  kv(out, "episodes", t.episodes);
  kv(out, "discount", t.discount);
  kv(out, "learning_rate", t.learning_rate);
  kv(out, "batch_size", t.batch_size);
  kv(out, "target_sync_steps", t.target_sync_steps);
  kv(out, "epsilon_start", t.epsilon_start);
  kv(out, "epsilon_end", t.epsilon_end);
  kv(out, "epsilon_decay_fraction", t.epsilon_decay_fraction);
  kv(out, "entropy_window", t.entropy_window);
  kv(out, "replay_capacity", t.replay_capacity);
  kv(out, "hidden_units", t.hidden_units);
  kv(out, "grad_clip_norm", t.grad_clip_norm);
  kv(out, "train_every", t.train_every);
  kv(out, "seed", t.seed);
  out << YAML::EndMap;

  const ScenarioConfig& s = cfg.env.scenario;
  out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  kv(out, "area_x_m", s.area_x_m);
  kv(out, "area_y_m", s.area_y_m);
  kv(out, "gu_height_m", s.gu_height_m);
  kv(out, "uav_height_m", s.uav_height_m);
  kv(out, "bs_height_m", s.bs_height_m);
  kv(out, "sat_altitude_m", s.sat_altitude_m);
  kv(out, "sat_elevation_deg", s.sat_elevation_deg);
  kv(out, "gu_min_speed_mps", s.gu_min_speed_mps);
  kv(out, "gu_max_speed_mps", s.gu_max_speed_mps);
  kv(out, "seed", s.seed);
  out << YAML::EndMap;

  const BandPlan& b = cfg.env.bands;
  out << YAML::Key << "bands" << YAML::Value << YAML::BeginMap;
  kv(out, "low_bandwidth_hz", b.low_bandwidth_hz);
  kv(out, "low_carrier_hz", b.low_carrier_hz);
  kv(out, "low_subbands", b.low_subbands);
  kv(out, "high_bandwidth_hz", b.high_bandwidth_hz);
  kv(out, "high_carrier_hz", b.high_carrier_hz);
  kv(out, "high_subbands", b.high_subbands);
  out << YAML::EndMap;

  const ChannelParams& c = cfg.env.channel;
  out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
  kv(out, "gu_antenna_gain_dbi", c.gu_antenna_gain_dbi);
  kv(out, "uav_antenna_gain_dbi", c.uav_antenna_gain_dbi);
  kv(out, "bs_antenna_gain_dbi", c.bs_antenna_gain_dbi);
  kv(out, "sat_antenna_gain_dbi", c.sat_antenna_gain_dbi);
  kv(out, "gu_noise_figure_db", c.gu_noise_figure_db);
  kv(out, "uav_noise_figure_db", c.uav_noise_figure_db);
  kv(out, "bs_noise_figure_db", c.bs_noise_figure_db);
  kv(out, "sat_noise_figure_db", c.sat_noise_figure_db);
  out << YAML::Key << "pathloss" << YAML::Value << YAML::BeginMap;
  for (LinkClass cls : kAllLinkClasses) {
    const PathlossRow& r = c.row(cls);
    out << YAML::Key << to_string(cls) << YAML::Value << YAML::BeginMap;
    kv(out, "intercept_db", r.intercept_db);
    kv(out, "slope_db_per_decade", r.slope_db_per_decade);
    kv(out, "freq_coeff_db", r.freq_coeff_db);
    kv(out, "freq_ref_hz", r.freq_ref_hz);
    out << YAML::EndMap;
  }
  out << YAML::EndMap << YAML::EndMap;

  const RewardWeights& w = cfg.env.reward;
  out << YAML::Key << "reward" << YAML::Value << YAML::BeginMap;
  kv(out, "alpha_latency", w.alpha_latency);
  kv(out, "alpha_coordination", w.alpha_coordination);
  kv(out, "alpha_exploration", w.alpha_exploration);
  kv(out, "kappa_gu", w.kappa_gu);
  kv(out, "kappa_uav", w.kappa_uav);
  kv(out, "w_gu", w.w_gu);
  kv(out, "w_uav", w.w_uav);
  kv(out, "zeta_gu", w.zeta_gu);
  kv(out, "zeta_uav", w.zeta_uav);
  out << YAML::EndMap;

  const EnvConfig& e = cfg.env;
  out << YAML::Key << "env" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "power_levels_dbm" << YAML::Value << YAML::Flow << e.power_levels_dbm;
  kv(out, "silence_dbm", e.silence_dbm);
  kv(out, "gu_packet_bits", e.gu_packet_bits);
  kv(out, "uav_packet_bits", e.uav_packet_bits);
  kv(out, "relay_queue_cap", e.relay_queue_cap);
  kv(out, "deadline_steps", e.deadline_steps);
  kv(out, "step_s", e.step_s);
  kv(out, "frozen_world", e.frozen_world);
  out << YAML::Key << "fading" << YAML::Value;
  emit_fading(out, e.fading);
  out << YAML::EndMap;

  const OracleConfig& o = cfg.oracle;
  out << YAML::Key << "oracle" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "combo" << YAML::Value << YAML::Flow << YAML::BeginSeq << o.combo.gus << o.combo.uavs
      << YAML::EndSeq;
  kv(out, "subbands", o.subbands);
  kv(out, "n_samples", o.n_samples);
  kv(out, "seed", o.seed);
  kv(out, "cap", o.cap);
  kv(out, "train_episodes", o.train_episodes);
  kv(out, "eval_episodes", o.eval_episodes);
  out << YAML::Key << "omega" << YAML::Value << YAML::BeginSeq;
  for (const FadingModel& m : o.omega) emit_fading(out, m);
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace sagin
