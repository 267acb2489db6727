#include "sagin/channel.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sagin/units.hpp"

namespace sagin {

const char* to_string(LinkClass cls) {
  switch (cls) {
    case LinkClass::g2b: return "G2B";
    case LinkClass::g2u: return "G2U";
    case LinkClass::u2b: return "U2B";
    case LinkClass::g2s: return "G2S";
    case LinkClass::u2s: return "U2S";
  }
  return "?";
}

Band band_of(LinkClass cls) {
  return (cls == LinkClass::g2s || cls == LinkClass::u2s) ? Band::high : Band::low;
}

std::optional<LinkClass> classify(NodeKind tx, NodeKind rx) {
  if (tx == NodeKind::gu) {
    switch (rx) {
      case NodeKind::bs: return LinkClass::g2b;
      case NodeKind::uav: return LinkClass::g2u;
      case NodeKind::sat: return LinkClass::g2s;
      default: return std::nullopt;
    }
  }
  if (tx == NodeKind::uav) {
    if (rx == NodeKind::bs) return LinkClass::u2b;
    if (rx == NodeKind::sat) return LinkClass::u2s;
  }
  return std::nullopt;
}

PathlossRow default_pathloss_row(LinkClass cls) {
  // 32.45 + 20log10(d_km) + 20log10(f_MHz) == -27.55 + 20log10(d_m) + 20log10(f_Hz / 1 MHz)
  constexpr double kFreeSpaceIntercept = 32.45 - 60.0;
  switch (cls) {
    case LinkClass::g2b: return {41.0, 22.7, 20.0, 5e9};
    case LinkClass::u2b: return {28.0, 22.0, 20.0, 1e9};
    case LinkClass::g2u: return {kFreeSpaceIntercept + 1.0, 20.0, 20.0, 1e6};
    case LinkClass::g2s:
    case LinkClass::u2s: return {kFreeSpaceIntercept + 2.0, 20.0, 20.0, 1e6};
  }
  return {};
}

double ChannelParams::antenna_gain_dbi(NodeKind kind) const {
  switch (kind) {
    case NodeKind::gu: return gu_antenna_gain_dbi;
    case NodeKind::uav: return uav_antenna_gain_dbi;
    case NodeKind::bs: return bs_antenna_gain_dbi;
    case NodeKind::sat: return sat_antenna_gain_dbi;
  }
  return 0.0;
}

double ChannelParams::noise_figure_db(NodeKind kind) const {
  switch (kind) {
    case NodeKind::gu: return gu_noise_figure_db;
    case NodeKind::uav: return uav_noise_figure_db;
    case NodeKind::bs: return bs_noise_figure_db;
    case NodeKind::sat: return sat_noise_figure_db;
  }
  return 0.0;
}

void ChannelParams::validate() const {
  for (LinkClass cls : kAllLinkClasses) {
    const PathlossRow& r = row(cls);
    if (!(r.slope_db_per_decade > 0.0))
      throw std::invalid_argument(std::string("pathloss slope must be positive for ") + to_string(cls));
    if (!(r.freq_ref_hz > 0.0))
      throw std::invalid_argument(std::string("pathloss reference frequency must be positive for ") + to_string(cls));
  }
}

double pathloss_db(const PathlossRow& row, double distance_m, double carrier_hz) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("pathloss distance must be positive");
  if (!(carrier_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
  return row.intercept_db + row.slope_db_per_decade * std::log10(distance_m) +
         row.freq_coeff_db * std::log10(carrier_hz / row.freq_ref_hz);
}

double pathloss_db(LinkClass cls, double distance_m, double carrier_hz, const ChannelParams& params) {
  return pathloss_db(params.row(cls), distance_m, carrier_hz);
}

const char* to_string(FadingFamily family) {
  switch (family) {
    case FadingFamily::rayleigh: return "rayleigh";
    case FadingFamily::nakagami: return "nakagami";
    case FadingFamily::deterministic: return "deterministic";
  }
  return "?";
}

void FadingModel::validate() const {
  if (family == FadingFamily::nakagami && !(m > 0.0)) throw std::invalid_argument("Nakagami m must be positive");
  if (!(mean_power >= 0.0) || !std::isfinite(mean_power))
    throw std::invalid_argument("fading mean power must be finite and non-negative");
}

double FadingModel::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("fading quantile needs u in (0, 1)");
  switch (family) {
    case FadingFamily::rayleigh: return -mean_power * std::log1p(-u);
    case FadingFamily::nakagami: return mean_power * boost::math::gamma_p_inv(m, u) / m;
    case FadingFamily::deterministic: return mean_power;
  }
  return mean_power;
}

double sample_fading(const FadingModel& model, Rng& rng) {
  model.validate();
  if (model.mean_power == 0.0) return 0.0;
  switch (model.family) {
    case FadingFamily::rayleigh: return std::exponential_distribution<double>(1.0 / model.mean_power)(rng);
    case FadingFamily::nakagami:
      return std::gamma_distribution<double>(model.m, model.mean_power / model.m)(rng);
    case FadingFamily::deterministic: return model.mean_power;
  }
  return model.mean_power;
}

namespace {

double budget_gain(double pathloss, double g_tx, double g_rx, double fading) {
  return db_to_linear(g_tx + g_rx - pathloss) * fading;
}

}  // namespace

double channel_gain(const World& world, NodeId tx, NodeId rx, LinkClass cls, double fading,
                    const ChannelParams& params, const BandPlan& plan) {
  const auto actual = classify(world.kind(tx), world.kind(rx));
  if (!actual || *actual != cls) {
    throw std::invalid_argument(std::string("link class ") + to_string(cls) + " does not join " +
                                to_string(world.kind(tx)) + " to " + to_string(world.kind(rx)));
  }
  if (!(fading > 0.0) || !std::isfinite(fading)) throw std::invalid_argument("fading must be positive and finite");
  const double pl = pathloss_db(cls, world.distance(tx, rx), plan.carrier_hz(band_of(cls)), params);
  return budget_gain(pl, params.antenna_gain_dbi(world.kind(tx)), params.antenna_gain_dbi(world.kind(rx)), fading);
}

double noise_power_w(double bandwidth_hz, double noise_figure_db) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("noise bandwidth must be positive");
  return dbm_to_watts(kThermalNoiseDbmPerHz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

bool ChannelState::is_link(const World& world, NodeId tx, NodeId rx) {
  if (tx == rx || tx >= static_cast<NodeId>(world.num_agents())) return false;
  const NodeKind k = world.kind(rx);
  return k == NodeKind::uav || k == NodeKind::bs || k == NodeKind::sat;
}

template <class FadingFn>
ChannelState ChannelState::build(const World& world, const ChannelParams& params, const BandPlan& plan,
                                 FadingFn&& fading) {
  ChannelState state;
  state.num_agents_ = static_cast<std::size_t>(world.num_agents());
  state.num_nodes_ = world.num_nodes();
  state.max_subbands_ = plan.max_subbands();
  state.gains_.assign(state.num_agents_ * state.num_nodes_ * static_cast<std::size_t>(state.max_subbands_), 0.0);
  state.noise_w_.assign(state.num_nodes_, 0.0);

  for (NodeId rx = 0; rx < state.num_nodes_; ++rx) {
    const NodeKind k = world.kind(rx);
    if (k == NodeKind::gu) continue;
    const Band band = k == NodeKind::sat ? Band::high : Band::low;
    state.noise_w_[rx] = noise_power_w(plan.subband_width_hz(band), params.noise_figure_db(k));
  }

  for (NodeId tx = 0; tx < state.num_agents_; ++tx) {
    for (NodeId rx = 0; rx < state.num_nodes_; ++rx) {
      if (!is_link(world, tx, rx)) continue;
      const NodeKind tk = world.kind(tx);
      const NodeKind rk = world.kind(rx);
      // UAV->UAV is not a transmit link but it does carry interference; it
      // uses the air-to-air (G2U) row.
      const LinkClass cls = classify(tk, rk).value_or(LinkClass::g2u);
      const Band band = band_of(cls);
      const double pl = pathloss_db(cls, world.distance(tx, rx), plan.carrier_hz(band), params);
      const double mean = budget_gain(pl, params.antenna_gain_dbi(tk), params.antenna_gain_dbi(rk), 1.0);
      for (int h = 0; h < plan.subbands(band); ++h) state.gains_[state.index(tx, rx, h)] = mean * fading();
    }
  }
  return state;
}

ChannelState ChannelState::sample(const World& world, const ChannelParams& params, const BandPlan& plan,
                                  const FadingModel& fading, Rng& rng) {
  fading.validate();
  return build(world, params, plan, [&] { return sample_fading(fading, rng); });
}

ChannelState ChannelState::mean(const World& world, const ChannelParams& params, const BandPlan& plan) {
  return build(world, params, plan, [] { return 1.0; });
}

ChannelState ChannelState::from_values(const World& world, int max_subbands, std::vector<double> gains,
                                       std::vector<double> noise_w) {
  ChannelState state;
  state.num_agents_ = static_cast<std::size_t>(world.num_agents());
  state.num_nodes_ = world.num_nodes();
  state.max_subbands_ = max_subbands;
  if (max_subbands < 1) throw std::invalid_argument("max_subbands must be >= 1");
  if (gains.size() != state.num_agents_ * state.num_nodes_ * static_cast<std::size_t>(max_subbands))
    throw std::invalid_argument("gain table has the wrong size");
  if (noise_w.size() != state.num_nodes_) throw std::invalid_argument("need one noise power per node");
  state.gains_ = std::move(gains);
  state.noise_w_ = std::move(noise_w);
  return state;
}

ChannelState ChannelState::with_fading(std::span<const double> multipliers) const {
  if (multipliers.size() != gains_.size()) throw std::invalid_argument("fading multiplier layout mismatch");
  ChannelState out = *this;
  for (std::size_t k = 0; k < gains_.size(); ++k) out.gains_[k] *= multipliers[k];
  return out;
}

}  // namespace sagin
