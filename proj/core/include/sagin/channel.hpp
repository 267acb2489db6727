#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "sagin/band_plan.hpp"
#include "sagin/random.hpp"
#include "sagin/world.hpp"

namespace sagin {

enum class LinkClass { g2b, g2u, u2b, g2s, u2s };

inline constexpr std::array<LinkClass, 5> kAllLinkClasses = {LinkClass::g2b, LinkClass::g2u, LinkClass::u2b,
                                                             LinkClass::g2s, LinkClass::u2s};

const char* to_string(LinkClass cls);
Band band_of(LinkClass cls);

/// The link class joining `tx` to `rx`, or nullopt for pairs that are not one
/// of the five transmit links (GU->GU, UAV->UAV, anything from BS/SAT, ...).
std::optional<LinkClass> classify(NodeKind tx, NodeKind rx);

/// Log-distance row: PL(d) = intercept + slope*log10(d_m) + freq_coeff*log10(f_c / freq_ref).
struct PathlossRow {
  double intercept_db = 0.0;
  double slope_db_per_decade = 20.0;
  double freq_coeff_db = 20.0;
  double freq_ref_hz = 1e6;

  friend bool operator==(const PathlossRow&, const PathlossRow&) = default;
};

/// Default rows. G2B is WINNER-B1-LOS-like, U2B is a TR 36.777 style
/// aerial row, G2U is free space plus 1 dB excess loss, G2S/U2S are free
/// space plus a 2 dB atmospheric constant.
PathlossRow default_pathloss_row(LinkClass cls);

struct ChannelParams {
  std::array<PathlossRow, 5> rows = {default_pathloss_row(LinkClass::g2b), default_pathloss_row(LinkClass::g2u),
                                     default_pathloss_row(LinkClass::u2b), default_pathloss_row(LinkClass::g2s),
                                     default_pathloss_row(LinkClass::u2s)};
  double gu_antenna_gain_dbi = 3.0;
  double uav_antenna_gain_dbi = 3.0;
  double bs_antenna_gain_dbi = 8.0;
  double sat_antenna_gain_dbi = 40.0;
  double gu_noise_figure_db = 9.0;
  double uav_noise_figure_db = 9.0;
  double bs_noise_figure_db = 5.0;
  double sat_noise_figure_db = 5.0;

  [[nodiscard]] const PathlossRow& row(LinkClass cls) const { return rows[static_cast<std::size_t>(cls)]; }
  [[nodiscard]] PathlossRow& row(LinkClass cls) { return rows[static_cast<std::size_t>(cls)]; }
  [[nodiscard]] double antenna_gain_dbi(NodeKind kind) const;
  [[nodiscard]] double noise_figure_db(NodeKind kind) const;

  void validate() const;

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

double pathloss_db(const PathlossRow& row, double distance_m, double carrier_hz);
double pathloss_db(LinkClass cls, double distance_m, double carrier_hz, const ChannelParams& params = {});

enum class FadingFamily { rayleigh, nakagami, deterministic };

const char* to_string(FadingFamily family);

/// Small-scale power fading. Rayleigh is exponential power, Nakagami-m is
/// gamma(shape m, scale mean/m), deterministic is a point mass at `mean_power`.
struct FadingModel {
  FadingFamily family = FadingFamily::rayleigh;
  double m = 1.0;
  double mean_power = 1.0;

  static FadingModel rayleigh() { return {}; }
  static FadingModel nakagami(double m) { return {FadingFamily::nakagami, m, 1.0}; }
  static FadingModel fixed(double value = 1.0) { return {FadingFamily::deterministic, 1.0, value}; }

  void validate() const;
  /// Inverse CDF, used for common-random-number coupling across models.
  [[nodiscard]] double quantile(double u) const;

  friend bool operator==(const FadingModel&, const FadingModel&) = default;
};

double sample_fading(const FadingModel& model, Rng& rng);

/// Linear gain 10^((G_tx + G_rx - PL)/10) * fading for a link of the given class.
double channel_gain(const World& world, NodeId tx, NodeId rx, LinkClass cls, double fading,
                    const ChannelParams& params, const BandPlan& plan);

double noise_power_w(double bandwidth_hz, double noise_figure_db);

/// Linear gains g[tx][rx][h] from every agent to every receiving node on
/// every sub-band of the receiver's band, plus per-receiver noise power on
/// one sub-band. BS and UAV receivers live in the low band, the SAT in the
/// high band.
class ChannelState {
 public:
  static ChannelState sample(const World& world, const ChannelParams& params, const BandPlan& plan,
                             const FadingModel& fading, Rng& rng);
  static ChannelState mean(const World& world, const ChannelParams& params, const BandPlan& plan);
  /// Explicit gains (layout of raw_gains()) and per-node noise powers.
  static ChannelState from_values(const World& world, int max_subbands, std::vector<double> gains,
                                  std::vector<double> noise_w);

  [[nodiscard]] double gain(NodeId tx, NodeId rx, int subband) const { return gains_[index(tx, rx, subband)]; }
  [[nodiscard]] double noise_w(NodeId rx) const { return noise_w_.at(rx); }

  /// Multiply every stored gain by the matching entry of `multipliers`
  /// (same layout as raw_gains()). Zero multipliers are allowed here.
  [[nodiscard]] ChannelState with_fading(std::span<const double> multipliers) const;
  [[nodiscard]] std::span<const double> raw_gains() const { return gains_; }

  [[nodiscard]] std::size_t num_agents() const { return num_agents_; }
  [[nodiscard]] std::size_t num_nodes() const { return num_nodes_; }
  [[nodiscard]] int max_subbands() const { return max_subbands_; }

  /// True if (tx, rx) carries a gain (tx is an agent, rx a UAV/BS/SAT, tx != rx).
  [[nodiscard]] static bool is_link(const World& world, NodeId tx, NodeId rx);

  [[nodiscard]] std::size_t index(NodeId tx, NodeId rx, int subband) const {
    return (tx * num_nodes_ + rx) * static_cast<std::size_t>(max_subbands_) + static_cast<std::size_t>(subband);
  }

 private:
  template <class FadingFn>
  static ChannelState build(const World& world, const ChannelParams& params, const BandPlan& plan, FadingFn&& fading);

  std::size_t num_agents_ = 0;
  std::size_t num_nodes_ = 0;
  int max_subbands_ = 1;
  std::vector<double> gains_;
  std::vector<double> noise_w_;
};

}  // namespace sagin
