#pragma once

#include <stdexcept>

namespace sagin {

enum class Band { low, high };

/// Two bands: the terrestrial band (G2B, G2U, U2B) and the non-terrestrial
/// band (G2S, U2S), each split into equal-width orthogonal sub-bands.
struct BandPlan {
  double low_bandwidth_hz = 1e6;
  double low_carrier_hz = 2e9;
  int low_subbands = 4;
  double high_bandwidth_hz = 100e6;
  double high_carrier_hz = 30e9;
  int high_subbands = 4;

  [[nodiscard]] int subbands(Band band) const { return band == Band::low ? low_subbands : high_subbands; }
  [[nodiscard]] double carrier_hz(Band band) const { return band == Band::low ? low_carrier_hz : high_carrier_hz; }
  [[nodiscard]] double subband_width_hz(Band band) const {
    return band == Band::low ? low_bandwidth_hz / low_subbands : high_bandwidth_hz / high_subbands;
  }
  [[nodiscard]] int max_subbands() const { return low_subbands > high_subbands ? low_subbands : high_subbands; }

  void validate() const {
    if (low_subbands < 1 || high_subbands < 1) throw std::invalid_argument("each band needs at least one sub-band");
    if (!(low_bandwidth_hz > 0.0) || !(high_bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (!(low_carrier_hz > 0.0) || !(high_carrier_hz > 0.0)) throw std::invalid_argument("carrier must be positive");
  }

  friend bool operator==(const BandPlan&, const BandPlan&) = default;
};

}  // namespace sagin
