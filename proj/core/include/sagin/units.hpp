#pragma once

#include <cmath>

namespace sagin {

/// Decibel helpers. All link budgets are summed in dB and converted once.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

inline constexpr double kThermalNoiseDbmPerHz = -174.0;

}  // namespace sagin
