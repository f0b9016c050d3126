#pragma once

#include <numbers>

namespace hevlab::units {

inline constexpr double pi = std::numbers::pi;

constexpr double rpm_to_radps(double rpm) { return rpm * 2.0 * pi / 60.0; }
constexpr double radps_to_rpm(double w) { return w * 60.0 / (2.0 * pi); }
constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }
constexpr double mps_to_kmh(double v) { return v * 3.6; }

/// Gasoline lower heating value, J/kg.
inline constexpr double gasoline_lhv = 44.0e6;
/// Gasoline density used for every kg -> L conversion.
inline constexpr double gasoline_density_kg_per_l = 0.745;

constexpr double kg_to_litres(double kg) { return kg / gasoline_density_kg_per_l; }

} // namespace hevlab::units
