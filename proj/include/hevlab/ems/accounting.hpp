#pragma once

#include "hevlab/common/errors.hpp"
#include "hevlab/common/units.hpp"
#include "hevlab/powertrain/battery.hpp"

namespace hevlab::ems {

/// Pack energy per unit of fractional SOC, J.
inline double pack_energy(const powertrain::BatteryState& bat) { return bat.u_oc * bat.capacity_coulomb(); }

/// Fuel mass that buys one unit of fractional SOC at efficiency `eta`, kg.
inline double soc_fuel_slope(const powertrain::BatteryState& bat, double eta, double lhv = units::gasoline_lhv)
{
    if (!(eta > 0.0)) {
        throw ValidationError("soc_fuel_slope: eta must be positive");
    }
    return pack_energy(bat) / (eta * lhv);
}

/// Fuel in litres adjusted to a common final SOC: a deficit (soc_final < soc_target) adds the
/// fuel that would restore the missing pack energy at efficiency `eta`.
inline double soc_corrected_fuel(double fuel_l, double soc_final, double soc_target, const powertrain::BatteryState& bat,
                                 double eta, double lhv = units::gasoline_lhv)
{
    return fuel_l + units::kg_to_litres((soc_target - soc_final) * soc_fuel_slope(bat, eta, lhv));
}

inline double fuel_economy(double fuel_l, double distance_m)
{
    if (!(distance_m > 0.0)) {
        throw DomainError("fuel_economy: distance must be positive");
    }
    return fuel_l * 100.0 / (distance_m / 1000.0);
}

} // namespace hevlab::ems
