#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hevlab/common/errors.hpp"
#include "hevlab/common/interp.hpp"
#include "hevlab/common/paths.hpp"
#include "hevlab/common/units.hpp"

namespace hevlab::powertrain {

enum class MachineDirection { motoring, generating };

struct MachinePower {
    double electrical = 0.0; ///< W, positive when drawing from the battery
    double torque = 0.0;     ///< torque actually applied after saturation
    bool saturated = false;
};

/// Efficiency table over (omega, |torque|) and a torque-limit envelope min(T_max, P_max/omega).
class MachineMap {
public:
    MachineMap(std::string name, Grid2D efficiency, double max_torque, double max_power, double max_speed)
        : name_(std::move(name)), eff_(std::move(efficiency)), max_torque_(max_torque), max_power_(max_power),
          max_speed_(max_speed)
    {
        for (double e : eff_.values()) {
            if (!(e > 0.0 && e <= 1.0)) {
                throw ValidationError("machine efficiency must lie in (0, 1]");
            }
        }
        if (!(max_torque_ > 0.0 && max_power_ > 0.0 && max_speed_ > 0.0)) {
            throw ValidationError("machine limits must be positive");
        }
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const Grid2D& grid() const noexcept { return eff_; }
    [[nodiscard]] double max_torque() const noexcept { return max_torque_; }
    [[nodiscard]] double max_power() const noexcept { return max_power_; }
    [[nodiscard]] double max_speed() const noexcept { return max_speed_; }

    [[nodiscard]] double torque_limit(double omega) const
    {
        const double w = std::abs(omega);
        if (w > max_speed_ + 1e-9) {
            return 0.0;
        }
        return w > 0.0 ? std::min(max_torque_, max_power_ / w) : max_torque_;
    }

    [[nodiscard]] double efficiency(double omega, double torque) const
    {
        return eff_(std::abs(omega), std::abs(torque));
    }

private:
    std::string name_;
    Grid2D eff_;
    double max_torque_;
    double max_power_;
    double max_speed_;
};

/// Electrical power for a shaft operating point: mech/eta motoring, mech*eta generating.
inline MachinePower machine_power(double omega, double torque, const MachineMap& map, MachineDirection direction)
{
    MachinePower out;
    const double limit = map.torque_limit(omega);
    out.torque = torque;
    if (std::abs(torque) > limit + 1e-9) {
        out.saturated = true;
        out.torque = std::copysign(limit, torque);
    }
    if (out.torque == 0.0 || omega == 0.0) {
        return out;
    }
    const double mech = omega * out.torque;
    const double eta = map.efficiency(omega, out.torque);
    out.electrical = direction == MachineDirection::motoring ? mech / eta : mech * eta;
    return out;
}

/// Smooth efficiency island peaking at 0.94, clamped to [0.70, 0.94].
inline double synthetic_machine_efficiency(double omega, double torque, double max_torque, double max_speed)
{
    const double ws = omega / max_speed;
    const double ts = std::abs(torque) / max_torque;
    double eta = 0.94 - 0.10 * std::pow((ws - 0.45) / 0.55, 2) - 0.08 * std::pow((ts - 0.5) / 0.5, 2)
                 - 0.10 * std::exp(-omega / 50.0) - 0.06 * std::exp(-std::abs(torque) / 8.0);
    return std::clamp(eta, 0.70, 0.94);
}

inline Grid2D synthesize_machine_grid(double max_torque, double max_speed)
{
    auto omegas = linspace(0.0, max_speed, 31);
    auto torques = linspace(0.0, max_torque, 24);
    std::vector<double> values;
    values.reserve(omegas.size() * torques.size());
    for (double w : omegas) {
        for (double t : torques) {
            values.push_back(synthetic_machine_efficiency(w, t, max_torque, max_speed));
        }
    }
    return Grid2D(std::move(omegas), std::move(torques), std::move(values));
}

/// MG1: 115 N m / 50 kW / 9000 rpm.
inline MachineMap load_mg1(const std::string& path = data_path("maps/mg1_eff.csv"))
{
    return MachineMap("mg1", load_grid_csv(path), 115.0, 50.0e3, units::rpm_to_radps(9000.0));
}

/// MG2: 150 N m / 70 kW / 6000 rpm.
inline MachineMap load_mg2(const std::string& path = data_path("maps/mg2_eff.csv"))
{
    return MachineMap("mg2", load_grid_csv(path), 150.0, 70.0e3, units::rpm_to_radps(6000.0));
}

} // namespace hevlab::powertrain
