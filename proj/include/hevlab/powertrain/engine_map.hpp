#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hevlab/common/errors.hpp"
#include "hevlab/common/interp.hpp"
#include "hevlab/common/paths.hpp"
#include "hevlab/common/units.hpp"

namespace hevlab::powertrain {

/// Full-load envelope: 120 kW, 270 N·m, 1000-5200 rpm.
struct EngineLimits {
    double max_power = 120.0e3;
    double max_torque = 270.0;
    double min_speed = units::rpm_to_radps(1000.0);
    double max_speed = units::rpm_to_radps(5200.0);
    /// Full-load torque ramps up from this value at min_speed to max_torque at ramp_end_speed.
    double low_speed_torque = 200.0;
    double ramp_end_speed = units::rpm_to_radps(1500.0);

    [[nodiscard]] double max_torque_at(double omega) const
    {
        if (omega < min_speed - 1e-9 || omega > max_speed + 1e-9) {
            return 0.0;
        }
        double t = max_torque;
        if (omega < ramp_end_speed) {
            const double w = (omega - min_speed) / (ramp_end_speed - min_speed);
            t = low_speed_torque + std::clamp(w, 0.0, 1.0) * (max_torque - low_speed_torque);
        }
        return std::min(t, max_power / omega);
    }

    [[nodiscard]] bool inside(double omega, double torque) const
    {
        return omega >= min_speed - 1e-9 && omega <= max_speed + 1e-9 && torque >= 0.0
               && torque <= max_torque_at(omega) + 1e-9;
    }
};

struct FuelLookup {
    double rate = 0.0; ///< kg/s
    bool clamped = false;
};

/// Quasi-static engine: BSFC table in g/kWh over (omega rad/s, torque N·m).
class EngineMap {
public:
    EngineMap(Grid2D bsfc, EngineLimits limits = {}, double lhv = units::gasoline_lhv)
        : bsfc_(std::move(bsfc)), limits_(limits), lhv_(lhv)
    {
        for (double v : bsfc_.values()) {
            if (!(v > 0.0 && std::isfinite(v))) {
                throw ValidationError("BSFC map values must be positive");
            }
        }
    }

    [[nodiscard]] const Grid2D& grid() const noexcept { return bsfc_; }
    [[nodiscard]] const EngineLimits& limits() const noexcept { return limits_; }
    [[nodiscard]] double lhv() const noexcept { return lhv_; }

    /// g/kWh. Torques below the first map row use that row's value.
    [[nodiscard]] double bsfc(double omega, double torque) const
    {
        return bsfc_(omega, std::max(torque, bsfc_.ys().front()));
    }

    /// Brake thermal efficiency implied by the BSFC value.
    [[nodiscard]] double efficiency(double omega, double torque) const
    {
        return 3.6e6 / (bsfc(omega, torque) * lhv_ * 1e-3);
    }

    /// Fuel mass flow at a brake operating point. Points outside the envelope are clamped onto it.
    [[nodiscard]] FuelLookup quasi_static_fuel(double omega, double torque) const
    {
        FuelLookup out;
        if (torque <= 0.0) {
            return out;
        }
        double w = omega;
        double t = torque;
        if (!limits_.inside(w, t)) {
            out.clamped = true;
            w = std::clamp(w, limits_.min_speed, limits_.max_speed);
            t = std::min(t, limits_.max_torque_at(w));
        }
        const double power_kw = w * t * 1e-3;
        out.rate = bsfc(w, t) * power_kw / 3600.0 * 1e-3;
        return out;
    }

private:
    Grid2D bsfc_;
    EngineLimits limits_;
    double lhv_;
};

/// Analytic Willans-style efficiency surface used to synthesize the bundled BSFC asset:
/// peak 38 % near 2500 rpm and ~185 N·m.
inline double synthetic_engine_efficiency(double omega, double torque)
{
    constexpr double peak = 0.38;
    const double rpm = units::radps_to_rpm(omega);
    const double speed_factor = 1.0 - 0.35 * std::pow((rpm - 2500.0) / 2700.0, 2);
    auto load_factor = [](double t) {
        const double willans = 1.25 * t / (t + 45.0);
        const double over = std::max(0.0, (t - 180.0) / 90.0);
        return willans * (1.0 - 0.5 * over * over);
    };
    // normalise so the surface peaks at exactly `peak`
    double best = 0.0;
    for (double t = 150.0; t <= 230.0; t += 0.05) {
        best = std::max(best, load_factor(t));
    }
    return std::max(0.02, peak * speed_factor * load_factor(std::max(torque, 0.0)) / best);
}

inline Grid2D synthesize_bsfc_grid(double lhv = units::gasoline_lhv)
{
    std::vector<double> omegas;
    for (double rpm = 1000.0; rpm <= 5200.0 + 1e-9; rpm += 200.0) {
        omegas.push_back(units::rpm_to_radps(rpm));
    }
    std::vector<double> torques{5.0};
    for (double t = 10.0; t <= 280.0 + 1e-9; t += 10.0) {
        torques.push_back(t);
    }
    std::vector<double> values;
    values.reserve(omegas.size() * torques.size());
    for (double w : omegas) {
        for (double t : torques) {
            values.push_back(3.6e6 / (synthetic_engine_efficiency(w, t) * lhv * 1e-3));
        }
    }
    return Grid2D(std::move(omegas), std::move(torques), std::move(values));
}

inline EngineMap load_engine_map(const std::string& path = data_path("maps/engine_bsfc.csv"))
{
    return EngineMap(load_grid_csv(path));
}

struct OolPoint {
    double omega = 0.0;
    double torque = 0.0;
    bool engine_on = false;
};

/// Minimum-BSFC (omega, torque) per engine power, precomputed on a uniform power grid.
class OperatingLine {
public:
    explicit OperatingLine(const EngineMap& map, double power_step = 500.0) : max_power_(map.limits().max_power)
    {
        const auto n = static_cast<std::size_t>(std::lround(max_power_ / power_step)) + 1;
        powers_ = linspace(0.0, max_power_, n);
        omegas_.assign(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) {
            omegas_[i] = best_speed(map, powers_[i]);
        }
        omegas_[0] = omegas_[1];
    }

    [[nodiscard]] double max_power() const noexcept { return max_power_; }
    [[nodiscard]] const std::vector<double>& powers() const noexcept { return powers_; }
    [[nodiscard]] const std::vector<double>& speeds() const noexcept { return omegas_; }

    /// P = 0 returns the engine-off sentinel; P above the rated power throws.
    [[nodiscard]] OolPoint at(double power) const
    {
        if (power < 0.0) {
            throw DomainError("operating line: negative engine power");
        }
        if (power > max_power_ * (1.0 + 1e-12)) {
            throw SaturationError("operating line: engine power above rated maximum");
        }
        if (power == 0.0) {
            return {};
        }
        const auto i = bracket(powers_, power);
        const double w = (power - powers_[i]) / (powers_[i + 1] - powers_[i]);
        const double omega = omegas_[i] + w * (omegas_[i + 1] - omegas_[i]);
        return {omega, power / omega, true};
    }

    /// Dense scan of the iso-power line followed by golden-section refinement.
    static double best_speed(const EngineMap& map, double power)
    {
        const auto& lim = map.limits();
        auto cost = [&](double w) {
            const double t = power / w;
            if (t > lim.max_torque_at(w) + 1e-9) {
                return std::numeric_limits<double>::infinity();
            }
            return map.bsfc(w, t);
        };
        constexpr int scan = 4000;
        double best_w = lim.max_speed;
        double best_c = std::numeric_limits<double>::infinity();
        const double step = (lim.max_speed - lim.min_speed) / scan;
        for (int k = 0; k <= scan; ++k) {
            const double w = lim.min_speed + step * k;
            const double c = cost(w);
            if (c < best_c) {
                best_c = c;
                best_w = w;
            }
        }
        double a = std::max(lim.min_speed, best_w - step);
        double b = std::min(lim.max_speed, best_w + step);
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 60; ++it) {
            const double x1 = b - g * (b - a);
            const double x2 = a + g * (b - a);
            if (cost(x1) <= cost(x2)) {
                b = x2;
            } else {
                a = x1;
            }
        }
        const double refined = 0.5 * (a + b);
        return cost(refined) <= best_c ? refined : best_w;
    }

private:
    double max_power_;
    std::vector<double> powers_;
    std::vector<double> omegas_;
};

} // namespace hevlab::powertrain
