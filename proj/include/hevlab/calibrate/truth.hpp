#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "hevlab/calibrate/features.hpp"
#include "hevlab/common/interp.hpp"
#include "hevlab/cycle.hpp"
#include "hevlab/powertrain/simulation.hpp"

namespace hevlab::calib {

/// Known error injected into the physical model to fabricate "measured" traces.
/// Fuel: multiplicative bias in engine speed and load, a first-order lag, relative Gaussian noise.
/// Coolant: constant offset plus a gain on low-pass-filtered load, absolute Gaussian noise.
struct TruthGeneratorSpec {
    Table1D fuel_bias_omega{{100.0, 300.0, 550.0}, {1.18, 1.06, 1.12}};
    Table1D fuel_bias_load{{0.0, 0.5, 1.0}, {1.15, 1.0, 1.08}};
    double fuel_lag = 0.3;   ///< y_k = a*y_{k-1} + (1-a)*biased_k
    double fuel_noise = 0.02; ///< sigma relative to the signal
    double cool_offset = -1.5;
    double cool_load_gain = 4.0;
    double cool_lag = 0.9;
    double cool_noise = 0.1; ///< K
    std::uint64_t seed = 2024;

    static TruthGeneratorSpec identity()
    {
        TruthGeneratorSpec s;
        s.fuel_bias_omega = Table1D({0.0, 1.0}, {1.0, 1.0});
        s.fuel_bias_load = Table1D({0.0, 1.0}, {1.0, 1.0});
        s.fuel_lag = 0.0;
        s.fuel_noise = 0.0;
        s.cool_offset = 0.0;
        s.cool_load_gain = 0.0;
        s.cool_lag = 0.0;
        s.cool_noise = 0.0;
        return s;
    }
};

/// Physical-model channels per step, plus the fabricated measurements.
struct TruthTrace {
    std::vector<FeatureRow> features;
    std::vector<double> load;
    std::vector<char> engine_on;
    std::vector<double> mdot_d; ///< transient model, kg/s
    std::vector<double> mdot_q; ///< quasi-static map, kg/s
    std::vector<double> mdot_a; ///< average of the two
    std::vector<double> mdot_r; ///< "measured"
    std::vector<double> T_cd;   ///< physical coolant model, K
    std::vector<double> T_r;    ///< "measured"

    [[nodiscard]] std::size_t size() const noexcept { return mdot_a.size(); }
};

inline double averaged_fuel(double mdot_d, double mdot_q)
{
    if (mdot_d < 0.0 || mdot_q < 0.0) {
        throw DomainError("averaged_fuel: fuel rates must be non-negative");
    }
    return 0.5 * (mdot_d + mdot_q);
}

/// Applies the recipe to physical traces already stored in `t` (mdot_a, load, engine_on, T_cd,
/// omega feature) and fills mdot_r and T_r.
inline void apply_perturbation(TruthTrace& t, const TruthGeneratorSpec& spec)
{
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    const std::size_t n = t.size();
    t.mdot_r.assign(n, 0.0);
    t.T_r.assign(n, 0.0);
    double lagged = 0.0;
    double lagged_load = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double noise_f = n01(rng);
        const double noise_t = n01(rng);
        if (t.engine_on[k] != 0) {
            const double omega = get(t.features[k], Feature::omega);
            const double biased = t.mdot_a[k] * spec.fuel_bias_omega(omega) * spec.fuel_bias_load(t.load[k]);
            lagged = spec.fuel_lag * lagged + (1.0 - spec.fuel_lag) * biased;
            t.mdot_r[k] = std::max(0.0, lagged * (1.0 + spec.fuel_noise * noise_f));
        } else {
            lagged = 0.0;
        }
        lagged_load = spec.cool_lag * lagged_load + (1.0 - spec.cool_lag) * t.load[k];
        t.T_r[k] = t.T_cd[k] + spec.cool_offset + spec.cool_load_gain * lagged_load + spec.cool_noise * noise_t;
    }
}

/// Drives the plant over `cyc` with a load-following schedule (engine above 8 kW demand, extra
/// charging below 0.30 SOC) and records physical channels and fabricated measurements.
inline TruthTrace generate_truth(const powertrain::Plant& plant, const cycle::DriveCycle& cyc,
                                 const TruthGeneratorSpec& spec, double soc0 = 0.34)
{
    const double p_max = plant.max_engine_power();
    auto schedule = [&](std::size_t, const powertrain::PowertrainState& s, double p_dem) {
        powertrain::Split split;
        if (p_dem > 8e3 || (p_dem > 0.0 && s.battery.soc < 0.30)) {
            const double charge = s.battery.soc < 0.30 ? 8e3 : 0.0;
            split.p_ice = std::min(p_max, p_dem + charge);
        }
        split.p_bat = p_dem - split.p_ice;
        return split;
    };
    const auto sim = powertrain::simulate(plant, cyc, soc0, schedule);
    TruthTrace t;
    const auto& map = *plant.engine;
    for (const auto& row : sim.trace) {
        const auto& e = row.engine;
        t.features.push_back(extract(e));
        t.load.push_back(e.load);
        t.engine_on.push_back(row.engine_on ? 1 : 0);
        const double q = row.engine_on ? map.quasi_static_fuel(e.omega, e.torque_cmd).rate : 0.0;
        t.mdot_d.push_back(e.mdot_fuel);
        t.mdot_q.push_back(q);
        t.mdot_a.push_back(averaged_fuel(e.mdot_fuel, q));
        t.T_cd.push_back(e.T_cool_dyn);
    }
    apply_perturbation(t, spec);
    return t;
}

} // namespace hevlab::calib
