#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "hevlab/common/errors.hpp"
#include "hevlab/powertrain/mvem.hpp"

namespace hevlab::calib {

/// Every recorded engine channel. The fuel pool and coolant pool are subsets.
enum class Feature {
    mdot_ac,
    p_exh,
    theta,
    torque_cmd,
    T_cool,
    mdot_egr,
    egr_valve,
    omega,
    mdot_at,
    VT,
    eta_vol,
    p_int,
    lambda_afr,
    p_oil,
    T_int,
    T_egr,
    T_oil,
    T_cool_dyn,
};

inline constexpr std::size_t feature_count = 18;

inline constexpr std::array<std::string_view, feature_count> feature_names{
    "mdot_ac", "p_exh", "theta", "torque_cmd", "T_cool", "mdot_egr", "egr_valve", "omega", "mdot_at",
    "VT", "eta_vol", "p_int", "lambda_afr", "p_oil", "T_int", "T_egr", "T_oil", "T_cool_dyn"};

inline std::string_view name(Feature f) { return feature_names[static_cast<std::size_t>(f)]; }

inline Feature parse_feature(std::string_view s)
{
    for (std::size_t k = 0; k < feature_count; ++k) {
        if (feature_names[k] == s) {
            return static_cast<Feature>(k);
        }
    }
    throw ValidationError("unknown feature '" + std::string(s) + "'");
}

/// Candidate inputs for the fuel correction, in the order used to break importance ties.
inline const std::vector<Feature>& fuel_pool()
{
    static const std::vector<Feature> pool{Feature::mdot_ac, Feature::p_exh,    Feature::theta,     Feature::torque_cmd,
                                           Feature::T_cool,  Feature::mdot_egr, Feature::egr_valve, Feature::omega,
                                           Feature::mdot_at, Feature::VT,       Feature::eta_vol,   Feature::p_int,
                                           Feature::lambda_afr, Feature::p_oil, Feature::T_int};
    return pool;
}

inline const std::vector<Feature>& coolant_inputs()
{
    static const std::vector<Feature> in{Feature::omega, Feature::T_int, Feature::T_egr, Feature::T_oil,
                                         Feature::T_cool_dyn};
    return in;
}

/// Fuel-model inputs after importance ranking and correlation pruning.
inline const std::vector<Feature>& default_fuel_inputs()
{
    static const std::vector<Feature> in{Feature::mdot_ac, Feature::theta,     Feature::T_cool,
                                         Feature::mdot_egr, Feature::egr_valve, Feature::omega};
    return in;
}

using FeatureRow = std::array<double, feature_count>;

inline FeatureRow extract(const powertrain::EngineState& s)
{
    FeatureRow r{};
    auto set = [&r](Feature f, double v) { r[static_cast<std::size_t>(f)] = v; };
    set(Feature::mdot_ac, s.mdot_ac);
    set(Feature::p_exh, s.p_exh);
    set(Feature::theta, s.throttle);
    set(Feature::torque_cmd, s.torque_cmd);
    set(Feature::T_cool, s.T_cool);
    set(Feature::mdot_egr, s.mdot_egr);
    set(Feature::egr_valve, s.egr_valve);
    set(Feature::omega, s.omega);
    set(Feature::mdot_at, s.mdot_at);
    set(Feature::VT, s.valve_timing);
    set(Feature::eta_vol, s.eta_vol);
    set(Feature::p_int, s.p_int);
    set(Feature::lambda_afr, s.lambda_afr);
    set(Feature::p_oil, s.p_oil);
    set(Feature::T_int, s.T_int);
    set(Feature::T_egr, s.T_egr);
    set(Feature::T_oil, s.T_oil);
    set(Feature::T_cool_dyn, s.T_cool_dyn);
    return r;
}

inline double get(const FeatureRow& r, Feature f) { return r[static_cast<std::size_t>(f)]; }

} // namespace hevlab::calib
