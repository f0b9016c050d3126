#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "hevlab/common/errors.hpp"
#include "hevlab/common/units.hpp"
#include "hevlab/powertrain/engine_map.hpp"

namespace hevlab::powertrain {

/// Fitted constants of the transient (mean-value) engine model.
struct EngineCalibration {
    // intake pressure fit p_int = (c1*mdot_at + c3*omega) / (c2*omega)
    double c1 = 2.7e8;
    double c2 = 1.0;
    double c3 = 2.5e4;
    // volumetric efficiency eta = s1 + s2*w + s3*w^3 + s4*p_int
    double s1 = 0.35;
    double s2 = 1.2e-3;
    double s3 = -2.0e-9;
    double s4 = 2.0e-6;

    double C_DV = 8.0e-4;
    double gamma_gas = 1.4;
    double R_m = 287.0;
    double T0 = 298.0;
    double p0 = 101325.0;
    double L_th = 14.7;
    double LHV = units::gasoline_lhv;
    double mu = 0.3;
    double xi = 2.0;
    double theta0 = 0.05;
    double V_int = 3.0e-3;
    double epsilon_p = 1.1;
    double T_cool_target = 363.0;
    double T_cool_init = 293.0;
    double m_ICE = 80.0;
    double C_ICE = 500.0;

    // EGR flow mdot = k_egr * valve * max(p_exh - p_int, 0)
    double k_egr = 1.67e-6;
    // heat split: exhaust fraction of fuel power, radiator conductance, thermostat gain above target
    double exh_heat_fraction = 0.3;
    double h_rad = 30.0;
    double h_thermostat = 5000.0;
    double T_boil_guard = 390.0;

    // ECU feed-forward: indicated efficiency and friction torque t0 + t1*omega
    double eta_indicated = 0.40;
    double friction_t0 = 12.0;
    double friction_t1 = 0.02;
    double throttle_tau = 0.3;
    double temp_lag_tau = 20.0;

    void validate() const
    {
        for (double v : {c1, c2, c3, C_DV, gamma_gas, R_m, T0, p0, L_th, LHV, mu, xi, V_int, epsilon_p,
                         T_cool_target, T_cool_init, m_ICE, C_ICE}) {
            if (!(v > 0.0 && std::isfinite(v))) {
                throw ValidationError("engine calibration constants must be positive");
            }
        }
        if (epsilon_p > 3.0) {
            throw ValidationError("exhaust/intake pressure ratio must not exceed 3");
        }
        if (!(T_cool_target > T_cool_init)) {
            throw ValidationError("coolant target must exceed cold reference temperature");
        }
    }

    [[nodiscard]] double critical_pressure_ratio() const
    {
        return std::pow(2.0 / (gamma_gas + 1.0), gamma_gas / (gamma_gas - 1.0));
    }
};

/// Transient engine variables; units are SI (temperatures K, pressures Pa, flows kg/s).
struct EngineState {
    double omega = 0.0;
    double torque_cmd = 0.0;
    double throttle = 0.0;
    double spark_adv = 0.0;
    double fuel_timing = 0.0;
    double egr_valve = 0.0;
    double lambda_afr = 1.0;
    double T_int = 298.0;
    double T_exh = 298.0;
    double p_int = 101325.0;
    double p_exh = 101325.0;
    double mdot_at = 0.0;
    double mdot_egr = 0.0;
    double mdot_ac = 0.0;
    double eta_vol = 0.0;
    double T_cool = 293.0;
    double T_cool_dyn = 293.0;
    double valve_timing = 0.0;
    double T_egr = 298.0;
    double T_oil = 293.0;
    double p_oil = 0.0;
    double mdot_fuel_cmd = 0.0; ///< injected fuel command from the ECU
    double mdot_fuel = 0.0;     ///< dynamic-model fuel rate (cold enrichment included)
    double load = 0.0;          ///< torque / full-load torque
    bool on = false;

    static EngineState cold(const EngineCalibration& cal)
    {
        EngineState s;
        s.T_int = s.T_exh = s.T_egr = cal.T0;
        s.T_cool = s.T_cool_dyn = s.T_oil = cal.T_cool_init;
        s.p_int = s.p_exh = cal.p0;
        s.throttle = cal.theta0;
        return s;
    }
};

/// Compressible orifice flow through the throttle, A(theta) = 1 - cos(theta - theta0).
/// Below the critical pressure ratio the flow is held at its choked value.
inline double throttle_airflow(double theta, double p_int, const EngineCalibration& cal)
{
    if (p_int > cal.p0 * (1.0 + 1e-12) || p_int < 0.0) {
        throw DomainError("throttle_airflow: intake pressure outside [0, p0]");
    }
    const double g = cal.gamma_gas;
    const double area = 1.0 - std::cos(theta - cal.theta0);
    const double ratio = std::max(p_int / cal.p0, cal.critical_pressure_ratio());
    const double p_eff = ratio * cal.p0;
    const double bracket = std::max(0.0, 1.0 - std::pow(ratio, (g - 1.0) / g));
    return cal.C_DV * std::sqrt(g) / std::sqrt(cal.R_m * cal.T0) * area * p_eff
           * std::sqrt(2.0 * g / (g - 1.0) * bracket);
}

/// Throttle angle that passes `mdot` at intake pressure `p_int`; saturates wide open (A = 1).
inline double throttle_for_airflow(double mdot, double p_int, const EngineCalibration& cal)
{
    const double full = throttle_airflow(cal.theta0 + units::pi / 2.0, p_int, cal);
    const double area = full > 0.0 ? std::clamp(mdot / full, 0.0, 1.0) : 1.0;
    return cal.theta0 + std::acos(1.0 - area);
}

/// Intake manifold pressure regression, clipped below ambient.
inline double intake_pressure(double mdot_at, double omega, const EngineCalibration& cal)
{
    if (omega <= 0.0) {
        return cal.p0;
    }
    const double p = (cal.c1 * mdot_at + cal.c3 * omega) / (cal.c2 * omega);
    return std::clamp(p, 0.0, 0.99 * cal.p0);
}

struct ManifoldOutputs {
    double p_int = 0.0;
    double p_exh = 0.0;
    double eta_vol = 0.0;
    double mdot_egr = 0.0;
    double mdot_ac = 0.0;
    double lambda_afr = std::numeric_limits<double>::quiet_NaN();
    bool engine_off = false;
};

/// Previous-step manifold filling state; defaults mean "steady" (no storage term).
struct ManifoldHistory {
    double p_int = std::numeric_limits<double>::quiet_NaN();
    double T_int = std::numeric_limits<double>::quiet_NaN();
    double dt = 1.0;
};

/// Pressures, volumetric efficiency, EGR and cylinder charge flows for the current air-path state.
/// lambda is the fresh cylinder air over the stoichiometric need of the injected fuel; a zero
/// injection command takes the engine-off branch.
inline ManifoldOutputs manifold_dynamics(const EngineState& s, const EngineCalibration& cal,
                                         const ManifoldHistory& prev = {})
{
    ManifoldOutputs out;
    out.p_int = intake_pressure(s.mdot_at, s.omega, cal);
    out.p_exh = cal.epsilon_p * out.p_int;
    const double w = s.omega;
    out.eta_vol = cal.s1 + cal.s2 * w + cal.s3 * w * w * w + cal.s4 * out.p_int;
    out.mdot_egr = cal.k_egr * std::clamp(s.egr_valve, 0.0, 1.0) * std::max(out.p_exh - out.p_int, 0.0);
    double storage = 0.0;
    if (std::isfinite(prev.p_int) && std::isfinite(prev.T_int) && prev.dt > 0.0) {
        const double now = out.p_int * cal.V_int / (cal.R_m * s.T_int);
        const double before = prev.p_int * cal.V_int / (cal.R_m * prev.T_int);
        storage = (now - before) / prev.dt;
    }
    out.mdot_ac = std::max(0.0, s.mdot_at + out.mdot_egr - storage);
    const double denom = cal.L_th * s.mdot_fuel_cmd;
    if (!(denom > 0.0) || s.omega <= 0.0) {
        out.engine_off = true;
        return out;
    }
    out.lambda_afr = std::max(out.mdot_ac - out.mdot_egr, 0.0) / denom;
    return out;
}

/// Cold-start enrichment multiplier; 1 once the coolant reaches its target.
inline double cold_enrichment(double T_cool_dyn, const EngineCalibration& cal)
{
    const double x = (cal.T_cool_target - T_cool_dyn) / (cal.T_cool_target - cal.T_cool_init);
    if (x <= 0.0) {
        return 1.0;
    }
    return 1.0 + cal.mu * std::pow(x, cal.xi);
}

inline double dynamic_fuel_rate(const EngineState& s, const EngineCalibration& cal)
{
    if (!(s.lambda_afr > 0.0)) {
        throw DomainError("dynamic_fuel_rate: air-fuel ratio must be positive");
    }
    return s.mdot_at / (s.lambda_afr * cal.L_th) * cold_enrichment(s.T_cool_dyn, cal);
}

struct HeatFlows {
    double exhaust = 0.0;
    double radiator = 0.0;
    double cabin = 0.0;

    [[nodiscard]] double total() const noexcept { return exhaust + radiator + cabin; }
};

inline HeatFlows heat_flows(const EngineState& s, const EngineCalibration& cal)
{
    HeatFlows q;
    q.exhaust = cal.exh_heat_fraction * s.mdot_fuel * cal.LHV;
    q.radiator = cal.h_rad * (s.T_cool_dyn - cal.T0)
                 + cal.h_thermostat * std::max(0.0, s.T_cool_dyn - cal.T_cool_target);
    return q;
}

/// Explicit Euler step of the coolant energy balance, clamped below the boiling guard.
inline double coolant_step(const EngineState& s, double p_ice, const HeatFlows& heat, double dt,
                           const EngineCalibration& cal)
{
    const double net = (s.mdot_fuel * cal.LHV - p_ice) - heat.total();
    const double t = s.T_cool_dyn + dt * net / (cal.m_ICE * cal.C_ICE);
    return std::clamp(t, 250.0, cal.T_boil_guard);
}

/// ECU schedules for the actuator/feature channels that do not enter the fuel equation.
struct EcuSchedule {
    double egr_valve = 0.0;
    double spark_adv = 0.0;
    double fuel_timing = 0.0;
    double valve_timing = 0.0;
    double lambda_cmd = 1.0;
};

inline EcuSchedule ecu_schedule(double omega, double load)
{
    EcuSchedule e;
    const double rpm = units::radps_to_rpm(omega);
    e.egr_valve = std::clamp(0.35 * (1.0 - std::abs(load - 0.45) / 0.45), 0.0, 1.0);
    e.spark_adv = 8.0 + 0.006 * rpm - 12.0 * load;
    e.fuel_timing = 280.0 + 0.02 * rpm - 40.0 * load;
    e.valve_timing = 10.0 + 25.0 * load + 0.003 * rpm;
    e.lambda_cmd = 1.0 - 0.8 * std::max(0.0, load - 0.85);
    return e;
}

/// Fuel the ECU meters for a brake operating point: indicated power over indicated efficiency,
/// divided by the commanded air-fuel ratio.
inline double ecu_fuel_command(double omega, double torque, double lambda_cmd, const EngineCalibration& cal)
{
    const double friction = cal.friction_t0 + cal.friction_t1 * omega;
    const double indicated = omega * (torque + friction);
    return indicated / (cal.eta_indicated * cal.LHV) / lambda_cmd;
}

/// Warm steady-state dynamic-model fuel rate at a brake operating point.
inline double steady_dynamic_fuel(double omega, double torque, const EngineLimits& lim, const EngineCalibration& cal)
{
    if (torque <= 0.0 || omega <= 0.0) {
        return 0.0;
    }
    const double load = torque / std::max(lim.max_torque_at(omega), 1e-9);
    return ecu_fuel_command(omega, torque, ecu_schedule(omega, load).lambda_cmd, cal);
}

namespace detail {

inline double first_order(double prev, double target, double dt, double tau)
{
    return target + (prev - target) * std::exp(-dt / tau);
}

/// Air mass flow consistent with both the throttle equation and the intake pressure fit.
inline double solve_air_path(double theta, double omega, const EngineCalibration& cal)
{
    const double hi_p = 0.99 * cal.p0;
    double hi = std::max((hi_p * cal.c2 * omega - cal.c3 * omega) / cal.c1, 0.0);
    double lo = 0.0;
    auto g = [&](double m) { return throttle_airflow(theta, intake_pressure(m, omega, cal), cal) - m; };
    if (g(hi) >= 0.0) {
        return hi;
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Advances the transient engine by one step toward the brake point (omega, torque). The
/// coolant temperature uses the heat released during the step.
inline EngineState advance_engine(const EngineState& prev, double omega, double torque, const EngineLimits& lim,
                                  const EngineCalibration& cal, double dt)
{
    EngineState s = prev;
    const bool on = omega > 0.0 && torque > 0.0;
    s.on = on;
    const double warm_bias = std::clamp((prev.T_cool - cal.T0) / (cal.T_cool_target - cal.T0), 0.0, 1.0);
    if (on) {
        s.omega = omega;
        s.torque_cmd = torque;
        s.load = torque / std::max(lim.max_torque_at(omega), 1e-9);
        const auto ecu = ecu_schedule(omega, s.load);
        s.egr_valve = ecu.egr_valve * warm_bias;
        s.spark_adv = ecu.spark_adv;
        s.fuel_timing = ecu.fuel_timing;
        s.valve_timing = ecu.valve_timing;
        const double fuel_req = ecu_fuel_command(omega, torque, 1.0, cal);
        const double air_target = fuel_req * cal.L_th;
        s.mdot_fuel_cmd = fuel_req / ecu.lambda_cmd;
        const double theta_cmd = throttle_for_airflow(air_target, intake_pressure(air_target, omega, cal), cal);
        const double theta_from = prev.on ? prev.throttle : cal.theta0;
        s.throttle = detail::first_order(theta_from, theta_cmd, dt, cal.throttle_tau);
        s.mdot_at = detail::solve_air_path(s.throttle, omega, cal);
        const double target_exh = 650.0 + 350.0 * s.load;
        s.T_exh = detail::first_order(prev.T_exh, target_exh, dt, 5.0);
        s.p_oil = 1.5e5 + 600.0 * omega;
    } else {
        s.omega = 0.0;
        s.torque_cmd = 0.0;
        s.load = 0.0;
        s.egr_valve = 0.0;
        s.throttle = cal.theta0;
        s.mdot_at = 0.0;
        s.mdot_fuel_cmd = 0.0;
        s.T_exh = detail::first_order(prev.T_exh, cal.T0, dt, 60.0);
        s.p_oil = 0.0;
    }
    s.T_int = detail::first_order(prev.T_int, cal.T0 + 0.12 * (prev.T_cool - cal.T0) + 5.0 * s.load, dt,
                                  cal.temp_lag_tau);
    s.T_egr = detail::first_order(prev.T_egr, s.T_int + 0.4 * (s.T_exh - s.T_int) * (s.egr_valve > 0.0 ? 1.0 : 0.2),
                                  dt, cal.temp_lag_tau);
    s.T_oil = detail::first_order(prev.T_oil, prev.T_cool + 8.0 * s.load, dt, 2.0 * cal.temp_lag_tau);

    const auto man = manifold_dynamics(s, cal, {prev.on ? prev.p_int : std::numeric_limits<double>::quiet_NaN(),
                                                prev.T_int, dt});
    s.p_int = on ? man.p_int : cal.p0;
    s.p_exh = on ? man.p_exh : cal.p0;
    s.eta_vol = on ? man.eta_vol : 0.0;
    s.mdot_egr = on ? man.mdot_egr : 0.0;
    s.mdot_ac = on ? man.mdot_ac : 0.0;
    if (on && !man.engine_off && man.lambda_afr > 0.0) {
        s.lambda_afr = man.lambda_afr;
        s.mdot_fuel = dynamic_fuel_rate(s, cal);
    } else {
        s.lambda_afr = 1.0;
        s.mdot_fuel = 0.0;
    }

    const double p_ice = on ? omega * torque : 0.0;
    s.T_cool_dyn = coolant_step(s, p_ice, heat_flows(s, cal), dt, cal);
    s.T_cool = s.T_cool_dyn;
    return s;
}

} // namespace hevlab::powertrain
