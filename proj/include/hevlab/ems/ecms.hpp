#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hevlab/common/errors.hpp"
#include "hevlab/powertrain/simulation.hpp"

namespace hevlab::ems {

using powertrain::soc_derivative;

inline constexpr double ef_min = 0.5;
inline constexpr double ef_max = 2.0;

/// Highest brake efficiency on the BSFC grid.
inline double peak_engine_efficiency(const powertrain::EngineMap& map)
{
    double best = 0.0;
    const auto& g = map.grid();
    for (double w : g.xs()) {
        for (double t : g.ys()) {
            if (t > 0.0 && map.limits().inside(w, t)) {
                best = std::max(best, map.efficiency(w, t));
            }
        }
    }
    return best;
}

struct EmsContext {
    double soc_ref = 0.35;
    double soc_min = 0.20;
    double soc_max = 0.80;
    double tolerance = 0.005;   ///< terminal SOC window half-width
    double eta_ice_est = 0.38;  ///< engine efficiency that normalizes the equivalence factor
    int grid_points = 101;      ///< battery-power candidates per step
    double dt = 1.0;

    void validate() const
    {
        if (!(soc_min < soc_ref && soc_ref < soc_max)) {
            throw ValidationError("EmsContext: need soc_min < soc_ref < soc_max");
        }
        if (!(eta_ice_est > 0.0)) {
            throw ValidationError("EmsContext: eta_ice_est must be positive");
        }
        if (grid_points < 2) {
            throw ValidationError("EmsContext: grid_points must be at least 2");
        }
        if (!(dt > 0.0)) {
            throw ValidationError("EmsContext: dt must be positive");
        }
    }
};

inline EmsContext make_context(const powertrain::Plant& plant, double soc_ref)
{
    EmsContext c;
    c.soc_ref = soc_ref;
    c.soc_min = plant.battery.soc_min();
    c.soc_max = plant.battery.soc_max();
    c.eta_ice_est = peak_engine_efficiency(*plant.engine);
    c.validate();
    return c;
}

/// Equivalent fuel rate, kg/s: engine fuel at P_dem - p_bat on the operating line plus the
/// electrical power priced at lambda / (eta * LHV). Infeasible splits cost +infinity.
/// Without traction demand the engine stays off and any p_bat in [P_dem, 0] is allowed, the
/// remainder going to the friction brakes.
inline double hamiltonian(const powertrain::Plant& plant, double p_bat, double lambda, double p_dem, double eta_ice_est)
{
    const double electric = lambda * p_bat / (eta_ice_est * plant.engine->lhv());
    if (p_dem <= 0.0) {
        if (p_bat < p_dem - 1e-9 || p_bat > 1e-9) {
            return std::numeric_limits<double>::infinity();
        }
        return electric;
    }
    const double p_ice = p_dem - p_bat;
    if (p_ice < -1e-9 || p_ice > plant.max_engine_power() + 1e-9) {
        return std::numeric_limits<double>::infinity();
    }
    return plant.fuel.rate(std::max(p_ice, 0.0)) + electric;
}

struct PowerInterval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool empty() const noexcept { return lo > hi; }
};

/// Battery powers allowed this step: battery limits, the next-step SOC window, and the engine
/// envelope (0 <= P_dem - p_bat <= P_ice_max). Without traction demand: [max(P_dem, lo), 0].
inline PowerInterval admissible_battery_power(const powertrain::Plant& plant, const powertrain::BatteryState& bat,
                                              double p_dem, double dt)
{
    const auto [slo, shi] = powertrain::soc_feasible_power(bat, dt);
    if (p_dem <= 0.0) {
        return {std::max(slo, p_dem), std::min(shi, 0.0)};
    }
    return {std::max(slo, p_dem - plant.max_engine_power()), std::min(shi, p_dem)};
}

struct EcmsDecision {
    double p_bat = 0.0;
    double p_ice = 0.0;
    double cost = 0.0; ///< Hamiltonian at the decision, kg/s
};

/// Candidate battery powers: `points` evenly spaced over the interval, plus zero and P_dem
/// when they are admissible.
inline std::vector<double> candidate_grid(const PowerInterval& iv, double p_dem, int points)
{
    std::vector<double> c;
    c.reserve(static_cast<std::size_t>(points) + 2);
    if (iv.hi - iv.lo <= 0.0) {
        c.push_back(iv.lo);
        return c;
    }
    for (int i = 0; i < points; ++i) {
        c.push_back(iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / (points - 1));
    }
    for (double extra : {0.0, p_dem}) {
        if (extra >= iv.lo && extra <= iv.hi) {
            c.push_back(extra);
        }
    }
    return c;
}

namespace detail {

inline void consider(EcmsDecision& best, bool& found, double p, double h, double p_dem)
{
    if (!std::isfinite(h)) {
        return;
    }
    const double tie = 1e-12 * std::max(std::abs(h), std::abs(best.cost));
    if (!found || h < best.cost - tie || (std::abs(h - best.cost) <= tie && std::abs(p) < std::abs(best.p_bat))) {
        best = {p, std::max(0.0, p_dem - p), h};
        found = true;
    }
}

} // namespace detail

/// Minimizes the Hamiltonian over the candidate grid, then over `refine` points spanning the two
/// grid cells around each of the three lowest local minima on the grid (0 disables). Ties go to
/// the smaller |p_bat|.
inline EcmsDecision ecms_step(const powertrain::Plant& plant, const powertrain::BatteryState& bat, double lambda,
                              double p_dem, const EmsContext& ctx, int points = -1, int refine = 21)
{
    const int n = points > 0 ? points : ctx.grid_points;
    if (n < 2) {
        throw ValidationError("ecms_step: grid needs at least 2 points");
    }
    const auto iv = admissible_battery_power(plant, bat, p_dem, ctx.dt);
    if (iv.empty()) {
        throw ConstraintError("ecms_step: no admissible battery power (demand exceeds both sources)");
    }
    EcmsDecision best;
    best.cost = std::numeric_limits<double>::infinity();
    bool found = false;
    const auto grid = candidate_grid(iv, p_dem, n);
    std::vector<double> h(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        h[i] = hamiltonian(plant, grid[i], lambda, p_dem, ctx.eta_ice_est);
        detail::consider(best, found, grid[i], h[i], p_dem);
    }
    if (!found) {
        throw ConstraintError("ecms_step: every candidate split is infeasible");
    }
    if (refine > 1 && iv.hi > iv.lo) {
        // the evenly spaced part of the grid comes first
        const auto m = static_cast<std::size_t>(n);
        std::vector<std::size_t> minima;
        for (std::size_t i = 0; i < m; ++i) {
            const double left = i > 0 ? h[i - 1] : std::numeric_limits<double>::infinity();
            const double right = i + 1 < m ? h[i + 1] : std::numeric_limits<double>::infinity();
            if (std::isfinite(h[i]) && h[i] <= left && h[i] <= right) {
                minima.push_back(i);
            }
        }
        std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return h[a] < h[b]; });
        minima.resize(std::min<std::size_t>(minima.size(), 3));
        const double step = (iv.hi - iv.lo) / (n - 1);
        std::vector<double> centres{best.p_bat};
        for (std::size_t i : minima) {
            centres.push_back(grid[i]);
        }
        for (double c : centres) {
            const double a = std::max(iv.lo, c - step);
            const double b = std::min(iv.hi, c + step);
            for (int i = 0; i < refine; ++i) {
                const double p = a + (b - a) * static_cast<double>(i) / (refine - 1);
                detail::consider(best, found, p, hamiltonian(plant, p, lambda, p_dem, ctx.eta_ice_est), p_dem);
            }
        }
    }
    if (best.p_ice < 1e-9) {
        best.p_ice = 0.0;
    }
    return best;
}

/// lambda = -LHV * eta / (3600 * C[Ah] * U_oc) * p, with p the co-state of fractional SOC in kg.
inline double ef_from_costate(double costate, double eta_ice_est, const powertrain::BatteryState& bat, double lhv)
{
    if (!(bat.u_oc > 0.0)) {
        throw DomainError("ef_from_costate: U_oc must be positive");
    }
    return -lhv * eta_ice_est / (3600.0 * bat.capacity_ah * bat.u_oc) * costate;
}

inline double costate_from_ef(double lambda, double eta_ice_est, const powertrain::BatteryState& bat, double lhv)
{
    if (!(bat.u_oc > 0.0) || !(eta_ice_est > 0.0)) {
        throw DomainError("costate_from_ef: U_oc and eta must be positive");
    }
    return -lambda * 3600.0 * bat.capacity_ah * bat.u_oc / (lhv * eta_ice_est);
}

struct PiGains {
    double kp = 5.0;
    double ki = 0.1;
    double lambda0 = 1.2;
    double integral = 0.0; ///< accumulated SOC error, s
    double lo = ef_min;
    double hi = ef_max;

    void validate() const
    {
        if (!(kp >= 0.0 && ki >= 0.0)) {
            throw ValidationError("PiGains: gains must be non-negative");
        }
        if (!(lo < hi)) {
            throw ValidationError("PiGains: need lo < hi");
        }
    }
};

/// PI feedback on SOC tracking error. The integral is frozen while the output sits on a clamp
/// and the new error would push it further out.
inline double aecms_update(PiGains& g, double soc, double soc_ref, double dt)
{
    if (!(dt > 0.0)) {
        throw DomainError("aecms_update: dt must be positive");
    }
    const double e = soc_ref - soc;
    const double trial = g.integral + e * dt;
    const double raw = g.lambda0 + g.kp * e + g.ki * trial;
    if (raw > g.hi) {
        if (e <= 0.0) {
            g.integral = trial;
        }
        return g.hi;
    }
    if (raw < g.lo) {
        if (e >= 0.0) {
            g.integral = trial;
        }
        return g.lo;
    }
    g.integral = trial;
    return raw;
}

struct RuleParams {
    double soc_target = 0.35;
    double electric_below = 10e3; ///< W
    double charge_band = 0.02;
    double charge_power = 8e3; ///< W
};

/// OEM-style thermostat and load-following rules.
inline powertrain::Split rule_based_step(const powertrain::Plant& plant, const powertrain::BatteryState& bat,
                                         double p_dem, const RuleParams& rp = {})
{
    powertrain::Split s;
    if (p_dem <= 0.0) {
        s.p_bat = p_dem;
        return s;
    }
    if (bat.soc > rp.soc_target && p_dem < rp.electric_below) {
        s.p_bat = p_dem;
        return s;
    }
    const double charge = bat.soc < rp.soc_target - rp.charge_band ? rp.charge_power : 0.0;
    s.p_ice = std::min(plant.max_engine_power(), p_dem + charge);
    s.p_bat = p_dem - s.p_ice;
    return s;
}

/// Policy adapters for powertrain::simulate.
inline auto constant_ef_policy(const powertrain::Plant& plant, const EmsContext& ctx, double lambda)
{
    return [&plant, ctx, lambda](std::size_t, const powertrain::PowertrainState& s, double p_dem) {
        const auto d = ecms_step(plant, s.battery, lambda, p_dem, ctx);
        return powertrain::Split{d.p_ice, d.p_bat, lambda};
    };
}

inline auto aecms_policy(const powertrain::Plant& plant, const EmsContext& ctx, PiGains gains)
{
    gains.validate();
    return [&plant, ctx, gains](std::size_t, const powertrain::PowertrainState& s, double p_dem) mutable {
        const double lambda = aecms_update(gains, s.battery.soc, ctx.soc_ref, ctx.dt);
        const auto d = ecms_step(plant, s.battery, lambda, p_dem, ctx);
        return powertrain::Split{d.p_ice, d.p_bat, lambda};
    };
}

inline auto rule_based_policy(const powertrain::Plant& plant, RuleParams rp)
{
    return [&plant, rp](std::size_t, const powertrain::PowertrainState& s, double p_dem) {
        return rule_based_step(plant, s.battery, p_dem, rp);
    };
}

struct ShootingResult {
    double lambda = 0.0;
    powertrain::SimResult sim;
    int iterations = 0;
    bool bracketed = true; ///< false when the target SOC is outside [lo, hi] end states
};

/// Bisection on a constant equivalence factor so the final SOC lands on the reference.
/// Final SOC is non-decreasing in lambda.
inline ShootingResult shoot_constant_ef(const powertrain::Plant& plant, const cycle::DriveCycle& cyc, double soc0,
                                        const EmsContext& ctx, double lo = 0.2, double hi = 4.0, double soc_tol = 1e-4,
                                        int max_iter = 40)
{
    auto run = [&](double lambda) { return powertrain::simulate(plant, cyc, soc0, constant_ef_policy(plant, ctx, lambda)); };
    auto final_soc = [](const powertrain::SimResult& r) { return r.final_state.battery.soc; };
    ShootingResult out;
    auto r_lo = run(lo);
    auto r_hi = run(hi);
    if (final_soc(r_lo) > ctx.soc_ref) {
        out = {lo, std::move(r_lo), 0, false};
        return out;
    }
    if (final_soc(r_hi) < ctx.soc_ref) {
        out = {hi, std::move(r_hi), 0, false};
        return out;
    }
    out.lambda = hi;
    out.sim = std::move(r_hi);
    for (int it = 1; it <= max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto r = run(mid);
        const double err = final_soc(r) - ctx.soc_ref;
        out.iterations = it;
        if (std::abs(err) < std::abs(final_soc(out.sim) - ctx.soc_ref)) {
            out.lambda = mid;
            out.sim = r;
        }
        if (std::abs(err) <= soc_tol) {
            break;
        }
        (err < 0.0 ? lo : hi) = mid;
    }
    return out;
}

} // namespace hevlab::ems
