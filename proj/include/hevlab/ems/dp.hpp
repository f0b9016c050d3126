#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hevlab/common/interp.hpp"
#include "hevlab/ems/ecms.hpp"

namespace hevlab::ems {

inline constexpr double dp_inf = std::numeric_limits<double>::infinity();

/// Backward induction over a finite state/action set. stage(k, s, a) returns the next state and
/// the stage cost, or nothing when the transition is not allowed.
struct DiscreteDpResult {
    double cost = dp_inf;
    std::vector<int> states;  ///< visited states, steps + 1 entries
    std::vector<int> actions; ///< chosen actions, steps entries
};

template <class Stage>
DiscreteDpResult discrete_dp(int steps, int n_states, int n_actions, int start, Stage&& stage,
                             const std::vector<double>& terminal)
{
    if (static_cast<int>(terminal.size()) != n_states) {
        throw DimensionError("discrete_dp: terminal cost size mismatch");
    }
    std::vector<std::vector<double>> J(static_cast<std::size_t>(steps) + 1, std::vector<double>(n_states, dp_inf));
    std::vector<std::vector<int>> pol(static_cast<std::size_t>(steps), std::vector<int>(n_states, -1));
    J[static_cast<std::size_t>(steps)] = terminal;
    for (int k = steps - 1; k >= 0; --k) {
        for (int s = 0; s < n_states; ++s) {
            for (int a = 0; a < n_actions; ++a) {
                const std::optional<std::pair<int, double>> t = stage(k, s, a);
                if (!t) {
                    continue;
                }
                const double c = t->second + J[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(t->first)];
                if (c < J[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)]) {
                    J[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)] = c;
                    pol[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)] = a;
                }
            }
        }
    }
    DiscreteDpResult r;
    r.cost = J[0][static_cast<std::size_t>(start)];
    if (!std::isfinite(r.cost)) {
        throw InfeasibleError("discrete_dp: no feasible path from the start state");
    }
    int s = start;
    r.states.push_back(s);
    for (int k = 0; k < steps; ++k) {
        const int a = pol[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
        s = stage(k, s, a)->first;
        r.actions.push_back(a);
        r.states.push_back(s);
    }
    return r;
}

struct DpOptions {
    int soc_points = 201;
    int pbat_points = 101;
    double soc_ref = 0.35;
    double tolerance = 0.005;    ///< terminal window half-width
    double terminal_slope = 0.0; ///< kg per unit SOC charged for ending below soc_ref
    double window_penalty = 1e3; ///< kg per unit SOC outside the terminal window

    void validate() const
    {
        if (soc_points < 50) {
            throw ValidationError("dp: SOC grid needs at least 50 points");
        }
        if (pbat_points < 2) {
            throw ValidationError("dp: battery power grid needs at least 2 points");
        }
        if (!(tolerance > 0.0)) {
            throw ValidationError("dp: terminal tolerance must be positive");
        }
    }
};

struct DpSolution {
    std::vector<double> soc_grid;
    std::vector<std::vector<double>> cost_to_go; ///< [k][i], kg; k = 0..N
    std::vector<std::vector<double>> policy;     ///< [k][i] optimal p_bat, W; NaN where infeasible
    std::vector<double> p_dem;
    powertrain::SimResult rollout;
    double fuel_l = 0.0;
    double dt = 1.0;

    /// Cost-to-go at an off-grid SOC by linear interpolation; infinite next to an infeasible node.
    [[nodiscard]] double value(std::size_t k, double soc) const
    {
        const auto& J = cost_to_go[k];
        const auto& g = soc_grid;
        if (soc < g.front() - 1e-12 || soc > g.back() + 1e-12) {
            return dp_inf;
        }
        const double sc = std::clamp(soc, g.front(), g.back());
        const auto i = std::min<std::size_t>(bracket(g, sc), g.size() - 2);
        const double t = (sc - g[i]) / (g[i + 1] - g[i]);
        const double a = J[i];
        const double b = J[i + 1];
        if (t <= 1e-9) {
            return a;
        }
        if (t >= 1.0 - 1e-9) {
            return b;
        }
        if (!std::isfinite(a) || !std::isfinite(b)) {
            return dp_inf;
        }
        return (1.0 - t) * a + t * b;
    }
};

namespace detail {

struct DpChoice {
    double p_bat = 0.0;
    double cost = dp_inf;
};

inline DpChoice dp_best(const powertrain::Plant& plant, const DpSolution& sol, std::size_t k,
                        const powertrain::BatteryState& bat, double p_dem, int points, double dt)
{
    DpChoice best;
    const auto iv = admissible_battery_power(plant, bat, p_dem, dt);
    if (iv.empty()) {
        return best;
    }
    const double q = bat.capacity_coulomb();
    for (double p : candidate_grid(iv, p_dem, points)) {
        const double p_ice = std::max(0.0, p_dem - p);
        const double next = p == 0.0 ? bat.soc : bat.soc - powertrain::battery_current(bat, p) * dt / q;
        const double c = plant.fuel.rate(p_ice) * dt + sol.value(k + 1, next);
        const double tie = 1e-12 * std::max(std::abs(c), 1e-12);
        if (c < best.cost - tie || (std::abs(c - best.cost) <= tie && std::abs(p) < std::abs(best.p_bat))) {
            best = {p, c};
        }
    }
    return best;
}

} // namespace detail

/// Deterministic DP over (time, SOC) with fuel as stage cost. Terminal cost:
/// terminal_slope * (soc_ref - soc) plus a steep linear penalty outside soc_ref +- tolerance. A
/// hard window would pin the interpolated cost-to-go to the few nodes inside it, since one step
/// moves SOC far less than a grid spacing. The rollout simulates the plant from soc0 under the
/// interpolated policy.
inline DpSolution dp_solve(const powertrain::Plant& plant, const cycle::DriveCycle& cyc, double soc0, const DpOptions& opt)
{
    opt.validate();
    DpSolution sol;
    sol.dt = cyc.dt();
    const double lo = plant.battery.soc_min();
    const double hi = plant.battery.soc_max();
    sol.soc_grid = linspace(lo, hi, static_cast<std::size_t>(opt.soc_points));
    const std::size_t n = cyc.size();
    const std::size_t m = sol.soc_grid.size();
    for (std::size_t k = 0; k < n; ++k) {
        sol.p_dem.push_back(plant.powertrain_demand(cycle::demand_power(cyc, k, plant.vehicle)));
    }
    std::vector<powertrain::BatteryState> nodes;
    for (double s : sol.soc_grid) {
        nodes.push_back(plant.battery.state(s));
    }

    sol.cost_to_go.assign(n + 1, std::vector<double>(m, dp_inf));
    sol.policy.assign(n, std::vector<double>(m, std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t i = 0; i < m; ++i) {
        const double dev = opt.soc_ref - sol.soc_grid[i];
        sol.cost_to_go[n][i] = opt.terminal_slope * dev + opt.window_penalty * std::max(0.0, std::abs(dev) - opt.tolerance);
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto best = detail::dp_best(plant, sol, k, nodes[i], sol.p_dem[k], opt.pbat_points, sol.dt);
            if (std::isfinite(best.cost)) {
                sol.cost_to_go[k][i] = best.cost;
                sol.policy[k][i] = best.p_bat;
            }
        }
    }
    const auto window_error = [&](const std::string& what) {
        return InfeasibleError("dp_solve: terminal SOC window [" + std::to_string(opt.soc_ref - opt.tolerance) + ", "
                               + std::to_string(opt.soc_ref + opt.tolerance) + "] " + what + " from SOC "
                               + std::to_string(soc0) + "; binding: battery power and SOC limits");
    };
    if (!std::isfinite(sol.value(0, soc0))) {
        throw window_error("has no feasible path");
    }

    sol.rollout = powertrain::simulate(plant, cyc, soc0, [&](std::size_t k, const powertrain::PowertrainState& s, double p_dem) {
        const auto best = detail::dp_best(plant, sol, k, s.battery, p_dem, opt.pbat_points, sol.dt);
        if (!std::isfinite(best.cost)) {
            throw InfeasibleError("dp rollout left the feasible tube at step " + std::to_string(k));
        }
        return powertrain::Split{std::max(0.0, p_dem - best.p_bat), best.p_bat};
    });
    sol.fuel_l = sol.rollout.final_state.fuel_l;
    if (std::abs(sol.rollout.final_state.battery.soc - opt.soc_ref) > opt.tolerance + 1e-9) {
        throw window_error("is unreachable");
    }
    return sol;
}

/// Policy table as CSV rows (t, soc_index, p_bat_opt); infeasible nodes are skipped.
inline void write_policy_csv(const DpSolution& sol, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    out.precision(10);
    out << "t,soc_index,p_bat_opt\n";
    for (std::size_t k = 0; k < sol.policy.size(); ++k) {
        for (std::size_t i = 0; i < sol.policy[k].size(); ++i) {
            if (std::isfinite(sol.policy[k][i])) {
                out << static_cast<double>(k) * sol.dt << ',' << i << ',' << sol.policy[k][i] << '\n';
            }
        }
    }
}

} // namespace hevlab::ems
