#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hevlab/common/errors.hpp"
#include "hevlab/cycle.hpp"
#include "hevlab/powertrain/plant.hpp"

namespace hevlab::powertrain {

/// Controller output for one step. `ef` is the equivalence factor when the controller has one.
struct Split {
    double p_ice = 0.0;
    double p_bat = 0.0;
    double ef = std::numeric_limits<double>::quiet_NaN();
};

struct TraceRow {
    double t = 0.0;
    double v = 0.0;
    double p_dem = 0.0;
    double p_ice = 0.0;
    double p_bat = 0.0;
    double soc = 0.0;
    double ef = std::numeric_limits<double>::quiet_NaN();
    double T_cool = 0.0;
    double fuel_l = 0.0; ///< cumulative
    double fuel_rate = 0.0;
    bool engine_on = false;
    double balance_error = 0.0;
    bool projected = false;
    EngineState engine{};
};

struct SimResult {
    std::string cycle_name;
    std::vector<TraceRow> trace;
    PowertrainState final_state{};
    double initial_soc = 0.0;
    double distance_m = 0.0;
    int projections = 0;
    int unmet_steps = 0;
    double max_balance_error = 0.0;
    double min_soc = 1.0;
    double max_soc = 0.0;
};

inline SimResult begin_result(const cycle::DriveCycle& cyc, double initial_soc)
{
    SimResult res;
    res.cycle_name = cyc.name();
    res.initial_soc = initial_soc;
    res.distance_m = cyc.total_distance();
    res.trace.reserve(cyc.size());
    res.min_soc = res.max_soc = initial_soc;
    return res;
}

/// Appends one executed step to the trace and the running summary.
inline void record_step(SimResult& res, double t, double v, double p_dem, double ef, const StepOutcome& step)
{
    TraceRow row;
    row.t = t;
    row.v = v;
    row.p_dem = p_dem;
    row.p_ice = step.state.p_ice;
    row.p_bat = step.state.p_bat;
    row.soc = step.state.battery.soc;
    row.ef = ef;
    row.T_cool = step.state.engine.T_cool;
    row.fuel_l = step.state.fuel_l;
    row.fuel_rate = step.state.fuel_rate;
    row.engine_on = step.state.engine_on;
    row.balance_error = step.balance_error;
    row.projected = step.projected;
    row.engine = step.state.engine;
    res.trace.push_back(row);
    res.projections += step.projected ? 1 : 0;
    res.unmet_steps += step.unmet ? 1 : 0;
    res.max_balance_error = std::max(res.max_balance_error, step.balance_error);
    res.min_soc = std::min(res.min_soc, row.soc);
    res.max_soc = std::max(res.max_soc, row.soc);
    res.final_state = step.state;
}

/// Policy is called as policy(k, state, p_dem) and returns a Split.
template <class Policy>
SimResult simulate(const Plant& plant, const cycle::DriveCycle& cyc, double initial_soc, Policy&& policy)
{
    SimResult res = begin_result(cyc, initial_soc);
    PowertrainState s = initial_state(plant, initial_soc);
    res.final_state = s;
    const double dt = cyc.dt();
    for (std::size_t k = 0; k < cyc.size(); ++k) {
        const double v = cyc.speed(k);
        const double p_dem = plant.powertrain_demand(cycle::demand_power(cyc, k, plant.vehicle));
        const Split split = policy(k, static_cast<const PowertrainState&>(s), p_dem);
        StepOutcome step;
        try {
            step = powertrain_step(plant, s, split.p_ice, split.p_bat, v, p_dem, dt);
        } catch (const Error& e) {
            throw StateError(std::string(e.what()) + " at step " + std::to_string(k));
        }
        record_step(res, cyc.time(k), v, p_dem, split.ef, step);
        s = step.state;
    }
    return res;
}

/// Number of off->on edges in an engine-power trace.
inline int count_starts(const std::vector<double>& p_ice, bool initially_on = false)
{
    int n = 0;
    bool on = initially_on;
    for (double p : p_ice) {
        const bool now = p > 0.0;
        n += (now && !on) ? 1 : 0;
        on = now;
    }
    return n;
}

} // namespace hevlab::powertrain
