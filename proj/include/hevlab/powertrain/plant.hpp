#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hevlab/common/errors.hpp"
#include "hevlab/common/interp.hpp"
#include "hevlab/common/units.hpp"
#include "hevlab/cycle.hpp"
#include "hevlab/powertrain/battery.hpp"
#include "hevlab/powertrain/engine_map.hpp"
#include "hevlab/powertrain/mvem.hpp"

namespace hevlab::powertrain {

enum class FuelSource { quasi_static, dynamic, averaged, corrected };

inline FuelSource parse_fuel_source(const std::string& s)
{
    if (s == "quasi_static" || s == "quasi-static") {
        return FuelSource::quasi_static;
    }
    if (s == "dynamic") {
        return FuelSource::dynamic;
    }
    if (s == "averaged") {
        return FuelSource::averaged;
    }
    if (s == "corrected") {
        return FuelSource::corrected;
    }
    throw ValidationError("unknown fuel source '" + s + "'");
}

/// Maps an OOL point and the averaged physical rate to a corrected rate (kg/s).
using FuelCorrection = std::function<double(const OolPoint&, double averaged_rate)>;

/// Warm fuel rate along the operating line as a function of engine power, tabulated on the OOL
/// power grid. Every strategy and the plant read fuel from the same curve, so planned and
/// simulated fuel agree exactly.
class FuelCurve {
public:
    FuelCurve() = default;
    FuelCurve(std::vector<double> powers, std::vector<double> rates, double idle_floor)
        : table_(std::move(powers), std::move(rates)), idle_floor_(idle_floor)
    {
    }

    static FuelCurve build(const EngineMap& map, const OperatingLine& ool, const EngineCalibration& cal,
                           FuelSource source, double idle_floor, const FuelCorrection& correction = {})
    {
        if (source == FuelSource::corrected && !correction) {
            throw ValidationError("corrected fuel source needs a trained correction");
        }
        std::vector<double> powers = ool.powers();
        std::vector<double> rates(powers.size(), 0.0);
        for (std::size_t i = 1; i < powers.size(); ++i) {
            const auto op = ool.at(powers[i]);
            const double q = map.quasi_static_fuel(op.omega, op.torque).rate;
            const double d = steady_dynamic_fuel(op.omega, op.torque, map.limits(), cal);
            switch (source) {
            case FuelSource::quasi_static: rates[i] = q; break;
            case FuelSource::dynamic: rates[i] = d; break;
            case FuelSource::averaged: rates[i] = 0.5 * (q + d); break;
            case FuelSource::corrected: rates[i] = std::max(0.0, correction(op, 0.5 * (q + d))); break;
            }
        }
        return FuelCurve(std::move(powers), std::move(rates), idle_floor);
    }

    /// kg/s; zero with the engine off, never below the idle floor with it on.
    [[nodiscard]] double rate(double p_ice) const
    {
        if (p_ice <= 0.0) {
            return 0.0;
        }
        return std::max(idle_floor_, table_(p_ice));
    }

    [[nodiscard]] double idle_floor() const noexcept { return idle_floor_; }
    [[nodiscard]] const Table1D& table() const noexcept { return table_; }

private:
    Table1D table_;
    double idle_floor_ = 0.0;
};

/// Immutable plant description shared by simulations.
struct Plant {
    cycle::VehicleParams vehicle{};
    BatteryModel battery = BatteryModel::reference();
    std::shared_ptr<const EngineMap> engine;
    std::shared_ptr<const OperatingLine> ool;
    EngineCalibration calibration{};
    FuelCurve fuel{};
    FuelSource fuel_source = FuelSource::averaged;
    double idle_fuel = 0.2e-3;
    double balance_tol = 1e-6;

    [[nodiscard]] double max_engine_power() const { return engine->limits().max_power; }

    /// Powertrain demand after friction braking: braking beyond the regenerative limit is dissipated.
    [[nodiscard]] double powertrain_demand(double road_power) const { return std::max(road_power, battery.p_min()); }

    void rebuild_fuel(FuelSource source, const FuelCorrection& correction = {})
    {
        fuel_source = source;
        fuel = FuelCurve::build(*engine, *ool, calibration, source, idle_fuel, correction);
    }
};

inline Plant make_plant(EngineMap map, BatteryModel battery = BatteryModel::reference(),
                        FuelSource source = FuelSource::averaged, EngineCalibration cal = {})
{
    cal.validate();
    Plant p;
    p.battery = std::move(battery);
    p.calibration = cal;
    p.engine = std::make_shared<const EngineMap>(std::move(map));
    p.ool = std::make_shared<const OperatingLine>(*p.engine);
    p.rebuild_fuel(source);
    return p;
}

/// Plant built from the bundled map assets.
inline Plant reference_plant(FuelSource source = FuelSource::averaged, bool soc_flat = false)
{
    return make_plant(load_engine_map(), soc_flat ? BatteryModel::soc_flat() : load_battery(), source);
}

struct PowertrainState {
    EngineState engine{};
    BatteryState battery{};
    double speed = 0.0;
    double time = 0.0;
    double fuel_kg = 0.0;
    double fuel_l = 0.0;
    bool engine_on = false;
    int start_stop_count = 0;
    double p_ice = 0.0;
    double p_bat = 0.0;
    double p_dem = 0.0;
    double brake_power = 0.0;
    double fuel_rate = 0.0; ///< kg/s during the last step
};

inline PowertrainState initial_state(const Plant& plant, double soc)
{
    PowertrainState s;
    s.engine = EngineState::cold(plant.calibration);
    s.battery = plant.battery.state(soc);
    return s;
}

struct StepOutcome {
    PowertrainState state;
    bool projected = false;    ///< requested split changed to stay feasible
    bool unmet = false;        ///< demand above what both sources can deliver
    double balance_error = 0.0; ///< |P_dem - brake - P_ICE - P_bat|
};

/// One supervisory step. The split is projected onto the feasible set (engine envelope, battery
/// power and SOC window); surplus power that the battery cannot absorb goes to the friction brakes.
inline StepOutcome powertrain_step(const Plant& plant, const PowertrainState& state, double p_ice, double p_bat,
                                   double v, double p_dem, double dt)
{
    if (!(dt > 0.0)) {
        throw DomainError("powertrain_step: dt must be positive");
    }
    StepOutcome out;
    const double p_ice_max = plant.max_engine_power();
    const auto [lo, hi] = soc_feasible_power(state.battery, dt);

    double ice = std::clamp(p_ice, 0.0, p_ice_max);
    double bat = p_bat;
    if (ice != p_ice || std::abs(p_dem - ice - bat) > plant.balance_tol) {
        out.projected = std::abs(p_dem - p_ice - p_bat) > plant.balance_tol || ice != p_ice;
        bat = p_dem - ice;
    }
    if (bat < lo || bat > hi) {
        out.projected = true;
        bat = std::clamp(bat, lo, hi);
        ice = std::clamp(p_dem - bat, 0.0, p_ice_max);
    }
    double brake = 0.0;
    const double residual = p_dem - ice - bat;
    if (residual < -plant.balance_tol) {
        brake = -residual;
    } else if (residual > plant.balance_tol) {
        out.unmet = true;
    }
    out.balance_error = std::abs(p_dem - brake - ice - bat);

    PowertrainState next = state;
    next.time = state.time + dt;
    next.speed = v;
    next.p_dem = p_dem;
    next.p_ice = ice;
    next.p_bat = bat;
    next.brake_power = brake;
    next.engine_on = ice > 0.0;
    if (next.engine_on && !state.engine_on) {
        ++next.start_stop_count;
    }
    OolPoint op;
    if (next.engine_on) {
        op = plant.ool->at(ice);
    }
    next.engine = advance_engine(state.engine, op.omega, op.torque, plant.engine->limits(), plant.calibration, dt);
    next.fuel_rate = plant.fuel.rate(ice);
    next.fuel_kg = state.fuel_kg + next.fuel_rate * dt;
    next.fuel_l = units::kg_to_litres(next.fuel_kg);
    next.battery = battery_step(plant.battery, state.battery, bat, dt);
    out.state = next;
    return out;
}

} // namespace hevlab::powertrain
