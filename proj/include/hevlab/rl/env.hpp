#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hevlab/common/errors.hpp"
#include "hevlab/common/units.hpp"
#include "hevlab/ems/ecms.hpp"
#include "hevlab/ml/core.hpp"

namespace hevlab::rl {

using ml::Vec;

enum class EnvKind { rl_ecms, conventional };

inline std::string to_string(EnvKind k) { return k == EnvKind::rl_ecms ? "rl-ecms" : "rl"; }

inline EnvKind parse_env_kind(const std::string& s)
{
    if (s == "rl-ecms" || s == "rl_ecms") {
        return EnvKind::rl_ecms;
    }
    if (s == "rl" || s == "conventional") {
        return EnvKind::conventional;
    }
    throw ValidationError("unknown agent '" + s + "' (expected rl-ecms or rl)");
}

/// Look-back/look-ahead horizons and per-channel normalisation scales.
struct HorizonConfig {
    double t_avg = 30.0;  ///< s, window of the average demand
    double t_fx = 10.0;   ///< s, speed preview
    int fx_points = 5;    ///< preview samples, evenly spaced over (t, t + t_fx]
    double p_scale = 120e3;
    double v_scale = 40.0;
    double a_scale = 3.0; ///< m/s^2, conventional agent only
    double dsoc_scale = 0.2;

    void validate() const
    {
        if (!(t_avg > 0.0 && t_fx > 0.0) || fx_points < 1) {
            throw ValidationError("HorizonConfig: horizons must be positive");
        }
        if (!(p_scale > 0.0 && v_scale > 0.0 && a_scale > 0.0 && dsoc_scale > 0.0)) {
            throw ValidationError("HorizonConfig: scales must be positive");
        }
    }
};

struct EnvConfig {
    EnvKind kind = EnvKind::rl_ecms;
    HorizonConfig horizon;
    double tau = 3.0; ///< SOC penalty weight
    double soc0 = 0.34;
    double soc_target = 0.34;
    double fail_reward = -10.0; ///< terminal reward when a step errors or SOC reaches a bound

    void validate() const
    {
        horizon.validate();
        if (!(tau >= 0.0)) {
            throw ValidationError("EnvConfig: tau must be non-negative");
        }
    }
};

inline double action_to_ef(double raw)
{
    return std::clamp(1.25 + 0.75 * raw, ems::ef_min, ems::ef_max);
}

/// r = -(fuel rate + tau * zeta), zeta = dsoc^2 below the target and 0 otherwise.
inline double reward(double fuel_l_per_s, double dsoc, double tau)
{
    if (!(tau >= 0.0)) {
        throw ValidationError("reward: tau must be non-negative");
    }
    const double zeta = dsoc >= 0.0 ? 0.0 : dsoc * dsoc;
    return -(fuel_l_per_s + tau * zeta);
}

/// Weight for reward() (fuel in L/s, dSOC as a fraction) equivalent to `tau` with fuel in g/s
/// and dSOC in percent; the two rewards then differ only by the factor 1000 * density.
inline double tau_fraction_units(double tau)
{
    return tau * 1e4 / (1e3 * units::gasoline_density_kg_per_l);
}

struct StepResult {
    Vec state;
    double reward = 0.0;
    bool done = false;
    bool failed = false; ///< terminated by an error or a SOC bound
    std::string failure;
};

/// Episode wrapper over the plant. RL-ECMS acts with an equivalence factor handed to ecms_step;
/// the conventional agent commands engine power directly and the battery covers the balance.
class HevEnv {
public:
    HevEnv(const powertrain::Plant& plant, cycle::DriveCycle cyc, EnvConfig cfg)
        : plant_(&plant), cyc_(std::move(cyc)), cfg_(cfg), ctx_(ems::make_context(plant, cfg.soc_target))
    {
        cfg_.validate();
        for (std::size_t k = 0; k < cyc_.size(); ++k) {
            p_dem_.push_back(plant.powertrain_demand(cycle::demand_power(cyc_, k, plant.vehicle)));
        }
        reset();
    }

    [[nodiscard]] int state_dim() const { return cfg_.kind == EnvKind::rl_ecms ? 5 + cfg_.horizon.fx_points : 3; }
    [[nodiscard]] const EnvConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const cycle::DriveCycle& cycle() const noexcept { return cyc_; }
    [[nodiscard]] const powertrain::Plant& plant() const noexcept { return *plant_; }
    [[nodiscard]] const ems::EmsContext& context() const noexcept { return ctx_; }
    [[nodiscard]] std::size_t step_index() const noexcept { return k_; }
    [[nodiscard]] bool done() const noexcept { return done_; }
    [[nodiscard]] const powertrain::PowertrainState& plant_state() const noexcept { return s_; }
    [[nodiscard]] const powertrain::SimResult& result() const noexcept { return res_; }

    Vec reset()
    {
        k_ = 0;
        done_ = false;
        s_ = powertrain::initial_state(*plant_, cfg_.soc0);
        res_ = powertrain::begin_result(cyc_, cfg_.soc0);
        res_.final_state = s_;
        return state();
    }

    /// Normalised observation at the current step (past the end: no preview, d_rem = 0).
    [[nodiscard]] Vec state() const
    {
        const auto& h = cfg_.horizon;
        const std::size_t n = cyc_.size();
        const double dt = cyc_.dt();
        auto norm = [](double x, double scale) { return std::clamp(x / scale, -1.0, 1.0); };
        auto speed_at = [&](std::size_t k) { return k < n ? cyc_.speed(k) : 0.0; };
        const double dsoc = norm(s_.battery.soc - cfg_.soc_target, h.dsoc_scale);
        Vec x(state_dim());
        if (cfg_.kind == EnvKind::conventional) {
            const double a = k_ < n ? cyc_.acceleration(k_) : 0.0;
            x << norm(speed_at(k_), h.v_scale), norm(a, h.a_scale), dsoc;
            return x;
        }
        const auto window = static_cast<std::size_t>(std::max(1.0, std::round(h.t_avg / dt)));
        const std::size_t last = std::min(k_, n - 1);
        const std::size_t first = last + 1 > window ? last + 1 - window : 0;
        double p_avg = 0.0;
        for (std::size_t j = first; j <= last; ++j) {
            p_avg += p_dem_[j];
        }
        p_avg /= static_cast<double>(last - first + 1);
        int i = 0;
        x[i++] = norm(p_avg, h.p_scale);
        for (int j = 1; j <= h.fx_points; ++j) {
            const double ahead = h.t_fx * j / h.fx_points;
            x[i++] = norm(speed_at(k_ + static_cast<std::size_t>(std::llround(ahead / dt))), h.v_scale);
        }
        x[i++] = norm(s_.p_ice, h.p_scale);
        x[i++] = norm(speed_at(k_), h.v_scale);
        const double total = cyc_.total_distance();
        x[i++] = total > 0.0 ? std::clamp((total - cyc_.distance_before(k_)) / total, 0.0, 1.0) : 0.0;
        x[i++] = dsoc;
        return x;
    }

    /// Executes one step with a raw action in [-1, 1] (clamped).
    StepResult step(double raw)
    {
        if (done_) {
            throw StateError("HevEnv: step after episode end");
        }
        raw = std::clamp(raw, -1.0, 1.0);
        const double p_dem = p_dem_[k_];
        const double v = cyc_.speed(k_);
        StepResult out;
        powertrain::Split split;
        powertrain::StepOutcome step;
        try {
            if (cfg_.kind == EnvKind::rl_ecms) {
                split.ef = action_to_ef(raw);
                const auto d = ems::ecms_step(*plant_, s_.battery, split.ef, p_dem, ctx_);
                split.p_ice = d.p_ice;
                split.p_bat = d.p_bat;
            } else {
                // engine runs only under traction demand, as for every other strategy
                split.p_ice = p_dem > 0.0 ? 0.5 * (raw + 1.0) * plant_->max_engine_power() : 0.0;
                split.p_bat = p_dem - split.p_ice;
            }
            step = powertrain::powertrain_step(*plant_, s_, split.p_ice, split.p_bat, v, p_dem, cyc_.dt());
        } catch (const Error& e) {
            done_ = true;
            out.failed = true;
            out.failure = std::string(e.what()) + " at step " + std::to_string(k_);
            out.reward = cfg_.fail_reward;
            out.done = true;
            out.state = state();
            return out;
        }
        powertrain::record_step(res_, cyc_.time(k_), v, p_dem, split.ef, step);
        s_ = step.state;
        ++k_;
        const double fuel = units::kg_to_litres(s_.fuel_rate);
        out.reward = reward(fuel, s_.battery.soc - cfg_.soc_target, cfg_.tau);
        const auto& b = s_.battery;
        if (b.soc - b.soc_min < 1e-9 || b.soc_max - b.soc < 1e-9) {
            out.failed = true;
            out.failure = "SOC reached a bound at step " + std::to_string(k_ - 1);
            out.reward += cfg_.fail_reward;
        }
        done_ = out.failed || k_ >= cyc_.size();
        out.done = done_;
        out.state = state();
        return out;
    }

private:
    const powertrain::Plant* plant_;
    cycle::DriveCycle cyc_;
    EnvConfig cfg_;
    ems::EmsContext ctx_;
    std::vector<double> p_dem_;
    std::size_t k_ = 0;
    bool done_ = false;
    powertrain::PowertrainState s_{};
    powertrain::SimResult res_;
};

} // namespace hevlab::rl
