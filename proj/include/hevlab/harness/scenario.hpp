#pragma once

#include <optional>
#include <string>

#include "hevlab/calibrate/correction.hpp"
#include "hevlab/ems/dp.hpp"
#include "hevlab/ems/ecms.hpp"
#include "hevlab/harness/config.hpp"
#include "hevlab/harness/report.hpp"
#include "hevlab/rl/train.hpp"

namespace hevlab::harness {

/// `--full` swaps the desk cycle for WLTC and the networks for 200/150/100/50.
inline RunConfig effective(RunConfig cfg)
{
    if (cfg.full) {
        if (cfg.cycle == "urban300") {
            cfg.cycle = "wltc";
        }
        cfg.hidden = {200, 150, 100, 50};
    }
    cfg.validate();
    return cfg;
}

inline cycle::DriveCycle load_run_cycle(const RunConfig& cfg) { return cycle::builtin_cycle(cfg.cycle, cfg.dt); }

inline calib::TrainOptions calibration_options(const RunConfig& cfg, calib::ModelKind kind)
{
    calib::TrainOptions o;
    o.kind = kind;
    o.epochs = cfg.calib_epochs;
    o.hidden = cfg.calib_hidden;
    o.seed = cfg.seed;
    return o;
}

/// Plant with the configured fuel source. "corrected" first trains the LSTM correction on the
/// default truth recipe over WLTC.
inline powertrain::Plant make_run_plant(const RunConfig& cfg)
{
    const auto source = powertrain::parse_fuel_source(cfg.fuel_model);
    if (source != powertrain::FuelSource::corrected) {
        return powertrain::reference_plant(source, cfg.soc_flat);
    }
    auto plant = powertrain::reference_plant(powertrain::FuelSource::averaged, cfg.soc_flat);
    const calib::CorrectionDataset ds(calib::generate_truth(plant, cycle::builtin_cycle("wltc"), {}), 10);
    auto model = calib::train_fuel_correction(ds, calibration_options(cfg, calib::ModelKind::lstm)).model;
    plant.rebuild_fuel(source, calib::make_fuel_correction(std::move(model), plant.engine->limits(), plant.calibration));
    return plant;
}

/// Plant, cycle and the bisection-tuned constant factor shared by every strategy of a run.
struct Setup {
    RunConfig cfg;
    powertrain::Plant plant;
    cycle::DriveCycle cycle;
    ems::EmsContext ctx;
    double lambda_star = 1.0;
    double eta_corr = 0.0; ///< eta_ice_est / lambda_star
    bool bracketed = true;
};

inline Setup prepare(const RunConfig& config)
{
    const RunConfig cfg = effective(config);
    Setup s{cfg, make_run_plant(cfg), load_run_cycle(cfg), {}, 1.0, 0.0, true};
    s.ctx = ems::make_context(s.plant, s.cfg.soc_target);
    s.ctx.dt = s.cycle.dt();
    s.ctx.tolerance = s.cfg.dp_tolerance;
    const auto shot = ems::shoot_constant_ef(s.plant, s.cycle, s.cfg.soc0, s.ctx);
    s.lambda_star = shot.lambda;
    s.bracketed = shot.bracketed;
    s.eta_corr = s.ctx.eta_ice_est / s.lambda_star;
    return s;
}

inline rl::EnvConfig env_config(const Setup& s, rl::EnvKind kind, double tau)
{
    rl::EnvConfig e;
    e.kind = kind;
    e.horizon.dsoc_scale = s.cfg.dsoc_scale;
    e.tau = rl::tau_fraction_units(tau);
    e.soc0 = s.cfg.soc0;
    e.soc_target = s.cfg.soc_target;
    return e;
}

inline rl::Hyperparameters hyperparameters(const RunConfig& cfg)
{
    rl::Hyperparameters hp;
    hp.episodes = cfg.episodes;
    hp.hidden = cfg.hidden;
    hp.actor_lr = hp.critic_lr = cfg.lr;
    hp.reward_scale = cfg.reward_scale;
    return hp;
}

/// Fresh TD3 run on the setup's cycle with penalty weight `tau` (percent / gram units).
inline rl::TrainResult train_agent(const Setup& s, rl::EnvKind kind, double tau)
{
    rl::HevEnv env(s.plant, s.cycle, env_config(s, kind, tau));
    return rl::train(env, hyperparameters(s.cfg), s.cfg.seed);
}

inline MetricsReport report_for(const Setup& s, const std::string& strategy, const powertrain::SimResult& sim)
{
    auto r = make_report(strategy, sim, s.plant.battery, s.cfg.soc0, s.eta_corr);
    r.seed = s.cfg.seed;
    return r;
}

/// Deterministic rollout of a trained actor under the configured disturbance.
inline MetricsReport evaluate_agent(const Setup& s, rl::EnvKind kind, const ml::MlpWeights& actor, double level,
                                    std::uint64_t seed)
{
    rl::HevEnv env(s.plant, s.cycle, env_config(s, kind, s.cfg.tau));
    const auto m = rl::evaluate_policy(actor, env, {level, seed, s.eta_corr});
    if (m.failed) {
        throw StateError(to_string(kind) + " policy: " + m.failure);
    }
    auto r = report_for(s, to_string(kind), m.sim);
    r.seed = seed;
    r.disturbance = level;
    return r;
}

/// One full-cycle run of `strategy`. RL strategies use `policy` when given, else train one.
inline MetricsReport run_strategy(const Setup& s, const std::string& strategy, const ml::MlpWeights* policy = nullptr)
{
    const auto& cfg = s.cfg;
    const auto& plant = s.plant;
    if (strategy == "rl-ecms" || strategy == "rl") {
        const auto kind = rl::parse_env_kind(strategy);
        if (policy != nullptr) {
            return evaluate_agent(s, kind, *policy, cfg.disturbance, cfg.seed);
        }
        const auto trained = train_agent(s, kind, cfg.tau);
        return evaluate_agent(s, kind, trained.agent.nets.actor, cfg.disturbance, cfg.seed);
    }
    powertrain::SimResult sim;
    if (strategy == "dp") {
        ems::DpOptions o;
        o.soc_points = cfg.dp_soc_points;
        o.pbat_points = cfg.dp_pbat_points;
        o.soc_ref = cfg.soc_target;
        o.tolerance = cfg.dp_tolerance;
        o.terminal_slope = ems::soc_fuel_slope(plant.battery.state(cfg.soc_target), s.eta_corr);
        sim = ems::dp_solve(plant, s.cycle, cfg.soc0, o).rollout;
    } else if (strategy == "const-ef") {
        const double lambda = cfg.ef > 0.0 ? cfg.ef : s.lambda_star;
        sim = powertrain::simulate(plant, s.cycle, cfg.soc0, ems::constant_ef_policy(plant, s.ctx, lambda));
    } else if (strategy == "a-ecms") {
        ems::PiGains g;
        g.kp = cfg.kp;
        g.ki = cfg.ki;
        g.lambda0 = cfg.lambda0 > 0.0 ? cfg.lambda0 : s.lambda_star;
        sim = powertrain::simulate(plant, s.cycle, cfg.soc0, ems::aecms_policy(plant, s.ctx, g));
    } else if (strategy == "rb") {
        ems::RuleParams rp;
        rp.soc_target = cfg.rb_soc_target > 0.0 ? cfg.rb_soc_target : cfg.soc_target;
        rp.electric_below = cfg.rb_electric_below;
        rp.charge_band = cfg.rb_charge_band;
        rp.charge_power = cfg.rb_charge_power;
        sim = powertrain::simulate(plant, s.cycle, cfg.soc0, ems::rule_based_policy(plant, rp));
    } else {
        throw ValidationError("unknown strategy '" + strategy + "'");
    }
    return report_for(s, strategy, sim);
}

/// Full-cycle simulation under cfg.strategy. RL strategies load cfg.policy when set.
inline MetricsReport run_scenario(const RunConfig& cfg)
{
    const Setup s = prepare(cfg);
    if (!s.cfg.policy.empty() && (s.cfg.strategy == "rl-ecms" || s.cfg.strategy == "rl")) {
        const auto actor = rl::load_policy(s.cfg.policy);
        return run_strategy(s, s.cfg.strategy, &actor);
    }
    return run_strategy(s, s.cfg.strategy);
}

} // namespace hevlab::harness
