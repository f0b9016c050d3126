// hevlab command line: runs scenarios and studies from a flat key = value config.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hevlab/harness/studies.hpp"

using namespace hevlab;
using namespace hevlab::harness;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool full = false;
    std::vector<std::string> overrides;
};

RunConfig load(const Globals& g)
{
    RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
    for (const auto& o : g.overrides) {
        apply_override(cfg, o);
    }
    if (g.seed) {
        cfg.seed = *g.seed;
    }
    cfg.full = cfg.full || g.full;
    cfg.validate();
    return cfg;
}

void print_summary(const MetricsReport& r)
{
    std::printf("strategy=%s cycle=%s final_soc_pct=%.3f fuel_l=%.5f economy=%.3f corrected_fuel_l=%.5f "
                "corrected_economy=%.3f starts=%d fluctuation_pct=%.2f\n",
                r.strategy.c_str(), r.cycle.c_str(), r.final_soc_pct, r.fuel_l, r.fuel_economy, r.corrected_fuel_l,
                r.corrected_economy, r.starts, r.fluctuation_pct);
}

void maybe_export(const MetricsReport& r, const std::string& out, const std::string& format)
{
    if (out.empty()) {
        return;
    }
    export_report(r, out, parse_report_format(format));
    std::printf("wrote %s\n", out.c_str());
}

void ensure_parent(const std::string& path)
{
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
}

/// Loads a policy from `path`, or trains one when the path is empty.
ml::MlpWeights policy_for(const Setup& s, const std::string& tag, const std::string& path)
{
    if (!path.empty()) {
        return rl::load_policy(path);
    }
    std::fprintf(stderr, "training %s (%d episodes)\n", tag.c_str(), s.cfg.episodes);
    return train_agent(s, rl::parse_env_kind(tag), s.cfg.tau).agent.nets.actor;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hevlab: HEV energy-management experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "flat key = value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_flag("--full", g.full, "WLTC cycle and 200/150/100/50 networks");
    app.add_option("--set", g.overrides, "config override key=value (repeatable)");

    std::string strategy;
    std::string out;
    std::string format = "json";
    auto* sim = app.add_subcommand("simulate", "one full-cycle run");
    sim->add_option("--strategy", strategy, "dp | rl-ecms | rl | a-ecms | rb | const-ef");
    sim->add_option("--out", out, "report path");
    sim->add_option("--format", format, "csv | json");

    auto* exp = app.add_subcommand("export", "run and write the report");
    exp->add_option("--strategy", strategy);
    exp->add_option("--out", out)->required();
    exp->add_option("--format", format)->required();

    std::string agent = "rl-ecms";
    std::string policy;
    std::string curve;
    std::optional<double> tau;
    auto* train = app.add_subcommand("train", "train a TD3 agent");
    train->add_option("--agent", agent, "rl-ecms | rl");
    train->add_option("--tau", tau, "SOC penalty weight");
    train->add_option("--policy-out", policy, "actor weights path")->required();
    train->add_option("--curve", curve, "learning curve CSV path");

    std::optional<double> level;
    auto* eval = app.add_subcommand("evaluate", "deterministic rollout of a trained policy");
    eval->add_option("--agent", agent);
    eval->add_option("--policy", policy)->required()->check(CLI::ExistingFile);
    eval->add_option("--level", level, "disturbance level");
    eval->add_option("--out", out);
    eval->add_option("--format", format);

    std::vector<std::string> strategies;
    auto* cmp = app.add_subcommand("compare", "strategy comparison with savings vs rule-based");
    cmp->add_option("--strategies", strategies)->delimiter(',');

    std::vector<double> taus;
    auto* sweep = app.add_subcommand("sweep-tau", "fresh RL-ECMS training per tau");
    sweep->add_option("--taus", taus)->delimiter(',');

    std::string ecms_policy;
    std::string conv_policy;
    std::vector<double> levels;
    auto* dist = app.add_subcommand("disturb", "state-noise study on both agents");
    dist->add_option("--rl-ecms-policy", ecms_policy)->check(CLI::ExistingFile);
    dist->add_option("--rl-policy", conv_policy)->check(CLI::ExistingFile);
    dist->add_option("--levels", levels)->delimiter(',');

    auto* cal = app.add_subcommand("calibrate", "fuel-model comparison on held-out truth windows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = load(g);
        if (!strategy.empty()) {
            cfg.strategy = strategy;
        }
        if (tau) {
            cfg.tau = *tau;
        }
        if (level) {
            cfg.disturbance = *level;
        }
        if (!strategies.empty()) {
            cfg.strategies = strategies;
        }
        if (!taus.empty()) {
            cfg.taus = taus;
        }
        if (!levels.empty()) {
            cfg.levels = levels;
        }
        cfg.validate();
        if (!out.empty()) {
            ensure_parent(out);
        }

        if (*sim || *exp) {
            const auto r = run_scenario(cfg);
            print_summary(r);
            maybe_export(r, out, format);
        } else if (*train) {
            const auto s = prepare(cfg);
            const auto kind = rl::parse_env_kind(agent);
            const auto tr = train_agent(s, kind, cfg.tau);
            ensure_parent(policy);
            rl::save_policy(tr.agent.nets.actor, policy, cfg.seed);
            if (!curve.empty()) {
                ensure_parent(curve);
                rl::write_curve_csv(tr.curve, curve);
            }
            std::printf("episodes=%zu updates=%ld last_return=%.6f wrote %s\n", tr.curve.size(), tr.updates,
                        tr.curve.empty() ? 0.0 : tr.curve.back().ret, policy.c_str());
        } else if (*eval) {
            const auto s = prepare(cfg);
            const auto actor = rl::load_policy(policy);
            const auto r = evaluate_agent(s, rl::parse_env_kind(agent), actor, cfg.disturbance, cfg.seed);
            print_summary(r);
            maybe_export(r, out, format);
        } else if (*cmp) {
            const auto c = compare_strategies(prepare(cfg), cfg.strategies);
            std::printf("strategy,final_soc_pct,fuel_l,economy,corrected_economy,starts,savings_pct\n");
            for (const auto& r : c.rows) {
                std::printf("%s,%.3f,%.5f,%.4f,%.4f,%d,%.2f\n", r.strategy.c_str(), r.final_soc_pct, r.fuel_l,
                            r.fuel_economy, r.corrected_economy, r.starts, r.savings_pct);
            }
        } else if (*sweep) {
            const auto rows = tau_sweep(prepare(cfg), cfg.taus);
            std::printf("tau,final_soc_pct,fuel_l,corrected_fuel_l,corrected_economy,error\n");
            for (const auto& r : rows) {
                std::printf("%.3f,%.3f,%.5f,%.5f,%.4f,%s\n", r.tau, r.final_soc_pct, r.fuel_l, r.corrected_fuel_l,
                            r.corrected_economy, r.error.c_str());
            }
        } else if (*dist) {
            const auto s = prepare(cfg);
            PolicySet ps;
            ps["rl-ecms"] = policy_for(s, "rl-ecms", ecms_policy);
            ps["rl"] = policy_for(s, "rl", conv_policy);
            const auto rows = disturbance_study(s, cfg.levels, ps, cfg.disturbance_seeds);
            std::printf("agent,level,fluctuation_pct,final_soc_pct,fuel_l,fuel_change_pct\n");
            for (const auto& r : rows) {
                std::printf("%s,%.2f,%.3f,%.3f,%.5f,%.3f\n", r.agent.c_str(), r.level, r.fluctuation_pct,
                            r.final_soc_pct, r.fuel_l, r.fuel_change_pct);
            }
        } else if (*cal) {
            const auto rows = calibration_pipeline(cfg);
            std::printf("model,mae_g_s,mse,mre\n");
            for (const auto& r : rows) {
                std::printf("%s,%.5f,%.6f,%.5f\n", r.model.c_str(), r.mae, r.mse, r.mre);
            }
        }
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
