#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "hevlab/harness/scenario.hpp"

namespace hevlab::harness {

/// Percent saving of corrected economy against the rule-based value.
inline double savings_vs(double corrected_economy, double rb_corrected_economy)
{
    if (!(rb_corrected_economy > 0.0)) {
        throw DomainError("savings: rule-based corrected economy must be positive");
    }
    return 100.0 * (rb_corrected_economy - corrected_economy) / rb_corrected_economy;
}

/// Pre-trained actors keyed by strategy tag ("rl-ecms", "rl").
using PolicySet = std::map<std::string, ml::MlpWeights>;

struct Comparison {
    std::vector<MetricsReport> rows; ///< in request order, savings filled
    MetricsReport rule_based;        ///< the savings reference
};

/// One report per strategy plus a savings column against rule-based; RB runs even when it is
/// not in the list.
inline Comparison compare_strategies(const Setup& s, const std::vector<std::string>& list, const PolicySet& policies = {})
{
    if (list.empty()) {
        throw ValidationError("compare_strategies: empty strategy list");
    }
    Comparison c;
    auto run = [&](const std::string& tag) {
        const auto it = policies.find(tag);
        return run_strategy(s, tag, it == policies.end() ? nullptr : &it->second);
    };
    bool have_rb = false;
    for (const auto& tag : list) {
        c.rows.push_back(run(tag));
        if (tag == "rb" && !have_rb) {
            c.rule_based = c.rows.back();
            have_rb = true;
        }
    }
    if (!have_rb) {
        c.rule_based = run("rb");
    }
    c.rule_based.savings_pct = 0.0;
    for (auto& r : c.rows) {
        r.savings_pct = savings_vs(r.corrected_economy, c.rule_based.corrected_economy);
    }
    return c;
}

inline Comparison compare_strategies(const RunConfig& cfg, const std::vector<std::string>& list)
{
    return compare_strategies(prepare(cfg), list);
}

struct TauRow {
    double tau = 0.0;
    double final_soc_pct = 0.0;
    double fuel_l = 0.0;
    double corrected_fuel_l = 0.0;
    double corrected_economy = 0.0;
    bool ok = true;
    std::string error; ///< training or rollout failure for this cell
};

/// Fresh RL-ECMS training per tau; rows sorted by tau.
inline std::vector<TauRow> tau_sweep(const Setup& s, std::vector<double> taus)
{
    std::sort(taus.begin(), taus.end());
    std::vector<TauRow> rows;
    for (double tau : taus) {
        TauRow row;
        row.tau = tau;
        try {
            const auto tr = train_agent(s, rl::EnvKind::rl_ecms, tau);
            const auto r = evaluate_agent(s, rl::EnvKind::rl_ecms, tr.agent.nets.actor, s.cfg.disturbance, s.cfg.seed);
            row.final_soc_pct = r.final_soc_pct;
            row.fuel_l = r.fuel_l;
            row.corrected_fuel_l = r.corrected_fuel_l;
            row.corrected_economy = r.corrected_economy;
        } catch (const Error& e) {
            row.ok = false;
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

struct DisturbanceRow {
    std::string agent;
    double level = 0.0;
    double fluctuation_pct = 0.0; ///< seed mean
    double final_soc_pct = 0.0;   ///< seed mean
    double fuel_l = 0.0;          ///< seed mean
    double fuel_change_pct = 0.0; ///< vs the same agent at level 0
};

/// Each (agent, level) cell averages `seeds` noisy rollouts with seeds cfg.seed + 1 ... The
/// level-0 baseline is always computed, listed or not.
inline std::vector<DisturbanceRow> disturbance_study(const Setup& s, const std::vector<double>& levels,
                                                     const PolicySet& policies, int seeds)
{
    if (seeds < 1) {
        throw ValidationError("disturbance_study: need at least one seed");
    }
    std::vector<DisturbanceRow> rows;
    for (const auto& [tag, actor] : policies) {
        const auto kind = rl::parse_env_kind(tag);
        auto cell = [&](double level) {
            DisturbanceRow row;
            row.agent = tag;
            row.level = level;
            for (int i = 1; i <= seeds; ++i) {
                const auto r = evaluate_agent(s, kind, actor, level, s.cfg.seed + static_cast<std::uint64_t>(i));
                row.fluctuation_pct += r.fluctuation_pct / seeds;
                row.final_soc_pct += r.final_soc_pct / seeds;
                row.fuel_l += r.fuel_l / seeds;
            }
            return row;
        };
        const auto base = cell(0.0);
        for (double level : levels) {
            auto row = level == 0.0 ? base : cell(level);
            row.fuel_change_pct = base.fuel_l > 0.0 ? 100.0 * (row.fuel_l - base.fuel_l) / base.fuel_l : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

struct CalibrationRow {
    std::string model;
    double mae = 0.0; ///< g/s
    double mse = 0.0; ///< (g/s)^2
    double mre = 0.0;
};

/// Fuel-model comparison on held-out windows of the default truth recipe over WLTC: the three
/// physical models and the RNN- and LSTM-corrected averaged model.
inline std::vector<CalibrationRow> calibration_pipeline(const RunConfig& config,
                                                        const calib::TruthGeneratorSpec& recipe = {})
{
    const RunConfig cfg = effective(config);
    const auto plant = powertrain::reference_plant(powertrain::FuelSource::averaged);
    const calib::CorrectionDataset ds(calib::generate_truth(plant, cycle::builtin_cycle("wltc", cfg.dt), recipe), 10);
    const auto opt = calibration_options(cfg, calib::ModelKind::lstm);
    const auto ends = calib::block_split(ds, calib::Target::fuel, opt.block, opt.holdout_every).test;
    auto row = [](std::string name, const calib::ErrorMetrics& m) {
        return CalibrationRow{std::move(name), m.mae * 1e3, m.mse * 1e6, m.mre};
    };
    auto physical = [&](const std::vector<double>& signal) {
        std::vector<double> pred;
        std::vector<double> truth;
        for (auto k : ends) {
            pred.push_back(signal[k]);
            truth.push_back(ds.trace.mdot_r[k]);
        }
        return calib::error_metrics(pred, truth);
    };
    std::vector<CalibrationRow> rows;
    rows.push_back(row("dynamic", physical(ds.trace.mdot_d)));
    rows.push_back(row("quasi-static", physical(ds.trace.mdot_q)));
    rows.push_back(row("averaged", physical(ds.trace.mdot_a)));
    const auto rnn = calib::train_fuel_correction(ds, calibration_options(cfg, calib::ModelKind::rnn));
    rows.push_back(row("rnn-corrected", rnn.test));
    const auto lstm = calib::train_fuel_correction(ds, opt);
    rows.push_back(row("lstm-corrected", lstm.test));
    return rows;
}

} // namespace hevlab::harness
