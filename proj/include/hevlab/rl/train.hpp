#pragma once

#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "hevlab/ems/accounting.hpp"
#include "hevlab/rl/env.hpp"
#include "hevlab/rl/td3.hpp"

namespace hevlab::rl {

struct EpisodeRecord {
    int episode = 0;
    double ret = 0.0;
    double fuel_l = 0.0;
    double final_soc = 0.0;
    int steps = 0;
    bool failed = false;
};

struct TrainResult {
    Td3Agent agent;
    std::vector<EpisodeRecord> curve;
    long updates = 0;
};

/// Episode loop with Gaussian exploration on the raw action and one TD3 update per environment
/// step once the buffer holds a full batch. Single-threaded and seeded, so (seed, config) fixes
/// the curve bit for bit.
inline TrainResult train(HevEnv& env, const Hyperparameters& hp, std::uint64_t seed)
{
    hp.validate();
    TrainResult out{make_agent(env.state_dim(), 1, hp, seed), {}, 0};
    Td3Agent& ag = out.agent;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const std::size_t cap = std::min<std::size_t>(hp.buffer, static_cast<std::size_t>(hp.episodes) * env.cycle().size() + 1);
    ReplayBuffer buf(std::max(cap, hp.batch), env.state_dim(), 1);
    for (int e = 0; e < hp.episodes; ++e) {
        const double sigma = hp.exploration(e);
        std::normal_distribution<double> noise(0.0, sigma);
        Vec s = env.reset();
        EpisodeRecord rec;
        rec.episode = e;
        while (!env.done()) {
            const double a = std::clamp(act(ag.nets.actor, s)[0] + noise(rng), -1.0, 1.0);
            StepResult st = env.step(a);
            rec.ret += st.reward;
            rec.failed = rec.failed || st.failed;
            ++rec.steps;
            buf.push({s, Vec::Constant(1, a), hp.reward_scale * st.reward, st.state, st.done});
            s = std::move(st.state);
            if (buf.size() >= hp.batch) {
                td3_update(ag, buf.sample(hp.batch, rng), hp, rng);
            }
        }
        rec.fuel_l = env.result().final_state.fuel_l;
        rec.final_soc = env.result().final_state.battery.soc;
        out.curve.push_back(rec);
    }
    out.updates = ag.updates;
    return out;
}

/// Learning curve as CSV (episode, return, fuel, final_soc).
inline void write_curve_csv(const std::vector<EpisodeRecord>& curve, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    out.precision(12);
    out << "episode,return,fuel,final_soc\n";
    for (const auto& r : curve) {
        out << r.episode << ',' << r.ret << ',' << r.fuel_l << ',' << r.final_soc << '\n';
    }
}

/// std/mean of engine power over engine-on steps, percent; 0 when the engine never runs.
inline double power_fluctuation(const std::vector<powertrain::TraceRow>& trace)
{
    std::vector<double> on;
    for (const auto& r : trace) {
        if (r.engine_on) {
            on.push_back(r.p_ice);
        }
    }
    if (on.empty()) {
        return 0.0;
    }
    double mean = 0.0;
    for (double p : on) {
        mean += p;
    }
    mean /= static_cast<double>(on.size());
    double var = 0.0;
    for (double p : on) {
        var += (p - mean) * (p - mean);
    }
    var /= static_cast<double>(on.size());
    return 100.0 * std::sqrt(var) / mean;
}

struct EvalOptions {
    double level = 0.0;      ///< multiplicative uniform noise +-level on every state channel
    std::uint64_t seed = 1;
    double eta_corr = 0.0;   ///< SOC-correction efficiency; <= 0 uses the context estimate
};

struct EvalMetrics {
    double fuel_l = 0.0;
    double corrected_fuel_l = 0.0;
    double final_soc = 0.0;
    int starts = 0;
    double fluctuation = 0.0; ///< percent
    double ret = 0.0;
    bool failed = false;
    std::string failure;
    powertrain::SimResult sim;
};

/// Deterministic rollout of the actor (no exploration). Disturbance multiplies each normalised
/// state channel by an independent U(1 - level, 1 + level) draw before the actor sees it.
inline EvalMetrics evaluate_policy(const ml::MlpWeights& actor, HevEnv& env, const EvalOptions& opt = {})
{
    if (!(opt.level >= 0.0 && opt.level <= 0.5)) {
        throw ValidationError("evaluate_policy: disturbance level must lie in [0, 0.5]");
    }
    if (actor.input_dim() != env.state_dim()) {
        throw DimensionError("evaluate_policy: policy input does not match the environment state");
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(1.0 - opt.level, 1.0 + opt.level);
    EvalMetrics m;
    Vec s = env.reset();
    while (!env.done()) {
        if (opt.level > 0.0) {
            for (Eigen::Index i = 0; i < s.size(); ++i) {
                s[i] *= u(rng);
            }
        }
        StepResult st = env.step(act(actor, s)[0]);
        m.ret += st.reward;
        if (st.failed) {
            m.failed = true;
            m.failure = st.failure;
        }
        s = std::move(st.state);
    }
    m.sim = env.result();
    const auto& fs = m.sim.final_state;
    m.fuel_l = fs.fuel_l;
    m.final_soc = fs.battery.soc;
    m.starts = fs.start_stop_count;
    m.fluctuation = power_fluctuation(m.sim.trace);
    const double eta = opt.eta_corr > 0.0 ? opt.eta_corr : env.context().eta_ice_est;
    const double soc0 = env.config().soc0;
    m.corrected_fuel_l = ems::soc_corrected_fuel(m.fuel_l, m.final_soc, soc0, env.plant().battery.state(soc0), eta);
    return m;
}

} // namespace hevlab::rl
