#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hevlab/common/errors.hpp"
#include "hevlab/ml/mlp.hpp"
#include "hevlab/ml/serialize.hpp"
#include "hevlab/rl/replay.hpp"

namespace hevlab::rl {

struct Hyperparameters {
    double gamma = 0.995;
    std::size_t buffer = 1000000;
    double explore_sigma = 0.1;  ///< action-scale Gaussian exploration noise
    double explore_decay = 0.95; ///< per-episode multiplier on explore_sigma
    double explore_floor = 1e-3;
    double target_sigma = 0.2; ///< target-policy smoothing noise
    double noise_clip = 0.5;
    std::size_t batch = 256;
    int delay = 4;
    double soft_rate = 0.005;
    double actor_lr = 1e-4;
    double critic_lr = 1e-4;
    int episodes = 50;
    std::vector<int> hidden{64, 64};
    ml::Activation hidden_activation = ml::Activation::tanh;
    double reward_scale = 1.0; ///< multiplies rewards before they enter the buffer

    void validate() const
    {
        if (!(gamma >= 0.0 && gamma < 1.0)) {
            throw ValidationError("td3: gamma must lie in [0, 1)");
        }
        if (delay < 1) {
            throw ValidationError("td3: update delay must be at least 1");
        }
        if (batch == 0 || batch > buffer) {
            throw ValidationError("td3: need 0 < batch <= buffer");
        }
        if (!(soft_rate >= 0.0 && soft_rate <= 1.0)) {
            throw ValidationError("td3: soft update rate must lie in [0, 1]");
        }
        if (!(actor_lr > 0.0 && critic_lr > 0.0)) {
            throw ValidationError("td3: learning rates must be positive");
        }
        if (explore_sigma < 0.0 || target_sigma < 0.0 || noise_clip < 0.0 || explore_floor < 0.0) {
            throw ValidationError("td3: noise scales must be non-negative");
        }
        if (!(explore_decay > 0.0 && explore_decay <= 1.0)) {
            throw ValidationError("td3: exploration decay must lie in (0, 1]");
        }
        if (episodes < 0) {
            throw ValidationError("td3: episode count must be non-negative");
        }
        if (!(reward_scale > 0.0)) {
            throw ValidationError("td3: reward scale must be positive");
        }
        for (int h : hidden) {
            if (h <= 0) {
                throw ValidationError("td3: hidden layer sizes must be positive");
            }
        }
    }

    /// Exploration standard deviation during episode `e` (0-based).
    [[nodiscard]] double exploration(int e) const
    {
        return std::max(explore_floor, explore_sigma * std::pow(explore_decay, static_cast<double>(e)));
    }
};

struct AgentNetworks {
    ml::MlpWeights actor;
    ml::MlpWeights actor_target;
    ml::MlpWeights critic1;
    ml::MlpWeights critic2;
    ml::MlpWeights critic1_target;
    ml::MlpWeights critic2_target;
};

struct Td3Agent {
    AgentNetworks nets;
    ml::Adam actor_opt;
    ml::Adam critic1_opt;
    ml::Adam critic2_opt;
    long updates = 0;

    [[nodiscard]] int state_dim() const { return nets.actor.input_dim(); }
    [[nodiscard]] int action_dim() const { return nets.actor.output_dim(); }
};

/// Actor: tanh output in [-1, 1]. Critics: Q(s, a) on the stacked input [s; a].
inline Td3Agent make_agent(int state_dim, int action_dim, const Hyperparameters& hp, std::uint64_t seed)
{
    hp.validate();
    std::vector<int> a_sizes{state_dim};
    std::vector<int> c_sizes{state_dim + action_dim};
    std::vector<ml::Activation> acts;
    for (int h : hp.hidden) {
        a_sizes.push_back(h);
        c_sizes.push_back(h);
        acts.push_back(hp.hidden_activation);
    }
    a_sizes.push_back(action_dim);
    c_sizes.push_back(1);
    auto a_acts = acts;
    a_acts.push_back(ml::Activation::tanh);
    auto c_acts = acts;
    c_acts.push_back(ml::Activation::linear);

    Td3Agent ag{{}, ml::Adam(hp.actor_lr), ml::Adam(hp.critic_lr), ml::Adam(hp.critic_lr), 0};
    ag.nets.actor = ml::MlpWeights::init(a_sizes, a_acts, seed);
    ag.nets.critic1 = ml::MlpWeights::init(c_sizes, c_acts, seed + 1);
    ag.nets.critic2 = ml::MlpWeights::init(c_sizes, c_acts, seed + 2);
    ag.nets.actor_target = ag.nets.actor;
    ag.nets.critic1_target = ag.nets.critic1;
    ag.nets.critic2_target = ag.nets.critic2;
    return ag;
}

inline Mat stack(const Mat& s, const Mat& a)
{
    if (s.cols() != a.cols()) {
        throw DimensionError("stack: state and action batch sizes differ");
    }
    Mat x(s.rows() + a.rows(), s.cols());
    x << s, a;
    return x;
}

/// Deterministic policy output for one state.
inline Vec act(const ml::MlpWeights& actor, const Vec& s)
{
    return ml::mlp_forward(s, actor);
}

/// TD3 targets y = r + gamma * (1 - done) * min(Q1', Q2') at the smoothed target action.
/// `twin = false` uses Q1' alone.
inline Vec td3_targets(const AgentNetworks& nets, const Batch& b, const Hyperparameters& hp, std::mt19937_64& rng,
                       bool twin = true)
{
    Mat a_next = ml::mlp_forward(b.s_next, nets.actor_target);
    if (hp.target_sigma > 0.0) {
        std::normal_distribution<double> n(0.0, hp.target_sigma);
        for (Eigen::Index k = 0; k < a_next.size(); ++k) {
            a_next.data()[k] += std::clamp(n(rng), -hp.noise_clip, hp.noise_clip);
        }
    }
    a_next = a_next.cwiseMax(-1.0).cwiseMin(1.0);
    const Mat x = stack(b.s_next, a_next);
    const Vec q1 = ml::mlp_forward(x, nets.critic1_target).row(0).transpose();
    Vec q = q1;
    if (twin) {
        const Vec q2 = ml::mlp_forward(x, nets.critic2_target).row(0).transpose();
        q = q1.cwiseMin(q2);
    }
    return b.r + hp.gamma * (Vec::Ones(b.size()) - b.done).cwiseProduct(q);
}

/// Mean squared TD error of one critic against fixed targets; gradient added to `grad`.
inline double critic_loss(const ml::MlpWeights& critic, const Mat& x, const Vec& y, Vec* grad = nullptr)
{
    ml::MlpCache cache;
    const Mat q = ml::mlp_forward(x, critic, grad != nullptr ? &cache : nullptr);
    const auto [loss, d] = ml::squared_error(q, y.transpose());
    if (grad != nullptr) {
        ml::mlp_backward(cache, d, critic, *grad);
    }
    return loss;
}

/// -mean Q(s, actor(s)); gradient with respect to the actor parameters added to `grad`.
inline double actor_loss(const ml::MlpWeights& actor, const ml::MlpWeights& critic, const Mat& s, Vec* grad = nullptr)
{
    ml::MlpCache a_cache;
    const Mat a = ml::mlp_forward(s, actor, &a_cache);
    ml::MlpCache c_cache;
    const Mat q = ml::mlp_forward(stack(s, a), critic, &c_cache);
    const double n = static_cast<double>(s.cols());
    const double loss = -q.sum() / n;
    if (grad != nullptr) {
        Vec scratch = Vec::Zero(critic.num_params());
        const Mat dx = ml::mlp_backward(c_cache, Mat::Constant(1, s.cols(), -1.0 / n), critic, scratch);
        ml::mlp_backward(a_cache, dx.bottomRows(a.rows()), actor, *grad);
    }
    return loss;
}

struct Td3Diagnostics {
    double critic1_loss = 0.0;
    double critic2_loss = 0.0;
    double actor_loss = std::numeric_limits<double>::quiet_NaN(); ///< NaN on non-actor steps
    bool actor_updated = false;
    double mean_target = 0.0;
};

inline void soft_update(ml::MlpWeights& target, const ml::MlpWeights& source, double rate)
{
    ml::soft_update(target.params(), source.params(), rate);
}

/// One TD3 iteration on a sampled batch: both critics regress to the twin-min target; every
/// `delay`-th call the actor follows the deterministic policy gradient of critic 1 and all
/// targets move toward their evaluate networks.
inline Td3Diagnostics td3_update(Td3Agent& ag, const Batch& b, const Hyperparameters& hp, std::mt19937_64& rng)
{
    Td3Diagnostics d;
    const Vec y = td3_targets(ag.nets, b, hp, rng);
    d.mean_target = y.mean();
    const Mat x = stack(b.s, b.a);
    Vec g1 = Vec::Zero(ag.nets.critic1.num_params());
    Vec g2 = Vec::Zero(ag.nets.critic2.num_params());
    d.critic1_loss = critic_loss(ag.nets.critic1, x, y, &g1);
    d.critic2_loss = critic_loss(ag.nets.critic2, x, y, &g2);
    ++ag.updates;
    const auto abort = [&](const std::string& what) {
        std::ostringstream os;
        os << "td3_update: non-finite " << what << " at update " << ag.updates << " (critic losses " << d.critic1_loss
           << ", " << d.critic2_loss << ", mean target " << d.mean_target << ")";
        return TrainingError(os.str());
    };
    if (!std::isfinite(d.critic1_loss) || !std::isfinite(d.critic2_loss) || !g1.allFinite() || !g2.allFinite()) {
        throw abort("critic loss");
    }
    ag.critic1_opt.step(ag.nets.critic1.params(), g1);
    ag.critic2_opt.step(ag.nets.critic2.params(), g2);
    if (ag.updates % hp.delay == 0) {
        Vec ga = Vec::Zero(ag.nets.actor.num_params());
        d.actor_loss = actor_loss(ag.nets.actor, ag.nets.critic1, b.s, &ga);
        if (!std::isfinite(d.actor_loss) || !ga.allFinite()) {
            throw abort("actor loss");
        }
        ag.actor_opt.step(ag.nets.actor.params(), ga);
        soft_update(ag.nets.actor_target, ag.nets.actor, hp.soft_rate);
        soft_update(ag.nets.critic1_target, ag.nets.critic1, hp.soft_rate);
        soft_update(ag.nets.critic2_target, ag.nets.critic2, hp.soft_rate);
        d.actor_updated = true;
    }
    return d;
}

inline void save_policy(const ml::MlpWeights& actor, const std::string& path, std::uint64_t seed = 0)
{
    ml::write_json(ml::to_json(actor, seed), path);
}

inline ml::MlpWeights load_policy(const std::string& path)
{
    return ml::mlp_from_json(ml::read_json(path));
}

} // namespace hevlab::rl
