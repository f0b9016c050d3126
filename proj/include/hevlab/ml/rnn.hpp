#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hevlab/ml/core.hpp"

namespace hevlab::ml {

/// Vanilla recurrent cell h = tanh(W_x x + W_h h_prev + b) with a linear head on the last state.
/// Flat layout: W_x (H x I), W_h (H x H), b (H), head weights (H), head bias (1).
class RnnWeights {
public:
    RnnWeights() = default;
    RnnWeights(int input_dim, int hidden_dim) : input_(input_dim), hidden_(hidden_dim)
    {
        if (input_dim <= 0 || hidden_dim <= 0) {
            throw DimensionError("RNN dimensions must be positive");
        }
        params_ = Vec::Zero(hidden_ * input_ + hidden_ * hidden_ + 2 * hidden_ + 1);
    }

    static RnnWeights init(int input_dim, int hidden_dim, std::uint64_t seed)
    {
        RnnWeights w(input_dim, hidden_dim);
        std::mt19937_64 rng(seed);
        uniform_fill(w.params_, input_dim + hidden_dim, rng);
        return w;
    }

    [[nodiscard]] int input_dim() const noexcept { return input_; }
    [[nodiscard]] int hidden_dim() const noexcept { return hidden_; }
    [[nodiscard]] Eigen::Index num_params() const noexcept { return params_.size(); }
    [[nodiscard]] Vec& params() noexcept { return params_; }
    [[nodiscard]] const Vec& params() const noexcept { return params_; }

    [[nodiscard]] ConstMatView W_x() const { return {params_.data(), hidden_, input_}; }
    [[nodiscard]] ConstMatView W_h() const { return {params_.data() + off_wh(), hidden_, hidden_}; }
    [[nodiscard]] ConstVecView bias() const { return {params_.data() + off_b(), hidden_}; }
    [[nodiscard]] ConstVecView head_w() const { return {params_.data() + off_head(), hidden_}; }
    [[nodiscard]] double head_b() const { return params_[off_head() + hidden_]; }

    [[nodiscard]] Eigen::Index off_wh() const { return hidden_ * input_; }
    [[nodiscard]] Eigen::Index off_b() const { return off_wh() + hidden_ * hidden_; }
    [[nodiscard]] Eigen::Index off_head() const { return off_b() + hidden_; }

private:
    int input_ = 0;
    int hidden_ = 0;
    Vec params_;
};

struct RnnSequenceCache {
    std::vector<Vec> xs;
    std::vector<Vec> hs; ///< hs[0] = 0, hs[t+1] after step t
    double output = 0.0;
};

inline RnnSequenceCache rnn_sequence_forward(const Mat& xs, const RnnWeights& w)
{
    if (xs.rows() == 0) {
        throw DomainError("rnn_sequence_forward: empty sequence");
    }
    if (xs.cols() != w.input_dim()) {
        throw DimensionError("rnn_sequence_forward: input width mismatch");
    }
    RnnSequenceCache cache;
    cache.hs.push_back(Vec::Zero(w.hidden_dim()));
    for (Eigen::Index t = 0; t < xs.rows(); ++t) {
        Vec x = xs.row(t).transpose();
        cache.hs.push_back(tanh(Vec(w.W_x() * x + w.W_h() * cache.hs.back() + w.bias())));
        cache.xs.push_back(std::move(x));
    }
    cache.output = w.head_w().dot(cache.hs.back()) + w.head_b();
    return cache;
}

inline double rnn_predict(const Mat& xs, const RnnWeights& w) { return rnn_sequence_forward(xs, w).output; }

inline void rnn_backward(const RnnSequenceCache& cache, double d_out, const RnnWeights& w, Vec& grad)
{
    if (cache.xs.empty()) {
        throw StateError("rnn_backward: no forward cache");
    }
    const int H = w.hidden_dim();
    const int I = w.input_dim();
    MatView gwx(grad.data(), H, I);
    MatView gwh(grad.data() + w.off_wh(), H, H);
    VecView gb(grad.data() + w.off_b(), H);
    VecView ghw(grad.data() + w.off_head(), H);
    ghw += d_out * cache.hs.back();
    grad[w.off_head() + H] += d_out;
    Vec dh = d_out * w.head_w();
    for (std::size_t t = cache.xs.size(); t-- > 0;) {
        const Vec& h = cache.hs[t + 1];
        const Vec dz = dh.cwiseProduct((Vec::Ones(H) - h.cwiseProduct(h)));
        gwx.noalias() += dz * cache.xs[t].transpose();
        gwh.noalias() += dz * cache.hs[t].transpose();
        gb += dz;
        dh = w.W_h().transpose() * dz;
    }
}

} // namespace hevlab::ml
