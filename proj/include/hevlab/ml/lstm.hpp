#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "hevlab/ml/core.hpp"

namespace hevlab::ml {

enum class Gate { input = 0, forget = 1, cell = 2, output = 3 };

/// Peephole LSTM cell plus a linear read-out of the final hidden state. All parameters live in
/// one flat vector; the accessors are row-major views into it.
///
/// Layout per gate (input, forget, cell, output): W_x (H x I), W_h (H x H), peephole (H, absent for
/// the cell candidate), bias (H). Then the head: weights (H), bias (1).
class LstmWeights {
public:
    LstmWeights() = default;
    LstmWeights(int input_dim, int hidden_dim) : input_(input_dim), hidden_(hidden_dim)
    {
        if (input_dim <= 0 || hidden_dim <= 0) {
            throw DimensionError("LSTM dimensions must be positive");
        }
        std::size_t off = 0;
        for (int g = 0; g < 4; ++g) {
            auto& b = blocks_[static_cast<std::size_t>(g)];
            b.wx = off;
            off += static_cast<std::size_t>(hidden_ * input_);
            b.wh = off;
            off += static_cast<std::size_t>(hidden_ * hidden_);
            if (g != static_cast<int>(Gate::cell)) {
                b.peep = off;
                off += static_cast<std::size_t>(hidden_);
            }
            b.bias = off;
            off += static_cast<std::size_t>(hidden_);
        }
        head_ = off;
        off += static_cast<std::size_t>(hidden_) + 1;
        params_ = Vec::Zero(static_cast<Eigen::Index>(off));
    }

    static LstmWeights init(int input_dim, int hidden_dim, std::uint64_t seed)
    {
        LstmWeights w(input_dim, hidden_dim);
        std::mt19937_64 rng(seed);
        uniform_fill(w.params_, input_dim + hidden_dim, rng);
        w.head_w() *= std::sqrt(static_cast<double>(input_dim + hidden_dim) / hidden_dim);
        return w;
    }

    [[nodiscard]] int input_dim() const noexcept { return input_; }
    [[nodiscard]] int hidden_dim() const noexcept { return hidden_; }
    [[nodiscard]] Eigen::Index num_params() const noexcept { return params_.size(); }
    [[nodiscard]] Vec& params() noexcept { return params_; }
    [[nodiscard]] const Vec& params() const noexcept { return params_; }

    MatView W_x(Gate g) { return {ptr(block(g).wx), hidden_, input_}; }
    MatView W_h(Gate g) { return {ptr(block(g).wh), hidden_, hidden_}; }
    VecView peephole(Gate g) { return {ptr(checked_peep(g)), hidden_}; }
    VecView bias(Gate g) { return {ptr(block(g).bias), hidden_}; }
    VecView head_w() { return {ptr(head_), hidden_}; }
    double& head_b() { return params_[static_cast<Eigen::Index>(head_) + hidden_]; }

    [[nodiscard]] ConstMatView W_x(Gate g) const { return {cptr(block(g).wx), hidden_, input_}; }
    [[nodiscard]] ConstMatView W_h(Gate g) const { return {cptr(block(g).wh), hidden_, hidden_}; }
    [[nodiscard]] ConstVecView peephole(Gate g) const { return {cptr(checked_peep(g)), hidden_}; }
    [[nodiscard]] ConstVecView bias(Gate g) const { return {cptr(block(g).bias), hidden_}; }
    [[nodiscard]] ConstVecView head_w() const { return {cptr(head_), hidden_}; }
    [[nodiscard]] double head_b() const { return params_[static_cast<Eigen::Index>(head_) + hidden_]; }

    /// Offsets for gradient views into a vector laid out like params().
    [[nodiscard]] std::size_t offset_wx(Gate g) const { return block(g).wx; }
    [[nodiscard]] std::size_t offset_wh(Gate g) const { return block(g).wh; }
    [[nodiscard]] std::size_t offset_peep(Gate g) const { return checked_peep(g); }
    [[nodiscard]] std::size_t offset_bias(Gate g) const { return block(g).bias; }
    [[nodiscard]] std::size_t offset_head() const { return head_; }

private:
    struct Block {
        std::size_t wx = 0;
        std::size_t wh = 0;
        std::size_t peep = 0;
        std::size_t bias = 0;
    };

    [[nodiscard]] const Block& block(Gate g) const { return blocks_[static_cast<std::size_t>(g)]; }
    [[nodiscard]] std::size_t checked_peep(Gate g) const
    {
        if (g == Gate::cell) {
            throw DimensionError("the cell candidate has no peephole");
        }
        return block(g).peep;
    }
    double* ptr(std::size_t off) { return params_.data() + off; }
    [[nodiscard]] const double* cptr(std::size_t off) const { return params_.data() + off; }

    int input_ = 0;
    int hidden_ = 0;
    std::array<Block, 4> blocks_{};
    std::size_t head_ = 0;
    Vec params_;
};

struct LstmStepCache {
    Vec x, h_prev, c_prev, i, f, g, o, c, tanh_c, h;
};

struct LstmCellOutput {
    Vec h;
    Vec c;
    LstmStepCache cache;
};

/// i = s(Wxi x + Whi h + wci.c_prev + bi), f likewise, g = tanh(Wxc x + Whc h + bc),
/// c = f.c_prev + i.g, o = s(Wxo x + Who h + wco.c + bo), h = o.tanh(c).
inline LstmCellOutput lstm_cell_forward(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmWeights& w)
{
    if (x.size() != w.input_dim() || h_prev.size() != w.hidden_dim() || c_prev.size() != w.hidden_dim()) {
        throw DimensionError("lstm_cell_forward: shape mismatch");
    }
    LstmCellOutput out;
    auto& k = out.cache;
    k.x = x;
    k.h_prev = h_prev;
    k.c_prev = c_prev;
    k.i = sigmoid(Vec(w.W_x(Gate::input) * x + w.W_h(Gate::input) * h_prev
                      + w.peephole(Gate::input).cwiseProduct(c_prev) + w.bias(Gate::input)));
    k.f = sigmoid(Vec(w.W_x(Gate::forget) * x + w.W_h(Gate::forget) * h_prev
                      + w.peephole(Gate::forget).cwiseProduct(c_prev) + w.bias(Gate::forget)));
    k.g = tanh(Vec(w.W_x(Gate::cell) * x + w.W_h(Gate::cell) * h_prev + w.bias(Gate::cell)));
    k.c = k.f.cwiseProduct(c_prev) + k.i.cwiseProduct(k.g);
    k.o = sigmoid(Vec(w.W_x(Gate::output) * x + w.W_h(Gate::output) * h_prev
                      + w.peephole(Gate::output).cwiseProduct(k.c) + w.bias(Gate::output)));
    k.tanh_c = tanh(k.c);
    k.h = k.o.cwiseProduct(k.tanh_c);
    out.h = k.h;
    out.c = k.c;
    return out;
}

struct LstmSequenceCache {
    std::vector<LstmStepCache> steps;
    double output = 0.0;
};

/// Rows of `xs` are time steps. State starts at zero; the head reads the last hidden state.
inline LstmSequenceCache lstm_sequence_forward(const Mat& xs, const LstmWeights& w)
{
    if (xs.rows() == 0) {
        throw DomainError("lstm_sequence_forward: empty sequence");
    }
    if (xs.cols() != w.input_dim()) {
        throw DimensionError("lstm_sequence_forward: input width mismatch");
    }
    LstmSequenceCache cache;
    cache.steps.reserve(static_cast<std::size_t>(xs.rows()));
    Vec h = Vec::Zero(w.hidden_dim());
    Vec c = Vec::Zero(w.hidden_dim());
    for (Eigen::Index t = 0; t < xs.rows(); ++t) {
        auto step = lstm_cell_forward(xs.row(t).transpose(), h, c, w);
        h = std::move(step.h);
        c = std::move(step.c);
        cache.steps.push_back(std::move(step.cache));
    }
    cache.output = w.head_w().dot(h) + w.head_b();
    return cache;
}

inline double lstm_predict(const Mat& xs, const LstmWeights& w) { return lstm_sequence_forward(xs, w).output; }

/// Backpropagation through the window. Accumulates dL/dparams into `grad` given dL/d(output).
inline void lstm_backward(const LstmSequenceCache& cache, double d_out, const LstmWeights& w, Vec& grad)
{
    if (cache.steps.empty()) {
        throw StateError("lstm_backward: no forward cache");
    }
    if (grad.size() != w.num_params()) {
        throw DimensionError("lstm_backward: gradient size mismatch");
    }
    const int H = w.hidden_dim();
    const int I = w.input_dim();
    auto gmat = [&](std::size_t off, int rows, int cols) { return MatView(grad.data() + off, rows, cols); };
    auto gvec = [&](std::size_t off, int n) { return VecView(grad.data() + off, n); };

    const Vec& h_last = cache.steps.back().h;
    gvec(w.offset_head(), H) += d_out * h_last;
    grad[static_cast<Eigen::Index>(w.offset_head()) + H] += d_out;

    Vec dh = d_out * w.head_w();
    Vec dc_next = Vec::Zero(H);
    for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
        const auto& k = *it;
        const Vec ones = Vec::Ones(H);
        const Vec dzo = dh.cwiseProduct(k.tanh_c).cwiseProduct(k.o.cwiseProduct(ones - k.o));
        const Vec dc = dc_next + dh.cwiseProduct(k.o).cwiseProduct(ones - k.tanh_c.cwiseProduct(k.tanh_c))
                       + dzo.cwiseProduct(w.peephole(Gate::output));
        const Vec dzi = dc.cwiseProduct(k.g).cwiseProduct(k.i.cwiseProduct(ones - k.i));
        const Vec dzf = dc.cwiseProduct(k.c_prev).cwiseProduct(k.f.cwiseProduct(ones - k.f));
        const Vec dzg = dc.cwiseProduct(k.i).cwiseProduct(ones - k.g.cwiseProduct(k.g));

        const std::array<std::pair<Gate, const Vec*>, 4> dz{
            {{Gate::input, &dzi}, {Gate::forget, &dzf}, {Gate::cell, &dzg}, {Gate::output, &dzo}}};
        Vec dh_prev = Vec::Zero(H);
        for (const auto& [gate, d] : dz) {
            gmat(w.offset_wx(gate), H, I).noalias() += (*d) * k.x.transpose();
            gmat(w.offset_wh(gate), H, H).noalias() += (*d) * k.h_prev.transpose();
            gvec(w.offset_bias(gate), H) += *d;
            dh_prev.noalias() += w.W_h(gate).transpose() * (*d);
        }
        gvec(w.offset_peep(Gate::input), H) += dzi.cwiseProduct(k.c_prev);
        gvec(w.offset_peep(Gate::forget), H) += dzf.cwiseProduct(k.c_prev);
        gvec(w.offset_peep(Gate::output), H) += dzo.cwiseProduct(k.c);

        dc_next = dc.cwiseProduct(k.f) + dzi.cwiseProduct(w.peephole(Gate::input))
                  + dzf.cwiseProduct(w.peephole(Gate::forget));
        dh = std::move(dh_prev);
    }
}

} // namespace hevlab::ml
