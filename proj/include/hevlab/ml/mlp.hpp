#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hevlab/ml/core.hpp"

namespace hevlab::ml {

enum class Activation { linear, relu, tanh };

inline std::string to_string(Activation a)
{
    switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    }
    return "linear";
}

inline Activation parse_activation(const std::string& s)
{
    if (s == "linear") {
        return Activation::linear;
    }
    if (s == "relu") {
        return Activation::relu;
    }
    if (s == "tanh") {
        return Activation::tanh;
    }
    throw ValidationError("unknown activation '" + s + "'");
}

/// Fully connected network. sizes = {in, h1, ..., out}; one activation per layer.
/// Flat layout per layer: W (out x in, row-major) then b (out).
class MlpWeights {
public:
    MlpWeights() = default;
    MlpWeights(std::vector<int> sizes, std::vector<Activation> acts) : sizes_(std::move(sizes)), acts_(std::move(acts))
    {
        if (sizes_.size() < 2 || acts_.size() + 1 != sizes_.size()) {
            throw DimensionError("MLP needs sizes.size() == activations.size() + 1 >= 2");
        }
        Eigen::Index off = 0;
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) {
                throw DimensionError("MLP layer sizes must be positive");
            }
            offsets_.push_back(off);
            off += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
        }
        params_ = Vec::Zero(off);
    }

    static MlpWeights init(std::vector<int> sizes, std::vector<Activation> acts, std::uint64_t seed)
    {
        MlpWeights w(std::move(sizes), std::move(acts));
        std::mt19937_64 rng(seed);
        for (std::size_t l = 0; l < w.num_layers(); ++l) {
            const Eigen::Index n = static_cast<Eigen::Index>(w.sizes_[l + 1]) * (w.sizes_[l] + 1);
            uniform_fill(w.params_.segment(w.offsets_[l], n), w.sizes_[l], rng);
        }
        return w;
    }

    [[nodiscard]] std::size_t num_layers() const noexcept { return acts_.size(); }
    [[nodiscard]] const std::vector<int>& sizes() const noexcept { return sizes_; }
    [[nodiscard]] const std::vector<Activation>& activations() const noexcept { return acts_; }
    [[nodiscard]] int input_dim() const { return sizes_.front(); }
    [[nodiscard]] int output_dim() const { return sizes_.back(); }
    [[nodiscard]] Eigen::Index num_params() const noexcept { return params_.size(); }
    [[nodiscard]] Vec& params() noexcept { return params_; }
    [[nodiscard]] const Vec& params() const noexcept { return params_; }

    MatView W(std::size_t l) { return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]}; }
    VecView b(std::size_t l) { return {params_.data() + bias_offset(l), sizes_[l + 1]}; }
    [[nodiscard]] ConstMatView W(std::size_t l) const { return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]}; }
    [[nodiscard]] ConstVecView b(std::size_t l) const { return {params_.data() + bias_offset(l), sizes_[l + 1]}; }

    [[nodiscard]] Eigen::Index weight_offset(std::size_t l) const { return offsets_[l]; }
    [[nodiscard]] Eigen::Index bias_offset(std::size_t l) const
    {
        return offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l];
    }

private:
    std::vector<int> sizes_;
    std::vector<Activation> acts_;
    std::vector<Eigen::Index> offsets_;
    Vec params_;
};

struct MlpCache {
    std::vector<Mat> inputs; ///< layer inputs, columns are batch samples
    std::vector<Mat> outputs;
    bool valid = false;
};

namespace detail {

inline void activate(Mat& z, Activation a)
{
    switch (a) {
    case Activation::linear: break;
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
    }
}

/// Derivative expressed through the activation output y.
inline Mat activation_grad(const Mat& y, Activation a)
{
    switch (a) {
    case Activation::linear: return Mat::Ones(y.rows(), y.cols());
    case Activation::relu: return (y.array() > 0.0).cast<double>().matrix();
    case Activation::tanh: return (1.0 - y.array().square()).matrix();
    }
    return Mat::Ones(y.rows(), y.cols());
}

} // namespace detail

/// Columns of X are samples.
inline Mat mlp_forward(const Mat& X, const MlpWeights& w, MlpCache* cache = nullptr)
{
    if (X.rows() != w.input_dim()) {
        throw DimensionError("mlp_forward: input rows do not match network input");
    }
    if (cache != nullptr) {
        cache->inputs.clear();
        cache->outputs.clear();
    }
    Mat a = X;
    for (std::size_t l = 0; l < w.num_layers(); ++l) {
        Mat z = w.W(l) * a;
        z.colwise() += w.b(l);
        detail::activate(z, w.activations()[l]);
        if (cache != nullptr) {
            cache->inputs.push_back(std::move(a));
            cache->outputs.push_back(z);
        }
        a = std::move(z);
    }
    if (cache != nullptr) {
        cache->valid = true;
    }
    return a;
}

inline Vec mlp_forward(const Vec& x, const MlpWeights& w)
{
    return mlp_forward(Mat(x), w).col(0);
}

/// Given dL/d(output), accumulates parameter gradients into `grad` and returns dL/dX.
inline Mat mlp_backward(const MlpCache& cache, const Mat& d_out, const MlpWeights& w, Vec& grad)
{
    if (!cache.valid || cache.outputs.size() != w.num_layers()) {
        throw StateError("mlp_backward: no forward cache");
    }
    if (grad.size() != w.num_params()) {
        throw DimensionError("mlp_backward: gradient size mismatch");
    }
    Mat d = d_out;
    for (std::size_t l = w.num_layers(); l-- > 0;) {
        const Mat dz = d.cwiseProduct(detail::activation_grad(cache.outputs[l], w.activations()[l]));
        MatView gW(grad.data() + w.weight_offset(l), w.sizes()[l + 1], w.sizes()[l]);
        VecView gb(grad.data() + w.bias_offset(l), w.sizes()[l + 1]);
        gW.noalias() += dz * cache.inputs[l].transpose();
        gb += dz.rowwise().sum();
        d = w.W(l).transpose() * dz;
    }
    return d;
}

/// Mean over samples of the summed squared error; returns (loss, dL/d(output)).
inline std::pair<double, Mat> squared_error(const Mat& out, const Mat& target)
{
    if (out.rows() != target.rows() || out.cols() != target.cols()) {
        throw DimensionError("squared_error: shape mismatch");
    }
    const Mat diff = out - target;
    const double n = static_cast<double>(out.cols());
    return {diff.squaredNorm() / n, 2.0 * diff / n};
}

/// target <- rate*source + (1-rate)*target.
inline void soft_update(Vec& target, const Vec& source, double rate)
{
    if (target.size() != source.size()) {
        throw DimensionError("soft_update: shape mismatch");
    }
    if (rate == 1.0) {
        target = source;
        return;
    }
    target = rate * source + (1.0 - rate) * target;
}

} // namespace hevlab::ml
