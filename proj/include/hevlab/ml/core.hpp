#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "hevlab/common/errors.hpp"

namespace hevlab::ml {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatView = Eigen::Map<RowMat>;
using ConstMatView = Eigen::Map<const RowMat>;
using VecView = Eigen::Map<Vec>;
using ConstVecView = Eigen::Map<const Vec>;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline Vec sigmoid(const Vec& z)
{
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

inline Vec tanh(const Vec& z)
{
    return z.array().tanh().matrix();
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) fill of a parameter block.
inline void uniform_fill(Eigen::Ref<Vec> block, int fan_in, std::mt19937_64& rng)
{
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(fan_in, 1)));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index k = 0; k < block.size(); ++k) {
        block[k] = u(rng);
    }
}

/// Adaptive-moment optimizer with bias correction.
class Adam {
public:
    explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps)
    {
        if (!(lr > 0.0)) {
            throw ValidationError("Adam: learning rate must be positive");
        }
    }

    void step(Vec& params, const Vec& grad)
    {
        if (grad.size() != params.size()) {
            throw DimensionError("Adam: gradient size does not match parameters");
        }
        if (m_.size() != params.size()) {
            m_ = Vec::Zero(params.size());
            v_ = Vec::Zero(params.size());
            t_ = 0;
        }
        ++t_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
        v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (Eigen::Index k = 0; k < params.size(); ++k) {
            params[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
        }
    }

    [[nodiscard]] double lr() const noexcept { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    [[nodiscard]] long steps() const noexcept { return t_; }

private:
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    Vec m_;
    Vec v_;
    long t_ = 0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    Eigen::Index worst_index = -1;
    double perturbation = 1e-5;
    std::size_t checked = 0;
};

inline double relative_error(double a, double n)
{
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-12});
}

/// Central finite differences on at most `max_params` parameters (evenly strided when the model
/// is larger), compared with the analytic gradient.
inline GradCheckReport finite_difference_check(const std::function<double(const Vec&)>& loss, const Vec& params,
                                               const Vec& analytic, double h = 1e-5, std::size_t max_params = 200)
{
    if (analytic.size() != params.size()) {
        throw DimensionError("finite_difference_check: gradient size mismatch");
    }
    GradCheckReport rep;
    rep.perturbation = h;
    const auto n = static_cast<std::size_t>(params.size());
    const std::size_t count = std::min(n, max_params);
    Vec p = params;
    for (std::size_t s = 0; s < count; ++s) {
        const auto k = static_cast<Eigen::Index>(count == n ? s : (s * n) / count);
        const double orig = p[k];
        p[k] = orig + h;
        const double up = loss(p);
        p[k] = orig - h;
        const double down = loss(p);
        p[k] = orig;
        const double numeric = (up - down) / (2.0 * h);
        const double err = relative_error(analytic[k], numeric);
        if (rep.worst_index < 0 || err > rep.max_rel_error) {
            rep.max_rel_error = err;
            rep.worst_index = k;
        }
        ++rep.checked;
    }
    return rep;
}

} // namespace hevlab::ml
