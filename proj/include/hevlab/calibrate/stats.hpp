#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "hevlab/common/errors.hpp"

namespace hevlab::calib {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double mean(std::span<const double> x)
{
    CompensatedSum s;
    for (double v : x) {
        s.add(v);
    }
    return s.value() / static_cast<double>(x.size());
}

/// Pearson correlation: centred cross-products over the root of centred squares.
inline double pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw DimensionError("pearson: length mismatch");
    }
    if (x.size() < 2) {
        throw DomainError("pearson: need at least two samples");
    }
    const double mx = mean(x);
    const double my = mean(y);
    CompensatedSum sxy;
    CompensatedSum sxx;
    CompensatedSum syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    if (!(sxx.value() > 0.0) || !(syy.value() > 0.0)) {
        throw DomainError("pearson: zero variance, correlation undefined");
    }
    const double r = sxy.value() / std::sqrt(sxx.value() * syy.value());
    return std::clamp(r, -1.0, 1.0);
}

/// Symmetric matrix of pairwise correlations; constant columns get 0 off-diagonal.
inline std::vector<std::vector<double>> correlation_matrix(const std::vector<std::vector<double>>& columns)
{
    const std::size_t n = columns.size();
    std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        c[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double r = 0.0;
            try {
                r = pearson(columns[i], columns[j]);
            } catch (const DomainError&) {
                r = 0.0;
            }
            c[i][j] = c[j][i] = r;
        }
    }
    return c;
}

} // namespace hevlab::calib
