#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "hevlab/common/errors.hpp"

namespace hevlab::calib {

struct BoostingOptions {
    int rounds = 200;
    double learning_rate = 0.1;
    double lambda = 1.0; ///< L2 penalty on leaf weights
    double min_gain = 1e-12;
};

struct ImportanceResult {
    std::vector<double> weights; ///< one per column, sums to 1 unless degenerate
    std::vector<int> split_counts; ///< how often each column was chosen for a split
    bool degenerate = false;     ///< constant target: no split ever gains
    std::vector<double> prediction;
};

namespace detail {

struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    double left = 0.0;
    double right = 0.0;
    double gain = 0.0;
    bool valid = false;
};

} // namespace detail

/// Gradient-boosted depth-1 trees on squared loss. Split gain and leaf weights follow the
/// second-order objective with an L2 leaf penalty (hessian = 1 per sample).
inline ImportanceResult boosted_importance(const std::vector<std::vector<double>>& columns,
                                           const std::vector<double>& target, const BoostingOptions& opt = {})
{
    if (columns.empty() || target.empty()) {
        throw ValidationError("boosted_importance: empty dataset");
    }
    const std::size_t n = target.size();
    const std::size_t p = columns.size();
    for (const auto& c : columns) {
        if (c.size() != n) {
            throw DimensionError("boosted_importance: column length mismatch");
        }
    }
    std::vector<std::vector<std::size_t>> order(p, std::vector<std::size_t>(n));
    for (std::size_t j = 0; j < p; ++j) {
        std::iota(order[j].begin(), order[j].end(), std::size_t{0});
        std::stable_sort(order[j].begin(), order[j].end(),
                         [&](std::size_t a, std::size_t b) { return columns[j][a] < columns[j][b]; });
    }

    ImportanceResult out;
    out.weights.assign(p, 0.0);
    out.split_counts.assign(p, 0);
    const double base = std::accumulate(target.begin(), target.end(), 0.0) / static_cast<double>(n);
    out.prediction.assign(n, base);
    std::vector<double> g(n);
    const double lam = opt.lambda;

    for (int round = 0; round < opt.rounds; ++round) {
        double G = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = out.prediction[i] - target[i];
            G += g[i];
        }
        const double H = static_cast<double>(n);
        const double parent = G * G / (H + lam);
        detail::Stump best;
        for (std::size_t j = 0; j < p; ++j) {
            const auto& idx = order[j];
            const auto& x = columns[j];
            double gl = 0.0;
            for (std::size_t s = 0; s + 1 < n; ++s) {
                gl += g[idx[s]];
                if (x[idx[s]] == x[idx[s + 1]]) {
                    continue;
                }
                const double hl = static_cast<double>(s + 1);
                const double gr = G - gl;
                const double hr = H - hl;
                const double gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent);
                if (gain > best.gain) {
                    best = {j, 0.5 * (x[idx[s]] + x[idx[s + 1]]), -gl / (hl + lam), -gr / (hr + lam), gain, true};
                }
            }
        }
        if (!best.valid || best.gain <= opt.min_gain) {
            break;
        }
        out.weights[best.feature] += best.gain;
        ++out.split_counts[best.feature];
        const auto& x = columns[best.feature];
        for (std::size_t i = 0; i < n; ++i) {
            out.prediction[i] += opt.learning_rate * (x[i] <= best.threshold ? best.left : best.right);
        }
    }

    const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
    if (total > 0.0) {
        for (double& w : out.weights) {
            w /= total;
        }
    } else {
        out.degenerate = true;
    }
    return out;
}

} // namespace hevlab::calib
