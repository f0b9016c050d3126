#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hevlab/common/errors.hpp"

namespace hevlab::calib {

struct SelectionResult {
    std::vector<std::size_t> kept;          ///< indices into the candidate list, by falling importance
    std::vector<std::size_t> dropped_rank;  ///< below the top-k cut
    std::vector<std::size_t> dropped_corr;  ///< pruned as the weaker member of a correlated pair
};

/// Keeps the k_top most important candidates, then walks them by falling importance and drops any
/// candidate whose |rho| with an already kept one exceeds corr_threshold. Ties keep list order.
inline SelectionResult select_features(const std::vector<double>& importance,
                                       const std::vector<std::vector<double>>& corr, std::size_t k_top,
                                       double corr_threshold = 0.9)
{
    const std::size_t n = importance.size();
    if (corr.size() != n) {
        throw DimensionError("select_features: correlation matrix size mismatch");
    }
    if (!(corr_threshold > 0.0 && corr_threshold <= 1.0)) {
        throw ValidationError("select_features: corr_threshold must be in (0, 1]");
    }
    if (k_top == 0) {
        throw ValidationError("select_features: k_top must be positive");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });

    SelectionResult out;
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = order[r];
        if (r >= k_top) {
            out.dropped_rank.push_back(i);
            continue;
        }
        const bool clash = std::any_of(out.kept.begin(), out.kept.end(), [&](std::size_t j) {
            return std::abs(corr[i][j]) > corr_threshold;
        });
        if (clash) {
            out.dropped_corr.push_back(i);
        } else {
            out.kept.push_back(i);
        }
    }
    if (out.kept.empty()) {
        throw ValidationError("select_features: no feature survived");
    }
    return out;
}

} // namespace hevlab::calib
