#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hevlab/common/csv.hpp"
#include "hevlab/common/errors.hpp"

namespace hevlab {

inline std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + step * static_cast<double>(i);
    }
    out.back() = hi;
    return out;
}

/// Index i such that xs[i] <= x <= xs[i+1], clamped to the table ends.
inline std::size_t bracket(std::span<const double> xs, double x)
{
    if (x <= xs.front()) {
        return 0;
    }
    if (x >= xs.back()) {
        return xs.size() - 2;
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    return static_cast<std::size_t>(std::distance(xs.begin(), it)) - 1;
}

inline void require_strictly_increasing(std::span<const double> xs, const char* what)
{
    if (xs.size() < 2) {
        throw ValidationError(std::string(what) + ": need at least two breakpoints");
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            throw ValidationError(std::string(what) + ": breakpoints must be strictly increasing");
        }
    }
}

/// Piecewise-linear y(x), held constant outside the breakpoint range.
class Table1D {
public:
    Table1D() = default;
    Table1D(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys))
    {
        require_strictly_increasing(xs_, "Table1D");
        if (xs_.size() != ys_.size()) {
            throw DimensionError("Table1D: x and y sizes differ");
        }
    }

    [[nodiscard]] double operator()(double x) const
    {
        const auto i = bracket(xs_, x);
        const double xc = std::clamp(x, xs_.front(), xs_.back());
        const double w = (xc - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return ys_[i] + w * (ys_[i + 1] - ys_[i]);
    }

    [[nodiscard]] const std::vector<double>& xs() const noexcept { return xs_; }
    [[nodiscard]] const std::vector<double>& ys() const noexcept { return ys_; }
    [[nodiscard]] bool empty() const noexcept { return xs_.empty(); }

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
};

struct GridLookup {
    double value = 0.0;
    bool clamped = false;
};

/// Rectilinear 2-D table with bilinear interpolation. values are stored x-major.
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(std::vector<double> xs, std::vector<double> ys, std::vector<double> values)
        : xs_(std::move(xs)), ys_(std::move(ys)), values_(std::move(values))
    {
        require_strictly_increasing(xs_, "Grid2D x");
        require_strictly_increasing(ys_, "Grid2D y");
        if (values_.size() != xs_.size() * ys_.size()) {
            throw DimensionError("Grid2D: value count does not match grid shape");
        }
    }

    [[nodiscard]] double node(std::size_t ix, std::size_t iy) const { return values_[ix * ys_.size() + iy]; }

    [[nodiscard]] GridLookup lookup(double x, double y) const
    {
        GridLookup out;
        out.clamped = x < xs_.front() || x > xs_.back() || y < ys_.front() || y > ys_.back();
        const double xc = std::clamp(x, xs_.front(), xs_.back());
        const double yc = std::clamp(y, ys_.front(), ys_.back());
        const auto i = bracket(xs_, xc);
        const auto j = bracket(ys_, yc);
        const double tx = (xc - xs_[i]) / (xs_[i + 1] - xs_[i]);
        const double ty = (yc - ys_[j]) / (ys_[j + 1] - ys_[j]);
        const double v00 = node(i, j);
        const double v01 = node(i, j + 1);
        const double v10 = node(i + 1, j);
        const double v11 = node(i + 1, j + 1);
        out.value = (1 - tx) * ((1 - ty) * v00 + ty * v01) + tx * ((1 - ty) * v10 + ty * v11);
        return out;
    }

    [[nodiscard]] double operator()(double x, double y) const { return lookup(x, y).value; }

    [[nodiscard]] const std::vector<double>& xs() const noexcept { return xs_; }
    [[nodiscard]] const std::vector<double>& ys() const noexcept { return ys_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<double> values_;
};

/// Reads a long-format grid CSV (`x,y,value`, any header names) into a Grid2D.
inline Grid2D grid_from_csv(const csv::Table& table)
{
    if (table.header.size() != 3) {
        throw ValidationError("grid CSV needs exactly three columns");
    }
    std::map<double, std::map<double, double>> cells;
    std::map<double, int> ys_seen;
    for (const auto& row : table.rows) {
        cells[row.values[0]][row.values[1]] = row.values[2];
        ys_seen[row.values[1]] = 0;
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [y, _] : ys_seen) {
        ys.push_back(y);
    }
    std::vector<double> values;
    for (const auto& [x, col] : cells) {
        if (col.size() != ys.size()) {
            throw ValidationError("grid CSV is not a full rectangular grid");
        }
        xs.push_back(x);
        for (const auto& [y, v] : col) {
            values.push_back(v);
        }
    }
    return Grid2D(std::move(xs), std::move(ys), std::move(values));
}

inline Grid2D load_grid_csv(const std::string& path) { return grid_from_csv(csv::read_file(path, 3)); }

} // namespace hevlab
