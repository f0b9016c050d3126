#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "hevlab/calibrate/features.hpp"
#include "hevlab/calibrate/truth.hpp"
#include "hevlab/common/csv.hpp"
#include "hevlab/ml/core.hpp"

namespace hevlab::calib {

enum class Target { fuel, coolant };

/// Contiguous trace plus the window length used by the sequence models.
/// y_fuel = mdot_r - mdot_a, y_cool = T_r - T_cd.
struct CorrectionDataset {
    TruthTrace trace;
    std::size_t window = 10;

    CorrectionDataset() = default;
    CorrectionDataset(TruthTrace t, std::size_t m) : trace(std::move(t)), window(m) { validate(); }

    void validate() const
    {
        if (window == 0) {
            throw ValidationError("dataset window must be positive");
        }
        if (trace.size() <= window) {
            throw ValidationError("dataset must be longer than the window");
        }
        if (trace.features.size() != trace.size() || trace.mdot_r.size() != trace.size()
            || trace.T_r.size() != trace.size() || trace.T_cd.size() != trace.size()) {
            throw DimensionError("dataset channels have different lengths");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return trace.size(); }
    [[nodiscard]] double y_fuel(std::size_t k) const { return trace.mdot_r[k] - trace.mdot_a[k]; }
    [[nodiscard]] double y_cool(std::size_t k) const { return trace.T_r[k] - trace.T_cd[k]; }
    [[nodiscard]] double y(Target t, std::size_t k) const { return t == Target::fuel ? y_fuel(k) : y_cool(k); }
    [[nodiscard]] double base(Target t, std::size_t k) const
    {
        return t == Target::fuel ? trace.mdot_a[k] : trace.T_cd[k];
    }
    [[nodiscard]] double measured(Target t, std::size_t k) const
    {
        return t == Target::fuel ? trace.mdot_r[k] : trace.T_r[k];
    }

    /// Feature column over the whole trace.
    [[nodiscard]] std::vector<double> column(Feature f) const
    {
        std::vector<double> c;
        c.reserve(size());
        for (const auto& r : trace.features) {
            c.push_back(get(r, f));
        }
        return c;
    }
};

/// Per-feature z-score fitted on training rows. Constant features keep scale 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const CorrectionDataset& ds, const std::vector<Feature>& inputs,
                            const std::vector<std::size_t>& rows)
    {
        Standardizer s;
        for (auto f : inputs) {
            double m = 0.0;
            for (auto k : rows) {
                m += get(ds.trace.features[k], f);
            }
            m /= static_cast<double>(rows.size());
            double v = 0.0;
            for (auto k : rows) {
                const double d = get(ds.trace.features[k], f) - m;
                v += d * d;
            }
            const double sd = std::sqrt(v / static_cast<double>(rows.size()));
            s.mean.push_back(m);
            s.scale.push_back(sd > 1e-12 * std::max(1.0, std::abs(m)) ? sd : 1.0);
        }
        return s;
    }
};

/// Rows k-M+1..k of the selected features, normalized; one row per time step.
inline ml::Mat window_matrix(const std::vector<FeatureRow>& rows, std::size_t end, std::size_t m,
                             const std::vector<Feature>& inputs, const Standardizer& norm)
{
    if (end + 1 < m || end >= rows.size()) {
        throw DimensionError("window out of range");
    }
    ml::Mat x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = rows[end + 1 - m + r];
        for (std::size_t j = 0; j < inputs.size(); ++j) {
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = (get(row, inputs[j]) - norm.mean[j]) / norm.scale[j];
        }
    }
    return x;
}

struct HoldoutSplit {
    std::vector<std::size_t> train; ///< window end indices
    std::vector<std::size_t> test;
};

/// Contiguous blocks of `block` steps; every `every`-th block is held out. Fuel windows are kept
/// only where the engine runs at the window end, since the off state has no fuel to correct.
inline HoldoutSplit block_split(const CorrectionDataset& ds, Target target, std::size_t block = 100, std::size_t every = 4)
{
    HoldoutSplit s;
    for (std::size_t k = ds.window - 1; k < ds.size(); ++k) {
        if (target == Target::fuel && ds.trace.engine_on[k] == 0) {
            continue;
        }
        ((k / block) % every == every - 1 ? s.test : s.train).push_back(k);
    }
    if (s.train.empty() || s.test.empty()) {
        throw ValidationError("dataset too short for the block holdout");
    }
    return s;
}

inline const std::vector<std::string>& dataset_extra_columns()
{
    static const std::vector<std::string> c{"load", "engine_on", "mdot_d", "mdot_q", "mdot_a", "mdot_r", "T_cd", "T_r"};
    return c;
}

inline void write_dataset(const CorrectionDataset& ds, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    out.precision(17);
    for (auto n : feature_names) {
        out << n << ',';
    }
    const auto& extra = dataset_extra_columns();
    for (std::size_t i = 0; i < extra.size(); ++i) {
        out << extra[i] << (i + 1 < extra.size() ? ',' : '\n');
    }
    const auto& t = ds.trace;
    for (std::size_t k = 0; k < t.size(); ++k) {
        for (double v : t.features[k]) {
            out << v << ',';
        }
        out << t.load[k] << ',' << int(t.engine_on[k]) << ',' << t.mdot_d[k] << ',' << t.mdot_q[k] << ','
            << t.mdot_a[k] << ',' << t.mdot_r[k] << ',' << t.T_cd[k] << ',' << t.T_r[k] << '\n';
    }
}

inline CorrectionDataset read_dataset(const std::string& path, std::size_t window = 10)
{
    const auto table = csv::read_file(path, feature_count + dataset_extra_columns().size());
    std::vector<std::size_t> fcol;
    for (auto n : feature_names) {
        fcol.push_back(table.column(n));
    }
    std::vector<std::size_t> ecol;
    for (const auto& n : dataset_extra_columns()) {
        ecol.push_back(table.column(n));
    }
    TruthTrace t;
    for (const auto& row : table.rows) {
        FeatureRow f{};
        for (std::size_t j = 0; j < feature_count; ++j) {
            f[j] = row.values[fcol[j]];
        }
        t.features.push_back(f);
        t.load.push_back(row.values[ecol[0]]);
        t.engine_on.push_back(row.values[ecol[1]] != 0.0 ? 1 : 0);
        t.mdot_d.push_back(row.values[ecol[2]]);
        t.mdot_q.push_back(row.values[ecol[3]]);
        t.mdot_a.push_back(row.values[ecol[4]]);
        t.mdot_r.push_back(row.values[ecol[5]]);
        t.T_cd.push_back(row.values[ecol[6]]);
        t.T_r.push_back(row.values[ecol[7]]);
    }
    return CorrectionDataset(std::move(t), window);
}

} // namespace hevlab::calib
