#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hevlab/common/csv.hpp"
#include "hevlab/common/errors.hpp"
#include "hevlab/common/paths.hpp"

namespace hevlab::cycle {

/// Road-load parameters. Defaults are the studied PHEV (1830 kg, f = 0.013, Cd = 0.325, A = 2.3 m^2).
struct VehicleParams {
    double mass = 1830.0;
    double rolling_resist = 0.013;
    double drag_coeff = 0.325;
    double frontal_area = 2.3;
    double air_density = 1.2;
    double gravity = 9.81;

    void validate() const
    {
        for (double v : {mass, rolling_resist, drag_coeff, frontal_area, air_density, gravity}) {
            if (!(std::isfinite(v) && v > 0.0)) {
                throw ValidationError("vehicle parameters must be finite and strictly positive");
            }
        }
        if (rolling_resist >= 0.1) {
            throw ValidationError("rolling resistance coefficient must be below 0.1");
        }
    }
};

/// Past-demand averaging window and future speed preview window, both in seconds.
struct HorizonConfig {
    double t_avg = 30.0;
    double t_fx = 10.0;

    void validate(double dt) const
    {
        auto multiple = [dt](double t) {
            const double k = t / dt;
            return std::abs(k - std::round(k)) < 1e-9;
        };
        if (!(t_avg > 0.0 && t_fx > 0.0)) {
            throw ValidationError("horizon windows must be positive");
        }
        if (!multiple(t_avg) || !multiple(t_fx)) {
            throw ValidationError("horizon windows must be integer multiples of dt");
        }
    }

    [[nodiscard]] std::size_t avg_samples(double dt) const { return static_cast<std::size_t>(std::lround(t_avg / dt)); }
    [[nodiscard]] std::size_t fx_samples(double dt) const { return static_cast<std::size_t>(std::lround(t_fx / dt)) + 1; }
};

/// Uniformly sampled speed trace starting at t = 0. Sample k covers [k*dt, (k+1)*dt).
class DriveCycle {
public:
    DriveCycle(std::string name, double dt, std::vector<double> speeds)
        : name_(std::move(name)), dt_(dt), speeds_(std::move(speeds))
    {
        if (!(dt_ > 0.0)) {
            throw ValidationError("cycle dt must be positive");
        }
        if (speeds_.empty()) {
            throw ValidationError("cycle has no samples");
        }
        for (double v : speeds_) {
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("cycle speeds must be finite and non-negative");
            }
        }
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t size() const noexcept { return speeds_.size(); }
    [[nodiscard]] const std::vector<double>& speeds() const noexcept { return speeds_; }
    [[nodiscard]] double speed(std::size_t k) const { return speeds_.at(k); }
    [[nodiscard]] double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }
    [[nodiscard]] double duration() const noexcept { return static_cast<double>(speeds_.size()) * dt_; }
    [[nodiscard]] double max_speed() const { return *std::max_element(speeds_.begin(), speeds_.end()); }

    /// Central difference inside, one-sided at the ends.
    [[nodiscard]] double acceleration(std::size_t k) const
    {
        const auto n = speeds_.size();
        if (n < 2) {
            return 0.0;
        }
        if (k == 0) {
            return (speeds_[1] - speeds_[0]) / dt_;
        }
        if (k + 1 >= n) {
            return (speeds_[n - 1] - speeds_[n - 2]) / dt_;
        }
        return (speeds_[k + 1] - speeds_[k - 1]) / (2.0 * dt_);
    }

    /// Distance covered before sample k starts.
    [[nodiscard]] double distance_before(std::size_t k) const
    {
        k = std::min(k, speeds_.size());
        return std::accumulate(speeds_.begin(), speeds_.begin() + static_cast<std::ptrdiff_t>(k), 0.0) * dt_;
    }

    [[nodiscard]] double total_distance() const { return distance_before(speeds_.size()); }

private:
    std::string name_;
    double dt_;
    std::vector<double> speeds_;
};

/// Parses a `time_s,speed_mps` CSV and resamples it onto a uniform dt grid by linear interpolation.
inline DriveCycle parse_cycle(const csv::Table& table, double dt, std::string name)
{
    if (table.header.size() != 2 || table.header[0] != "time_s" || table.header[1] != "speed_mps") {
        throw ValidationError("cycle CSV header must be 'time_s,speed_mps'");
    }
    if (table.rows.empty()) {
        throw ValidationError("cycle CSV has no data rows");
    }
    if (!(dt > 0.0)) {
        throw ValidationError("resample dt must be positive");
    }
    std::vector<double> ts;
    std::vector<double> vs;
    for (const auto& row : table.rows) {
        const double t = row.values[0];
        const double v = row.values[1];
        if (!ts.empty() && !(t > ts.back())) {
            throw ValidationError("cycle time is not strictly increasing at line " + std::to_string(row.line));
        }
        if (v < 0.0) {
            throw ValidationError("negative speed at line " + std::to_string(row.line));
        }
        ts.push_back(t);
        vs.push_back(v);
    }
    if (std::abs(ts.front()) > 1e-9) {
        throw ValidationError("cycle must start at t = 0");
    }
    const auto n = static_cast<std::size_t>(std::floor(ts.back() / dt + 1e-9)) + 1;
    std::vector<double> out(n);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        while (j + 1 < ts.size() && ts[j + 1] < t) {
            ++j;
        }
        if (j + 1 >= ts.size()) {
            out[k] = vs.back();
            continue;
        }
        const double w = std::clamp((t - ts[j]) / (ts[j + 1] - ts[j]), 0.0, 1.0);
        out[k] = vs[j] + w * (vs[j + 1] - vs[j]);
    }
    return DriveCycle(std::move(name), dt, std::move(out));
}

inline DriveCycle load_cycle(const std::string& path, double dt = 1.0)
{
    auto name = path;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos) {
        name = name.substr(slash + 1);
    }
    if (const auto dot = name.rfind('.'); dot != std::string::npos) {
        name = name.substr(0, dot);
    }
    return parse_cycle(csv::read_file(path), dt, name);
}

inline bool is_builtin_cycle(const std::string& name) { return name == "nedc" || name == "wltc" || name == "urban300"; }

/// Bundled cycles: "nedc", "wltc" (class 3b) and "urban300" (synthetic, for fast runs).
/// Any other name is treated as a CSV path.
inline DriveCycle builtin_cycle(const std::string& name, double dt = 1.0)
{
    if (is_builtin_cycle(name)) {
        auto c = parse_cycle(csv::read_file(data_path("cycles/" + name + ".csv")), dt, name);
        return c;
    }
    return load_cycle(name, dt);
}

/// Tractive power v*(m*a + m*g*f + 0.5*rho*Cd*A*v^2) on a flat road. Negative values are kept.
inline double road_load_power(double v, double a, const VehicleParams& p)
{
    const double rolling = v > 0.0 ? p.mass * p.gravity * p.rolling_resist : 0.0;
    const double aero = 0.5 * p.air_density * p.drag_coeff * p.frontal_area * v * v;
    return v * (p.mass * a + rolling + aero);
}

inline double demand_power(const DriveCycle& cycle, std::size_t k, const VehicleParams& p)
{
    if (k >= cycle.size()) {
        throw DomainError("demand_power: sample index outside cycle");
    }
    return road_load_power(cycle.speed(k), cycle.acceleration(k), p);
}

/// Demand at time t; between samples the sample powers are linearly interpolated.
inline double demand_power(const DriveCycle& cycle, double t, const VehicleParams& p)
{
    const double last = cycle.time(cycle.size() - 1);
    if (!(t >= 0.0 && t <= last + 1e-9)) {
        throw DomainError("demand_power: t outside cycle span");
    }
    const double pos = t / cycle.dt();
    const auto k = static_cast<std::size_t>(std::floor(pos + 1e-9));
    const double w = pos - static_cast<double>(k);
    if (w < 1e-9 || k + 1 >= cycle.size()) {
        return demand_power(cycle, std::min(k, cycle.size() - 1), p);
    }
    return (1.0 - w) * demand_power(cycle, k, p) + w * demand_power(cycle, k + 1, p);
}

/// Speeds over [t, t + T_FX], padded with the final speed past the end of the cycle.
inline std::vector<double> future_speed_window(const DriveCycle& cycle, double t, const HorizonConfig& cfg)
{
    if (t < 0.0) {
        throw DomainError("future_speed_window: negative time");
    }
    const auto n = cfg.fx_samples(cycle.dt());
    const auto start = static_cast<std::size_t>(std::lround(t / cycle.dt()));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = start + i;
        out[i] = k < cycle.size() ? cycle.speed(k) : cycle.speeds().back();
    }
    return out;
}

/// Mean of the last T_avg/dt entries of a demand history (fewer if not yet available).
inline double average_demand_power(std::span<const double> history, const HorizonConfig& cfg, double dt = 1.0)
{
    if (history.empty()) {
        throw DomainError("average_demand_power: empty history");
    }
    const auto window = std::max<std::size_t>(1, cfg.avg_samples(dt));
    const auto n = std::min(window, history.size());
    const auto tail = history.subspan(history.size() - n);
    return std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(n);
}

} // namespace hevlab::cycle
