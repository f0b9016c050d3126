#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "hevlab/common/csv.hpp"
#include "hevlab/common/errors.hpp"
#include "hevlab/common/interp.hpp"
#include "hevlab/common/paths.hpp"

namespace hevlab::powertrain {

/// Battery snapshot at one SOC. u_oc and r_int are the curve values at `soc`.
struct BatteryState {
    double soc = 0.34;
    double capacity_ah = 85.0;
    double u_oc = 345.0;
    double r_int = 0.1;
    double p_min = -40.0e3;
    double p_max = 60.0e3;
    double soc_min = 0.20;
    double soc_max = 0.80;

    [[nodiscard]] double capacity_coulomb() const noexcept { return 3600.0 * capacity_ah; }
    [[nodiscard]] double discriminant(double p_bat) const noexcept { return u_oc * u_oc - 4.0 * r_int * p_bat; }
};

/// Pack curves (open-circuit voltage and resistance against SOC) plus limits.
class BatteryModel {
public:
    BatteryModel(Table1D u_oc, Table1D r_int, double capacity_ah = 85.0, double p_min = -40.0e3,
                 double p_max = 60.0e3, double soc_min = 0.20, double soc_max = 0.80)
        : u_oc_(std::move(u_oc)), r_int_(std::move(r_int)), capacity_ah_(capacity_ah), p_min_(p_min), p_max_(p_max),
          soc_min_(soc_min), soc_max_(soc_max)
    {
        if (!(capacity_ah_ > 0.0) || !(p_min_ < 0.0 && p_max_ > 0.0) || !(0.0 <= soc_min_ && soc_min_ < soc_max_
                                                                        && soc_max_ <= 1.0)) {
            throw ValidationError("battery limits are inconsistent");
        }
        for (double v : u_oc_.ys()) {
            if (!(v > 0.0)) {
                throw ValidationError("open-circuit voltage must be positive");
            }
        }
        for (double r : r_int_.ys()) {
            if (!(r > 0.0)) {
                throw ValidationError("internal resistance must be positive");
            }
        }
    }

    /// Affine U_oc = 325 + 60*soc V, flat 0.1 ohm.
    static BatteryModel reference()
    {
        return BatteryModel(Table1D({0.0, 1.0}, {325.0, 385.0}), Table1D({0.0, 1.0}, {0.1, 0.1}));
    }

    /// Constant 345 V / 0.1 ohm; the co-state of the optimal control problem is then exactly constant.
    static BatteryModel soc_flat()
    {
        return BatteryModel(Table1D({0.0, 1.0}, {345.0, 345.0}), Table1D({0.0, 1.0}, {0.1, 0.1}));
    }

    [[nodiscard]] BatteryState state(double soc) const
    {
        BatteryState s;
        s.soc = soc;
        s.capacity_ah = capacity_ah_;
        s.u_oc = u_oc_(soc);
        s.r_int = r_int_(soc);
        s.p_min = p_min_;
        s.p_max = p_max_;
        s.soc_min = soc_min_;
        s.soc_max = soc_max_;
        return s;
    }

    [[nodiscard]] const Table1D& u_oc_curve() const noexcept { return u_oc_; }
    [[nodiscard]] const Table1D& r_int_curve() const noexcept { return r_int_; }
    [[nodiscard]] double capacity_ah() const noexcept { return capacity_ah_; }
    [[nodiscard]] double p_min() const noexcept { return p_min_; }
    [[nodiscard]] double p_max() const noexcept { return p_max_; }
    [[nodiscard]] double soc_min() const noexcept { return soc_min_; }
    [[nodiscard]] double soc_max() const noexcept { return soc_max_; }

private:
    Table1D u_oc_;
    Table1D r_int_;
    double capacity_ah_;
    double p_min_;
    double p_max_;
    double soc_min_;
    double soc_max_;
};

/// Battery curve CSV `soc,u_oc_v,r_ohm`.
inline BatteryModel load_battery(const std::string& path = data_path("maps/battery.csv"))
{
    const auto table = csv::read_file(path, 3);
    if (table.header != std::vector<std::string>{"soc", "u_oc_v", "r_ohm"}) {
        throw ValidationError("battery CSV header must be 'soc,u_oc_v,r_ohm'");
    }
    std::vector<double> soc;
    std::vector<double> u;
    std::vector<double> r;
    for (const auto& row : table.rows) {
        soc.push_back(row.values[0]);
        u.push_back(row.values[1]);
        r.push_back(row.values[2]);
    }
    auto soc2 = soc;
    return BatteryModel(Table1D(std::move(soc), std::move(u)), Table1D(std::move(soc2), std::move(r)));
}

/// Terminal current (A, positive discharging). Uses 2P/(U + sqrt(U^2 - 4RP)), which equals
/// (U - sqrt(U^2 - 4RP))/(2R) without cancellation at small P.
inline double battery_current(const BatteryState& bat, double p_bat)
{
    const double disc = bat.discriminant(p_bat);
    if (disc < 0.0) {
        throw InfeasibleError("battery power exceeds the deliverable maximum U_oc^2/(4R)");
    }
    if (p_bat == 0.0) {
        return 0.0;
    }
    return 2.0 * p_bat / (bat.u_oc + std::sqrt(disc));
}

/// d(SOC)/dt in fractional units per second.
inline double soc_derivative(double p_bat, const BatteryState& bat)
{
    return -battery_current(bat, p_bat) / bat.capacity_coulomb();
}

struct BatteryStepOptions {
    bool lossless = false; ///< ignore internal resistance (I = P/U_oc)
    bool check_limits = true;
};

inline BatteryState battery_step(const BatteryModel& model, const BatteryState& bat, double p_bat, double dt,
                                 BatteryStepOptions opt = {})
{
    if (!(dt > 0.0)) {
        throw DomainError("battery_step: dt must be positive");
    }
    if (opt.check_limits && (p_bat < bat.p_min - 1e-9 || p_bat > bat.p_max + 1e-9)) {
        throw ConstraintError("battery_step: power outside [p_min, p_max]");
    }
    if (p_bat == 0.0) {
        return bat;
    }
    const double current = opt.lossless ? p_bat / bat.u_oc : battery_current(bat, p_bat);
    const double soc = bat.soc - current * dt / bat.capacity_coulomb();
    if (soc < bat.soc_min - 1e-12 || soc > bat.soc_max + 1e-12) {
        throw ConstraintError("battery_step: SOC leaves [soc_min, soc_max]");
    }
    return model.state(soc);
}

/// Battery power range that keeps the next-step SOC inside the window and respects [p_min, p_max].
inline std::pair<double, double> soc_feasible_power(const BatteryState& bat, double dt)
{
    const double q = bat.capacity_coulomb() / dt;
    const double i_dis = std::max(0.0, (bat.soc - bat.soc_min) * q);
    const double i_chg = std::max(0.0, (bat.soc_max - bat.soc) * q);
    const double p_peak = bat.u_oc * bat.u_oc / (4.0 * bat.r_int);
    // P(I) = U*I - R*I^2 is increasing for I below U/(2R)
    const double i_dis_c = std::min(i_dis, bat.u_oc / (2.0 * bat.r_int));
    double hi = std::min({bat.p_max, bat.u_oc * i_dis_c - bat.r_int * i_dis_c * i_dis_c, p_peak});
    double lo = std::max(bat.p_min, -bat.u_oc * i_chg - bat.r_int * i_chg * i_chg);
    // shave a relative epsilon so round-off in the SOC update cannot cross the window
    hi = hi > 0.0 ? hi * (1.0 - 1e-9) : hi;
    lo = lo < 0.0 ? lo * (1.0 - 1e-9) : lo;
    return {lo, hi};
}

} // namespace hevlab::powertrain
