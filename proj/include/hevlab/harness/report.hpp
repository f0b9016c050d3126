#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hevlab/common/csv.hpp"
#include "hevlab/common/errors.hpp"
#include "hevlab/ems/accounting.hpp"
#include "hevlab/powertrain/simulation.hpp"

namespace hevlab::harness {

inline constexpr int report_schema_version = 1;

struct TraceSample {
    double t = 0.0;
    double v = 0.0;
    double soc = 0.0;
    double p_ice = 0.0;
    double p_bat = 0.0;
    double lambda = std::numeric_limits<double>::quiet_NaN(); ///< NaN when the strategy has no factor
    double T_cool = 0.0;
    double fuel_l = 0.0; ///< cumulative
};

struct MetricsReport {
    std::string strategy;
    std::string cycle;
    std::uint64_t seed = 0;
    double distance_m = 0.0;
    double initial_soc = 0.0;
    double soc_ref = 0.0;  ///< SOC the correction restores
    double eta_corr = 0.0; ///< efficiency used by the correction
    double final_soc_pct = 0.0;
    double fuel_l = 0.0;
    double fuel_economy = std::numeric_limits<double>::quiet_NaN(); ///< L/100 km; NaN without distance
    double corrected_fuel_l = 0.0;
    double corrected_economy = std::numeric_limits<double>::quiet_NaN();
    int starts = 0;
    double savings_pct = std::numeric_limits<double>::quiet_NaN(); ///< vs rule-based; NaN until compared
    double fluctuation_pct = 0.0;
    double disturbance = 0.0;
    double max_balance_error = 0.0;
    double min_soc = 0.0;
    double max_soc = 0.0;
    std::vector<TraceSample> trace;
};

/// Engine-power fluctuation: population std/mean of P_ICE over engine-on steps, percent.
inline double fluctuation_pct(const std::vector<TraceSample>& trace)
{
    double sum = 0.0;
    double sq = 0.0;
    int n = 0;
    for (const auto& r : trace) {
        if (r.p_ice > 0.0) {
            sum += r.p_ice;
            ++n;
        }
    }
    if (n == 0) {
        return 0.0;
    }
    const double mean = sum / n;
    for (const auto& r : trace) {
        if (r.p_ice > 0.0) {
            sq += (r.p_ice - mean) * (r.p_ice - mean);
        }
    }
    return 100.0 * std::sqrt(sq / n) / mean;
}

/// Summary and traces of one simulated run. The correction prices the SOC change against
/// `soc_ref` at efficiency `eta_corr` with the pack state at `soc_ref`.
inline MetricsReport make_report(const std::string& strategy, const powertrain::SimResult& sim,
                                 const powertrain::BatteryModel& battery, double soc_ref, double eta_corr)
{
    MetricsReport r;
    r.strategy = strategy;
    r.cycle = sim.cycle_name;
    r.distance_m = sim.distance_m;
    r.initial_soc = sim.initial_soc;
    r.soc_ref = soc_ref;
    r.eta_corr = eta_corr;
    const auto& fs = sim.final_state;
    r.final_soc_pct = 100.0 * fs.battery.soc;
    r.fuel_l = fs.fuel_l;
    r.corrected_fuel_l = ems::soc_corrected_fuel(r.fuel_l, fs.battery.soc, soc_ref, battery.state(soc_ref), eta_corr);
    if (r.distance_m > 0.0) {
        r.fuel_economy = ems::fuel_economy(r.fuel_l, r.distance_m);
        r.corrected_economy = ems::fuel_economy(r.corrected_fuel_l, r.distance_m);
    }
    r.max_balance_error = sim.max_balance_error;
    r.min_soc = sim.min_soc;
    r.max_soc = sim.max_soc;
    std::vector<double> p_ice;
    for (const auto& row : sim.trace) {
        r.trace.push_back({row.t, row.v, row.soc, row.p_ice, row.p_bat, row.ef, row.T_cool, row.fuel_l});
        p_ice.push_back(row.p_ice);
    }
    r.starts = powertrain::count_starts(p_ice);
    r.fluctuation_pct = fluctuation_pct(r.trace);
    return r;
}

namespace detail {

inline nlohmann::json number(double x)
{
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline double number(const nlohmann::json& j)
{
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

inline const std::vector<std::string>& trace_columns()
{
    static const std::vector<std::string> c{"t", "v", "soc", "p_ice", "p_bat", "lambda", "T_cool", "fuel_l"};
    return c;
}

} // namespace detail

/// Field-wise equality with NaN == NaN.
inline bool equal(const MetricsReport& a, const MetricsReport& b)
{
    using detail::same;
    if (a.strategy != b.strategy || a.cycle != b.cycle || a.seed != b.seed || a.starts != b.starts
        || a.trace.size() != b.trace.size()) {
        return false;
    }
    const double xa[] = {a.distance_m, a.initial_soc, a.soc_ref, a.eta_corr, a.final_soc_pct, a.fuel_l,
                         a.fuel_economy, a.corrected_fuel_l, a.corrected_economy, a.savings_pct, a.fluctuation_pct,
                         a.disturbance, a.max_balance_error, a.min_soc, a.max_soc};
    const double xb[] = {b.distance_m, b.initial_soc, b.soc_ref, b.eta_corr, b.final_soc_pct, b.fuel_l,
                         b.fuel_economy, b.corrected_fuel_l, b.corrected_economy, b.savings_pct, b.fluctuation_pct,
                         b.disturbance, b.max_balance_error, b.min_soc, b.max_soc};
    for (std::size_t i = 0; i < std::size(xa); ++i) {
        if (!same(xa[i], xb[i])) {
            return false;
        }
    }
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        const auto& p = a.trace[k];
        const auto& q = b.trace[k];
        if (!(p.t == q.t && p.v == q.v && p.soc == q.soc && p.p_ice == q.p_ice && p.p_bat == q.p_bat
              && same(p.lambda, q.lambda) && p.T_cool == q.T_cool && p.fuel_l == q.fuel_l)) {
            return false;
        }
    }
    return true;
}

inline nlohmann::json summary_json(const MetricsReport& r)
{
    using detail::number;
    return {{"strategy", r.strategy},
            {"cycle", r.cycle},
            {"seed", r.seed},
            {"distance_m", r.distance_m},
            {"initial_soc", r.initial_soc},
            {"soc_ref", r.soc_ref},
            {"eta_corr", r.eta_corr},
            {"final_soc_pct", r.final_soc_pct},
            {"fuel_l", r.fuel_l},
            {"fuel_economy_l_100km", number(r.fuel_economy)},
            {"corrected_fuel_l", r.corrected_fuel_l},
            {"corrected_economy_l_100km", number(r.corrected_economy)},
            {"start_stop_count", r.starts},
            {"fuel_savings_pct", number(r.savings_pct)},
            {"fluctuation_pct", r.fluctuation_pct},
            {"disturbance", r.disturbance},
            {"max_balance_error_w", r.max_balance_error},
            {"min_soc", r.min_soc},
            {"max_soc", r.max_soc}};
}

inline nlohmann::json to_json(const MetricsReport& r)
{
    nlohmann::json trace = nlohmann::json::object();
    for (const auto& c : detail::trace_columns()) {
        trace[c] = nlohmann::json::array();
    }
    for (const auto& s : r.trace) {
        trace["t"].push_back(s.t);
        trace["v"].push_back(s.v);
        trace["soc"].push_back(s.soc);
        trace["p_ice"].push_back(s.p_ice);
        trace["p_bat"].push_back(s.p_bat);
        trace["lambda"].push_back(detail::number(s.lambda));
        trace["T_cool"].push_back(s.T_cool);
        trace["fuel_l"].push_back(s.fuel_l);
    }
    return {{"schema", "hevlab-report"}, {"schema_version", report_schema_version}, {"summary", summary_json(r)},
            {"trace", std::move(trace)}};
}

inline MetricsReport summary_from_json(const nlohmann::json& s)
{
    MetricsReport r;
    r.strategy = s.at("strategy").get<std::string>();
    r.cycle = s.at("cycle").get<std::string>();
    r.seed = s.at("seed").get<std::uint64_t>();
    r.distance_m = s.at("distance_m").get<double>();
    r.initial_soc = s.at("initial_soc").get<double>();
    r.soc_ref = s.at("soc_ref").get<double>();
    r.eta_corr = s.at("eta_corr").get<double>();
    r.final_soc_pct = s.at("final_soc_pct").get<double>();
    r.fuel_l = s.at("fuel_l").get<double>();
    r.fuel_economy = detail::number(s.at("fuel_economy_l_100km"));
    r.corrected_fuel_l = s.at("corrected_fuel_l").get<double>();
    r.corrected_economy = detail::number(s.at("corrected_economy_l_100km"));
    r.starts = s.at("start_stop_count").get<int>();
    r.savings_pct = detail::number(s.at("fuel_savings_pct"));
    r.fluctuation_pct = s.at("fluctuation_pct").get<double>();
    r.disturbance = s.at("disturbance").get<double>();
    r.max_balance_error = s.at("max_balance_error_w").get<double>();
    r.min_soc = s.at("min_soc").get<double>();
    r.max_soc = s.at("max_soc").get<double>();
    return r;
}

inline MetricsReport report_from_json(const nlohmann::json& j)
{
    if (j.value("schema_version", -1) != report_schema_version) {
        throw ValidationError("report: unsupported schema version");
    }
    MetricsReport r = summary_from_json(j.at("summary"));
    const auto& tr = j.at("trace");
    const std::size_t n = tr.at("t").size();
    for (const auto& c : detail::trace_columns()) {
        if (tr.at(c).size() != n) {
            throw DimensionError("report: trace column '" + c + "' has the wrong length");
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        r.trace.push_back({tr["t"][k].get<double>(), tr["v"][k].get<double>(), tr["soc"][k].get<double>(),
                           tr["p_ice"][k].get<double>(), tr["p_bat"][k].get<double>(), detail::number(tr["lambda"][k]),
                           tr["T_cool"][k].get<double>(), tr["fuel_l"][k].get<double>()});
    }
    return r;
}

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(const std::string& s)
{
    if (s == "csv") {
        return ReportFormat::csv;
    }
    if (s == "json") {
        return ReportFormat::json;
    }
    throw ValidationError("unknown report format '" + s + "' (expected csv or json)");
}

/// Summary file written next to a CSV trace: "run.csv" -> "run.summary.json".
inline std::string summary_path(const std::string& csv_path)
{
    const auto dot = csv_path.rfind('.');
    const auto slash = csv_path.find_last_of("/\\");
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? csv_path.substr(0, dot) : csv_path) + ".summary.json";
}

/// JSON: one document. CSV: the per-step trace (header + one row per sample) plus a summary
/// JSON sidecar.
inline void export_report(const MetricsReport& r, const std::string& path, ReportFormat fmt)
{
    auto open = [](const std::string& p) {
        std::ofstream out(p);
        if (!out) {
            throw Error("cannot write '" + p + "'");
        }
        return out;
    };
    if (fmt == ReportFormat::json) {
        auto out = open(path);
        out << to_json(r).dump(1) << '\n';
        if (!out) {
            throw Error("write failed for '" + path + "'");
        }
        return;
    }
    auto out = open(path);
    out.precision(17);
    const auto& cols = detail::trace_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << cols[i];
    }
    out << '\n';
    for (const auto& s : r.trace) {
        out << s.t << ',' << s.v << ',' << s.soc << ',' << s.p_ice << ',' << s.p_bat << ',' << s.lambda << ','
            << s.T_cool << ',' << s.fuel_l << '\n';
    }
    auto side = open(summary_path(path));
    side << summary_json(r).dump(1) << '\n';
    if (!out || !side) {
        throw Error("write failed for '" + path + "'");
    }
}

inline nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path + "'");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline MetricsReport import_report(const std::string& path, ReportFormat fmt)
{
    if (fmt == ReportFormat::json) {
        return report_from_json(read_json_file(path));
    }
    MetricsReport r = summary_from_json(read_json_file(summary_path(path)));
    const auto t = csv::read_file(path, detail::trace_columns().size());
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (t.header[i] != detail::trace_columns()[i]) {
            throw ValidationError("report CSV: unexpected column '" + t.header[i] + "'");
        }
    }
    for (const auto& row : t.rows) {
        const auto& x = row.values;
        r.trace.push_back({x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]});
    }
    return r;
}

} // namespace hevlab::harness
