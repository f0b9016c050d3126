#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hevlab/common/csv.hpp"
#include "hevlab/common/errors.hpp"

namespace hevlab::harness {

inline const std::vector<std::string>& strategy_tags()
{
    static const std::vector<std::string> tags{"dp", "rl-ecms", "rl", "a-ecms", "rb", "const-ef"};
    return tags;
}

inline bool is_strategy(const std::string& s)
{
    for (const auto& t : strategy_tags()) {
        if (t == s) {
            return true;
        }
    }
    return false;
}

/// Everything a run needs. Defaults are the desk-scale setup.
struct RunConfig {
    std::string cycle = "urban300"; ///< built-in name or CSV path
    std::string strategy = "const-ef";
    std::uint64_t seed = 7;
    double dt = 1.0;
    double soc0 = 0.34;
    double soc_target = 0.34;
    double disturbance = 0.0;
    double tau = 3.0; ///< SOC penalty weight in percent / gram units
    bool full = false;

    std::string fuel_model = "averaged";
    bool soc_flat = false;

    double ef = 0.0; ///< constant equivalence factor; <= 0 tunes it by shooting
    double kp = 5.0;
    double ki = 0.1;
    double lambda0 = 0.0; ///< A-ECMS start value; <= 0 uses the tuned constant factor

    double rb_soc_target = 0.0; ///< <= 0 follows soc_target
    double rb_electric_below = 10e3;
    double rb_charge_band = 0.02;
    double rb_charge_power = 8e3;

    int dp_soc_points = 201;
    int dp_pbat_points = 101;
    double dp_tolerance = 0.005;

    int episodes = 50;
    std::vector<int> hidden{64, 64};
    double lr = 1e-4;
    double reward_scale = 5.0;
    double dsoc_scale = 0.02;
    std::string policy; ///< trained actor JSON; empty trains one

    std::vector<std::string> strategies{"dp", "rl-ecms", "rl", "a-ecms", "rb", "const-ef"};
    std::vector<double> taus{1.5, 2.5, 3.5};
    std::vector<double> levels{0.0, 0.05, 0.10, 0.15, 0.20};
    int disturbance_seeds = 5;

    int calib_epochs = 60;
    int calib_hidden = 16;

    std::string out = "hevlab_out";

    void validate() const
    {
        if (!is_strategy(strategy)) {
            throw ValidationError("unknown strategy '" + strategy + "'");
        }
        for (const auto& s : strategies) {
            if (!is_strategy(s)) {
                throw ValidationError("unknown strategy '" + s + "' in strategies");
            }
        }
        if (!(disturbance >= 0.0 && disturbance <= 0.5)) {
            throw ValidationError("disturbance must lie in [0, 0.5]");
        }
        for (double l : levels) {
            if (!(l >= 0.0 && l <= 0.5)) {
                throw ValidationError("disturbance levels must lie in [0, 0.5]");
            }
        }
        if (!(dt > 0.0)) {
            throw ValidationError("dt must be positive");
        }
        if (!(soc0 > 0.0 && soc0 < 1.0 && soc_target > 0.0 && soc_target < 1.0)) {
            throw ValidationError("soc0 and soc_target must lie in (0, 1)");
        }
        if (!(tau >= 0.0)) {
            throw ValidationError("tau must be non-negative");
        }
        for (double t : taus) {
            if (!(t >= 0.0)) {
                throw ValidationError("taus must be non-negative");
            }
        }
        if (episodes < 0 || disturbance_seeds < 1) {
            throw ValidationError("episodes must be >= 0 and disturbance_seeds >= 1");
        }
    }
};

namespace detail {

inline double to_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(x)) {
        throw ValidationError("config key '" + key + "': '" + v + "' is not a number");
    }
    return x;
}

inline int to_int(const std::string& key, const std::string& v)
{
    const double x = to_double(key, v);
    if (x != std::floor(x) || std::abs(x) > 1e9) {
        throw ValidationError("config key '" + key + "': '" + v + "' is not an integer");
    }
    return static_cast<int>(x);
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw ValidationError("config key '" + key + "': '" + v + "' is not a boolean");
}

inline std::vector<std::string> to_list(const std::string& v)
{
    std::vector<std::string> out;
    for (auto f : csv::split(v, ',')) {
        const auto t = csv::trim(f);
        if (!t.empty()) {
            out.emplace_back(t);
        }
    }
    return out;
}

template <class T, class F>
std::vector<T> map_list(const std::string& v, F&& f)
{
    std::vector<T> out;
    for (const auto& s : to_list(v)) {
        out.push_back(f(s));
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

inline const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> m = [] {
        std::map<std::string, Setter> s;
        auto dbl = [](double RunConfig::*f) {
            return [f](RunConfig& c, const std::string& k, const std::string& v) { c.*f = to_double(k, v); };
        };
        auto integer = [](int RunConfig::*f) {
            return [f](RunConfig& c, const std::string& k, const std::string& v) { c.*f = to_int(k, v); };
        };
        auto str = [](std::string RunConfig::*f) {
            return [f](RunConfig& c, const std::string&, const std::string& v) { c.*f = v; };
        };
        auto boolean = [](bool RunConfig::*f) {
            return [f](RunConfig& c, const std::string& k, const std::string& v) { c.*f = to_bool(k, v); };
        };
        s["cycle"] = str(&RunConfig::cycle);
        s["strategy"] = str(&RunConfig::strategy);
        s["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const double x = to_double(k, v);
            if (x < 0.0 || x != std::floor(x)) {
                throw ValidationError("config key 'seed': '" + v + "' is not a non-negative integer");
            }
            c.seed = static_cast<std::uint64_t>(x);
        };
        s["dt"] = dbl(&RunConfig::dt);
        s["soc0"] = dbl(&RunConfig::soc0);
        s["soc_target"] = dbl(&RunConfig::soc_target);
        s["disturbance"] = dbl(&RunConfig::disturbance);
        s["tau"] = dbl(&RunConfig::tau);
        s["full"] = boolean(&RunConfig::full);
        s["fuel_model"] = str(&RunConfig::fuel_model);
        s["soc_flat"] = boolean(&RunConfig::soc_flat);
        s["ef"] = dbl(&RunConfig::ef);
        s["kp"] = dbl(&RunConfig::kp);
        s["ki"] = dbl(&RunConfig::ki);
        s["lambda0"] = dbl(&RunConfig::lambda0);
        s["rb_soc_target"] = dbl(&RunConfig::rb_soc_target);
        s["rb_electric_below"] = dbl(&RunConfig::rb_electric_below);
        s["rb_charge_band"] = dbl(&RunConfig::rb_charge_band);
        s["rb_charge_power"] = dbl(&RunConfig::rb_charge_power);
        s["dp_soc_points"] = integer(&RunConfig::dp_soc_points);
        s["dp_pbat_points"] = integer(&RunConfig::dp_pbat_points);
        s["dp_tolerance"] = dbl(&RunConfig::dp_tolerance);
        s["episodes"] = integer(&RunConfig::episodes);
        s["hidden"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.hidden = map_list<int>(v, [&](const std::string& x) { return to_int(k, x); });
        };
        s["lr"] = dbl(&RunConfig::lr);
        s["reward_scale"] = dbl(&RunConfig::reward_scale);
        s["dsoc_scale"] = dbl(&RunConfig::dsoc_scale);
        s["policy"] = str(&RunConfig::policy);
        s["strategies"] = [](RunConfig& c, const std::string&, const std::string& v) { c.strategies = to_list(v); };
        s["taus"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.taus = map_list<double>(v, [&](const std::string& x) { return to_double(k, x); });
        };
        s["levels"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.levels = map_list<double>(v, [&](const std::string& x) { return to_double(k, x); });
        };
        s["disturbance_seeds"] = integer(&RunConfig::disturbance_seeds);
        s["calib_epochs"] = integer(&RunConfig::calib_epochs);
        s["calib_hidden"] = integer(&RunConfig::calib_hidden);
        s["out"] = str(&RunConfig::out);
        return s;
    }();
    return m;
}

} // namespace detail

inline std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const auto& [k, _] : detail::setters()) {
        keys.push_back(k);
    }
    return keys;
}

/// Sets one key from its text value.
inline void set_key(RunConfig& cfg, const std::string& key, const std::string& value)
{
    const auto& s = detail::setters();
    const auto it = s.find(key);
    if (it == s.end()) {
        throw ValidationError("unknown config key '" + key + "'");
    }
    it->second(cfg, key, value);
}

/// Applies a "key=value" override.
inline void apply_override(RunConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ValidationError("override '" + assignment + "' is not key=value");
    }
    set_key(cfg, std::string(csv::trim(std::string_view(assignment).substr(0, eq))),
            std::string(csv::trim(std::string_view(assignment).substr(eq + 1))));
}

/// Flat key = value text. '#' starts a comment; blank lines are ignored; later keys win.
inline RunConfig parse_config(std::istream& in, RunConfig cfg = {})
{
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto t = csv::trim(line);
        if (t.empty()) {
            continue;
        }
        try {
            apply_override(cfg, std::string(t));
        } catch (const ValidationError& e) {
            throw ValidationError("config line " + std::to_string(no) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path, RunConfig cfg = {})
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open config '" + path + "'");
    }
    return parse_config(in, std::move(cfg));
}

inline RunConfig parse_config_string(const std::string& text, RunConfig cfg = {})
{
    std::istringstream in(text);
    return parse_config(in, std::move(cfg));
}

} // namespace hevlab::harness
