#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hevlab/common/errors.hpp"
#include "hevlab/ml/lstm.hpp"
#include "hevlab/ml/mlp.hpp"
#include "hevlab/ml/rnn.hpp"

namespace hevlab::ml {

inline constexpr int weights_schema_version = 1;

namespace detail {

inline nlohmann::json header(const std::string& arch, nlohmann::json dims, std::uint64_t seed, const Vec& params)
{
    nlohmann::json j;
    j["schema_version"] = weights_schema_version;
    j["arch"] = arch;
    j["dims"] = std::move(dims);
    j["seed"] = seed;
    j["params"] = std::vector<double>(params.data(), params.data() + params.size());
    return j;
}

inline void check_header(const nlohmann::json& j, const std::string& arch)
{
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != weights_schema_version) {
        throw ValidationError("weights file: unsupported schema_version");
    }
    if (j.value("arch", std::string{}) != arch) {
        throw ValidationError("weights file: expected arch '" + arch + "'");
    }
}

inline void load_params(const nlohmann::json& j, Vec& params)
{
    const auto values = j.at("params").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != params.size()) {
        throw DimensionError("weights file: parameter count does not match dims");
    }
    params = Eigen::Map<const Vec>(values.data(), params.size());
}

} // namespace detail

inline nlohmann::json to_json(const LstmWeights& w, std::uint64_t seed = 0)
{
    return detail::header("lstm", {{"input", w.input_dim()}, {"hidden", w.hidden_dim()}}, seed, w.params());
}

inline nlohmann::json to_json(const RnnWeights& w, std::uint64_t seed = 0)
{
    return detail::header("rnn", {{"input", w.input_dim()}, {"hidden", w.hidden_dim()}}, seed, w.params());
}

inline nlohmann::json to_json(const MlpWeights& w, std::uint64_t seed = 0)
{
    std::vector<std::string> acts;
    for (auto a : w.activations()) {
        acts.push_back(to_string(a));
    }
    return detail::header("mlp", {{"sizes", w.sizes()}, {"activations", acts}}, seed, w.params());
}

inline LstmWeights lstm_from_json(const nlohmann::json& j)
{
    detail::check_header(j, "lstm");
    LstmWeights w(j.at("dims").at("input").get<int>(), j.at("dims").at("hidden").get<int>());
    detail::load_params(j, w.params());
    return w;
}

inline RnnWeights rnn_from_json(const nlohmann::json& j)
{
    detail::check_header(j, "rnn");
    RnnWeights w(j.at("dims").at("input").get<int>(), j.at("dims").at("hidden").get<int>());
    detail::load_params(j, w.params());
    return w;
}

inline MlpWeights mlp_from_json(const nlohmann::json& j)
{
    detail::check_header(j, "mlp");
    std::vector<Activation> acts;
    for (const auto& a : j.at("dims").at("activations")) {
        acts.push_back(parse_activation(a.get<std::string>()));
    }
    MlpWeights w(j.at("dims").at("sizes").get<std::vector<int>>(), std::move(acts));
    detail::load_params(j, w.params());
    return w;
}

inline void write_json(const nlohmann::json& j, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    out << j.dump(1) << "\n";
}

inline nlohmann::json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path + "'");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON in '") + path + "': " + e.what());
    }
}

} // namespace hevlab::ml
