#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hevlab/calibrate/dataset.hpp"
#include "hevlab/ml/lstm.hpp"
#include "hevlab/ml/mlp.hpp"
#include "hevlab/ml/rnn.hpp"
#include "hevlab/ml/serialize.hpp"
#include "hevlab/powertrain/plant.hpp"

namespace hevlab::calib {

enum class ModelKind { lstm, rnn, mlp };

inline std::string to_string(ModelKind k)
{
    switch (k) {
    case ModelKind::lstm: return "lstm";
    case ModelKind::rnn: return "rnn";
    case ModelKind::mlp: return "mlp";
    }
    return "?";
}

struct TrainOptions {
    ModelKind kind = ModelKind::lstm;
    int hidden = 16;
    double lr = 5e-3;
    std::size_t batch = 32;
    int epochs = 60;
    std::uint64_t seed = 7;
    std::size_t block = 100;
    std::size_t holdout_every = 4;
};

/// Residual model: maps a window of normalized features to the error of the physical model.
/// The MLP baseline sees only the last row of the window.
struct CorrectionModel {
    ModelKind kind = ModelKind::lstm;
    Target target = Target::fuel;
    std::vector<Feature> inputs;
    std::size_t window = 10;
    Standardizer norm;
    double y_scale = 1.0;
    ml::LstmWeights lstm;
    ml::RnnWeights rnn;
    ml::MlpWeights mlp;

    [[nodiscard]] ml::Vec& params()
    {
        return kind == ModelKind::lstm ? lstm.params() : kind == ModelKind::rnn ? rnn.params() : mlp.params();
    }

    /// Network output in scaled units for a normalized window.
    [[nodiscard]] double raw(const ml::Mat& x) const
    {
        switch (kind) {
        case ModelKind::lstm: return ml::lstm_predict(x, lstm);
        case ModelKind::rnn: return ml::rnn_predict(x, rnn);
        case ModelKind::mlp: return ml::mlp_forward(ml::Vec(x.row(x.rows() - 1).transpose()), mlp)(0);
        }
        return 0.0;
    }

    /// Predicted error (kg/s or K) for the window ending at `end`.
    [[nodiscard]] double predict(const std::vector<FeatureRow>& rows, std::size_t end) const
    {
        return y_scale * raw(window_matrix(rows, end, window, inputs, norm));
    }
};

struct ErrorMetrics {
    double mae = 0.0;
    double mse = 0.0;
    double mre = 0.0; ///< mean |error| / max(|truth|, 1e-9)
};

inline ErrorMetrics error_metrics(std::span<const double> predicted, std::span<const double> truth)
{
    if (predicted.size() != truth.size()) {
        throw DimensionError("error_metrics: length mismatch");
    }
    if (truth.empty()) {
        throw ValidationError("error_metrics: empty input");
    }
    ErrorMetrics m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = predicted[i] - truth[i];
        m.mae += std::abs(e);
        m.mse += e * e;
        m.mre += std::abs(e) / std::max(std::abs(truth[i]), 1e-9);
    }
    const double n = static_cast<double>(truth.size());
    m.mae /= n;
    m.mse /= n;
    m.mre /= n;
    return m;
}

/// Corrected signal (base + model) against the measurement over the given windows.
inline ErrorMetrics evaluate_model(const CorrectionModel& model, const CorrectionDataset& ds,
                                   const std::vector<std::size_t>& ends)
{
    std::vector<double> pred;
    std::vector<double> truth;
    for (auto k : ends) {
        double v = ds.base(model.target, k) + model.predict(ds.trace.features, k);
        if (model.target == Target::fuel) {
            v = std::max(0.0, v);
        }
        pred.push_back(v);
        truth.push_back(ds.measured(model.target, k));
    }
    return error_metrics(pred, truth);
}

struct TrainResult {
    CorrectionModel model;
    ErrorMetrics test;
    ErrorMetrics uncorrected; ///< base signal alone on the same windows
    std::vector<double> epoch_loss;
};

/// Minibatch Adam on the scaled squared error. The output head starts at zero, so the untrained
/// model reproduces the physical signal.
inline TrainResult train_correction(const CorrectionDataset& ds, Target target, const std::vector<Feature>& inputs,
                                    const TrainOptions& opt = {})
{
    ds.validate();
    if (inputs.empty()) {
        throw ValidationError("train_correction: no input features");
    }
    const auto split = block_split(ds, target, opt.block, opt.holdout_every);

    TrainResult res;
    auto& m = res.model;
    m.kind = opt.kind;
    m.target = target;
    m.inputs = inputs;
    m.window = ds.window;
    std::vector<std::size_t> rows;
    for (auto k : split.train) {
        for (std::size_t r = k + 1 - ds.window; r <= k; ++r) {
            rows.push_back(r);
        }
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    m.norm = Standardizer::fit(ds, inputs, rows);

    double ss = 0.0;
    for (auto k : split.train) {
        ss += ds.y(target, k) * ds.y(target, k);
    }
    const double rms = std::sqrt(ss / static_cast<double>(split.train.size()));
    m.y_scale = rms > 0.0 ? rms : 1.0;

    const int d = static_cast<int>(inputs.size());
    switch (opt.kind) {
    case ModelKind::lstm:
        m.lstm = ml::LstmWeights::init(d, opt.hidden, opt.seed);
        m.lstm.params().tail(opt.hidden + 1).setZero();
        break;
    case ModelKind::rnn:
        m.rnn = ml::RnnWeights::init(d, opt.hidden, opt.seed);
        m.rnn.params().tail(opt.hidden + 1).setZero();
        break;
    case ModelKind::mlp: {
        m.mlp = ml::MlpWeights::init({d, 2 * opt.hidden, 2 * opt.hidden, 1},
                                     {ml::Activation::tanh, ml::Activation::tanh, ml::Activation::linear}, opt.seed);
        m.mlp.W(2).setZero();
        m.mlp.b(2).setZero();
        break;
    }
    }

    std::vector<ml::Mat> xs;
    std::vector<double> ys;
    for (auto k : split.train) {
        xs.push_back(window_matrix(ds.trace.features, k, ds.window, inputs, m.norm));
        ys.push_back(ds.y(target, k) / m.y_scale);
    }

    ml::Adam adam(opt.lr);
    std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    ml::Vec grad = ml::Vec::Zero(m.params().size());
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += opt.batch) {
            const std::size_t stop = std::min(order.size(), start + opt.batch);
            const double scale = 1.0 / static_cast<double>(stop - start);
            grad.setZero();
            for (std::size_t b = start; b < stop; ++b) {
                const auto& x = xs[order[b]];
                const double y = ys[order[b]];
                double out = 0.0;
                switch (m.kind) {
                case ModelKind::lstm: {
                    const auto cache = ml::lstm_sequence_forward(x, m.lstm);
                    out = cache.output;
                    ml::lstm_backward(cache, 2.0 * (out - y) * scale, m.lstm, grad);
                    break;
                }
                case ModelKind::rnn: {
                    const auto cache = ml::rnn_sequence_forward(x, m.rnn);
                    out = cache.output;
                    ml::rnn_backward(cache, 2.0 * (out - y) * scale, m.rnn, grad);
                    break;
                }
                case ModelKind::mlp: {
                    ml::MlpCache cache;
                    const ml::Mat in = x.row(x.rows() - 1).transpose();
                    out = ml::mlp_forward(in, m.mlp, &cache)(0, 0);
                    ml::Mat d_out(1, 1);
                    d_out(0, 0) = 2.0 * (out - y) * scale;
                    (void)ml::mlp_backward(cache, d_out, m.mlp, grad);
                    break;
                }
                }
                epoch_loss += (out - y) * (out - y);
            }
            if (!grad.allFinite()) {
                throw TrainingError("correction training diverged (seed " + std::to_string(opt.seed) + ", lr "
                                    + std::to_string(opt.lr) + ")");
            }
            adam.step(m.params(), grad);
        }
        epoch_loss /= static_cast<double>(xs.size());
        if (!std::isfinite(epoch_loss)) {
            throw TrainingError("correction training loss is NaN (seed " + std::to_string(opt.seed) + ", lr "
                                + std::to_string(opt.lr) + ")");
        }
        res.epoch_loss.push_back(epoch_loss);
    }

    res.test = evaluate_model(m, ds, split.test);
    std::vector<double> base;
    std::vector<double> truth;
    for (auto k : split.test) {
        base.push_back(ds.base(target, k));
        truth.push_back(ds.measured(target, k));
    }
    res.uncorrected = error_metrics(base, truth);
    return res;
}

inline TrainResult train_fuel_correction(const CorrectionDataset& ds, const TrainOptions& opt = {},
                                         const std::vector<Feature>& inputs = default_fuel_inputs())
{
    return train_correction(ds, Target::fuel, inputs, opt);
}

inline TrainResult train_coolant_correction(const CorrectionDataset& ds, const TrainOptions& opt = {})
{
    return train_correction(ds, Target::coolant, coolant_inputs(), opt);
}

struct CorrectedFuel {
    double rate = 0.0;       ///< kg/s
    bool incomplete = false; ///< fewer than M rows available; the physical value was used
};

/// mdot_a plus the predicted error over the last M rows, floored at zero.
inline CorrectedFuel corrected_fuel(const CorrectionModel& model, const std::vector<FeatureRow>& rows, double mdot_a)
{
    if (rows.size() < model.window) {
        return {mdot_a, true};
    }
    return {std::max(0.0, mdot_a + model.predict(rows, rows.size() - 1)), false};
}

/// Features of a warm engine held at one operating point long enough to settle.
inline std::vector<FeatureRow> steady_window(const powertrain::OolPoint& op, const powertrain::EngineLimits& lim,
                                             const powertrain::EngineCalibration& cal, std::size_t m,
                                             int settle_steps = 30)
{
    auto s = powertrain::EngineState::cold(cal);
    s.T_cool = s.T_cool_dyn = s.T_oil = cal.T_cool_target;
    std::vector<FeatureRow> rows;
    for (int k = 0; k < settle_steps + static_cast<int>(m); ++k) {
        s = powertrain::advance_engine(s, op.omega, op.torque, lim, cal, 1.0);
        if (k >= settle_steps) {
            rows.push_back(extract(s));
        }
    }
    return rows;
}

/// Hook for the static fuel curve: averaged rate plus the model's error at a settled warm point.
inline powertrain::FuelCorrection make_fuel_correction(CorrectionModel model, powertrain::EngineLimits lim,
                                                       powertrain::EngineCalibration cal)
{
    if (model.target != Target::fuel) {
        throw ValidationError("fuel correction needs a fuel-target model");
    }
    return [model = std::move(model), lim, cal](const powertrain::OolPoint& op, double averaged) {
        if (!op.engine_on) {
            return averaged;
        }
        const auto rows = steady_window(op, lim, cal, model.window);
        return corrected_fuel(model, rows, averaged).rate;
    };
}

inline nlohmann::json to_json(const CorrectionModel& m)
{
    nlohmann::json j;
    j["kind"] = to_string(m.kind);
    j["target"] = m.target == Target::fuel ? "fuel" : "coolant";
    std::vector<std::string> in;
    for (auto f : m.inputs) {
        in.emplace_back(name(f));
    }
    j["inputs"] = in;
    j["window"] = m.window;
    j["norm_mean"] = m.norm.mean;
    j["norm_scale"] = m.norm.scale;
    j["y_scale"] = m.y_scale;
    switch (m.kind) {
    case ModelKind::lstm: j["weights"] = ml::to_json(m.lstm); break;
    case ModelKind::rnn: j["weights"] = ml::to_json(m.rnn); break;
    case ModelKind::mlp: j["weights"] = ml::to_json(m.mlp); break;
    }
    return j;
}

inline CorrectionModel correction_from_json(const nlohmann::json& j)
{
    CorrectionModel m;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "lstm") {
        m.kind = ModelKind::lstm;
        m.lstm = ml::lstm_from_json(j.at("weights"));
    } else if (kind == "rnn") {
        m.kind = ModelKind::rnn;
        m.rnn = ml::rnn_from_json(j.at("weights"));
    } else if (kind == "mlp") {
        m.kind = ModelKind::mlp;
        m.mlp = ml::mlp_from_json(j.at("weights"));
    } else {
        throw ValidationError("unknown correction model kind '" + kind + "'");
    }
    m.target = j.at("target").get<std::string>() == "fuel" ? Target::fuel : Target::coolant;
    for (const auto& f : j.at("inputs")) {
        m.inputs.push_back(parse_feature(f.get<std::string>()));
    }
    m.window = j.at("window").get<std::size_t>();
    m.norm.mean = j.at("norm_mean").get<std::vector<double>>();
    m.norm.scale = j.at("norm_scale").get<std::vector<double>>();
    m.y_scale = j.at("y_scale").get<double>();
    if (m.norm.mean.size() != m.inputs.size() || m.norm.scale.size() != m.inputs.size()) {
        throw DimensionError("correction model: normalization size does not match inputs");
    }
    return m;
}

} // namespace hevlab::calib
