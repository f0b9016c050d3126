#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hevlab/ml/serialize.hpp"

using namespace hevlab;
using namespace hevlab::ml;

namespace {

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Scalar transcription of the peephole cell, element by element.
void scalar_cell(const LstmWeights& w, const std::vector<double>& x, std::vector<double>& h, std::vector<double>& c)
{
    const int H = w.hidden_dim();
    const int I = w.input_dim();
    std::vector<double> i(H), f(H), g(H), o(H), cn(H), hn(H);
    auto pre = [&](Gate gate, int r, const std::vector<double>& hp) {
        double z = w.bias(gate)[r];
        for (int k = 0; k < I; ++k) {
            z += w.W_x(gate)(r, k) * x[k];
        }
        for (int k = 0; k < H; ++k) {
            z += w.W_h(gate)(r, k) * hp[k];
        }
        return z;
    };
    for (int r = 0; r < H; ++r) {
        i[r] = sig(pre(Gate::input, r, h) + w.peephole(Gate::input)[r] * c[r]);
        f[r] = sig(pre(Gate::forget, r, h) + w.peephole(Gate::forget)[r] * c[r]);
        g[r] = std::tanh(pre(Gate::cell, r, h));
        cn[r] = f[r] * c[r] + i[r] * g[r];
    }
    for (int r = 0; r < H; ++r) {
        o[r] = sig(pre(Gate::output, r, h) + w.peephole(Gate::output)[r] * cn[r]);
        hn[r] = o[r] * std::tanh(cn[r]);
    }
    h = hn;
    c = cn;
}

Mat random_mat(int rows, int cols, std::mt19937_64& rng, double scale = 1.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int k = 0; k < cols; ++k) {
            m(r, k) = u(rng);
        }
    }
    return m;
}

} // namespace

TEST(LstmCell, ZeroEverythingGivesZeroState)
{
    const LstmWeights w(3, 4);
    const auto out = lstm_cell_forward(Vec::Zero(3), Vec::Zero(4), Vec::Zero(4), w);
    EXPECT_EQ(out.h.norm(), 0.0);
    EXPECT_EQ(out.c.norm(), 0.0);
    EXPECT_DOUBLE_EQ(out.cache.i[0], 0.5);
}

TEST(LstmCell, SaturatedGatesHoldMemory)
{
    LstmWeights w(2, 3);
    w.bias(Gate::forget).setConstant(60.0);
    w.bias(Gate::input).setConstant(-60.0);
    const Vec c_prev = (Vec(3) << 0.3, -1.2, 2.0).finished();
    const auto out = lstm_cell_forward(Vec::Ones(2), Vec::Zero(3), c_prev, w);
    EXPECT_NEAR((out.c - c_prev).norm(), 0.0, 1e-12);
}

TEST(LstmCell, RandomCellMatchesScalarTranscription)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto w = LstmWeights::init(2, 2, seed);
        std::mt19937_64 rng(seed + 100);
        const Mat r = random_mat(3, 2, rng);
        std::vector<double> x{r(0, 0), r(0, 1)}, h{r(1, 0), r(1, 1)}, c{r(2, 0), r(2, 1)};
        const auto out = lstm_cell_forward(r.row(0).transpose(), r.row(1).transpose(), r.row(2).transpose(), w);
        scalar_cell(w, x, h, c);
        for (int k = 0; k < 2; ++k) {
            EXPECT_NEAR(out.h[k], h[k], 1e-12);
            EXPECT_NEAR(out.c[k], c[k], 1e-12);
        }
    }
}

TEST(LstmCell, ShapeMismatch)
{
    const LstmWeights w(2, 3);
    EXPECT_THROW(lstm_cell_forward(Vec::Zero(3), Vec::Zero(3), Vec::Zero(3), w), DimensionError);
    EXPECT_THROW(LstmWeights(0, 3), DimensionError);
}

TEST(LstmSequence, LengthOneIsCellPlusHead)
{
    const auto w = LstmWeights::init(3, 4, 9);
    const Vec x = (Vec(3) << 0.1, -0.4, 0.8).finished();
    const auto cell = lstm_cell_forward(x, Vec::Zero(4), Vec::Zero(4), w);
    EXPECT_NEAR(lstm_predict(Mat(x.transpose()), w), w.head_w().dot(cell.h) + w.head_b(), 1e-15);
}

TEST(LstmSequence, HoldGatesKeepCellConstant)
{
    LstmWeights w(2, 2);
    w.bias(Gate::forget).setConstant(60.0);
    w.bias(Gate::input).setConstant(-60.0);
    const Mat xs = Mat::Constant(5, 2, 0.7);
    const auto cache = lstm_sequence_forward(xs, w);
    for (const auto& s : cache.steps) {
        EXPECT_NEAR(s.c.norm(), 0.0, 1e-20);
    }
}

TEST(LstmSequence, ThreeStepsMatchManualUnroll)
{
    const auto w = LstmWeights::init(2, 3, 21);
    std::mt19937_64 rng(4);
    const Mat xs = random_mat(3, 2, rng);
    std::vector<double> h(3, 0.0), c(3, 0.0);
    for (int t = 0; t < 3; ++t) {
        scalar_cell(w, {xs(t, 0), xs(t, 1)}, h, c);
    }
    double y = w.head_b();
    for (int k = 0; k < 3; ++k) {
        y += w.head_w()[k] * h[k];
    }
    EXPECT_NEAR(lstm_predict(xs, w), y, 1e-12);
    EXPECT_THROW(lstm_predict(Mat(0, 2), w), DomainError);
}

TEST(LstmSequence, HiddenBoundedAndCellGrowthLinear)
{
    auto w = LstmWeights::init(2, 4, 5);
    w.params() *= 8.0;
    std::mt19937_64 rng(6);
    const Mat xs = random_mat(60, 2, rng, 5.0);
    const auto cache = lstm_sequence_forward(xs, w);
    for (std::size_t t = 0; t < cache.steps.size(); ++t) {
        EXPECT_LE(cache.steps[t].h.cwiseAbs().maxCoeff(), 1.0);
        EXPECT_LE(cache.steps[t].c.cwiseAbs().maxCoeff(), static_cast<double>(t + 1) + 1e-12);
    }
}

TEST(LstmBackward, FiniteDifferenceCheck)
{
    auto w = LstmWeights::init(3, 5, 77);
    std::mt19937_64 rng(8);
    std::vector<Mat> xs;
    std::vector<double> ys;
    for (int s = 0; s < 3; ++s) {
        xs.push_back(random_mat(6, 3, rng));
        ys.push_back(0.3 * s - 0.2);
    }
    auto loss = [&](const Vec& p) {
        LstmWeights probe = w;
        probe.params() = p;
        double l = 0.0;
        for (std::size_t s = 0; s < xs.size(); ++s) {
            const double e = lstm_predict(xs[s], probe) - ys[s];
            l += e * e;
        }
        return l / static_cast<double>(xs.size());
    };
    Vec grad = Vec::Zero(w.num_params());
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const auto cache = lstm_sequence_forward(xs[s], w);
        lstm_backward(cache, 2.0 * (cache.output - ys[s]) / static_cast<double>(xs.size()), w, grad);
    }
    const auto rep = finite_difference_check(loss, w.params(), grad, 1e-5, 200);
    EXPECT_EQ(rep.checked, 200u);
    EXPECT_LE(rep.max_rel_error, 1e-4) << "worst index " << rep.worst_index;

    Vec corrupted = grad;
    corrupted[rep.worst_index] += 0.5 * std::abs(corrupted[rep.worst_index]) + 1e-3;
    const auto bad = finite_difference_check(loss, w.params(), corrupted, 1e-5, 200);
    EXPECT_GT(bad.max_rel_error, 1e-2);
}

TEST(LstmBackward, MissingCache)
{
    const LstmWeights w(2, 2);
    Vec g = Vec::Zero(w.num_params());
    EXPECT_THROW(lstm_backward(LstmSequenceCache{}, 1.0, w, g), StateError);
}

TEST(RnnBackward, FiniteDifferenceCheck)
{
    auto w = RnnWeights::init(3, 4, 13);
    std::mt19937_64 rng(14);
    const Mat xs = random_mat(5, 3, rng);
    auto loss = [&](const Vec& p) {
        RnnWeights probe = w;
        probe.params() = p;
        const double e = rnn_predict(xs, probe) - 0.4;
        return e * e;
    };
    Vec grad = Vec::Zero(w.num_params());
    const auto cache = rnn_sequence_forward(xs, w);
    rnn_backward(cache, 2.0 * (cache.output - 0.4), w, grad);
    EXPECT_LE(finite_difference_check(loss, w.params(), grad).max_rel_error, 1e-4);
}

TEST(MlpForward, ZeroWeightsGiveActivationOfZero)
{
    const MlpWeights w({3, 4, 2}, {Activation::tanh, Activation::linear});
    EXPECT_EQ(mlp_forward(Vec(Vec::Ones(3)), w).norm(), 0.0);
}

TEST(MlpForward, IdentityLayer)
{
    MlpWeights w({3, 3}, {Activation::linear});
    w.W(0) = RowMat::Identity(3, 3);
    const Vec x = (Vec(3) << 1.5, -2.0, 0.25).finished();
    EXPECT_EQ(mlp_forward(x, w), x);
}

TEST(MlpForward, TwoLayerMatchesHandMultiply)
{
    const auto w = MlpWeights::init({3, 4, 2}, {Activation::relu, Activation::tanh}, 3);
    std::mt19937_64 rng(1);
    const Mat X = random_mat(3, 5, rng);
    const Mat out = mlp_forward(X, w);
    for (int s = 0; s < 5; ++s) {
        std::vector<double> h(4);
        for (int r = 0; r < 4; ++r) {
            double z = w.b(0)[r];
            for (int k = 0; k < 3; ++k) {
                z += w.W(0)(r, k) * X(k, s);
            }
            h[r] = std::max(z, 0.0);
        }
        for (int r = 0; r < 2; ++r) {
            double z = w.b(1)[r];
            for (int k = 0; k < 4; ++k) {
                z += w.W(1)(r, k) * h[k];
            }
            EXPECT_NEAR(out(r, s), std::tanh(z), 1e-12);
        }
    }
    EXPECT_THROW(mlp_forward(Mat(Mat::Zero(2, 1)), w), DimensionError);
}

TEST(MlpBackward, ConstantOutputHasZeroInputWeightGradient)
{
    auto w = MlpWeights::init({2, 3, 1}, {Activation::tanh, Activation::linear}, 4);
    w.W(1).setZero();
    MlpCache cache;
    const Mat X = (Mat(2, 2) << 1, 2, 3, 4).finished();
    mlp_forward(X, w, &cache);
    Vec g = Vec::Zero(w.num_params());
    mlp_backward(cache, Mat::Ones(1, 2), w, g);
    EXPECT_EQ(g.segment(0, 9).norm(), 0.0);
}

TEST(MlpBackward, ScalarLinearModel)
{
    MlpWeights w({1, 1}, {Activation::linear});
    w.W(0)(0, 0) = 0.7;
    const double x = 2.0, y = 3.0;
    MlpCache cache;
    const Mat out = mlp_forward(Mat::Constant(1, 1, x), w, &cache);
    const auto [loss, d] = squared_error(out, Mat::Constant(1, 1, y));
    Vec g = Vec::Zero(2);
    mlp_backward(cache, d, w, g);
    EXPECT_NEAR(loss, (0.7 * x - y) * (0.7 * x - y), 1e-15);
    EXPECT_NEAR(g[0], 2.0 * (0.7 * x - y) * x, 1e-15);
}

TEST(MlpBackward, MissingCacheAndFiniteDifferences)
{
    auto w = MlpWeights::init({4, 6, 5, 2}, {Activation::tanh, Activation::tanh, Activation::linear}, 11);
    Vec g = Vec::Zero(w.num_params());
    EXPECT_THROW(mlp_backward(MlpCache{}, Mat::Ones(2, 1), w, g), StateError);

    std::mt19937_64 rng(2);
    const Mat X = random_mat(4, 7, rng);
    const Mat T = random_mat(2, 7, rng);
    MlpCache cache;
    const auto [loss0, d] = squared_error(mlp_forward(X, w, &cache), T);
    mlp_backward(cache, d, w, g);
    auto loss = [&](const Vec& p) {
        MlpWeights probe = w;
        probe.params() = p;
        return squared_error(mlp_forward(X, probe), T).first;
    };
    EXPECT_LE(finite_difference_check(loss, w.params(), g).max_rel_error, 1e-4);
}

TEST(MlpBackward, InputGradient)
{
    const auto w = MlpWeights::init({3, 5, 1}, {Activation::tanh, Activation::linear}, 12);
    const Vec x = (Vec(3) << 0.2, -0.5, 0.9).finished();
    MlpCache cache;
    mlp_forward(Mat(x), w, &cache);
    Vec g = Vec::Zero(w.num_params());
    const Mat dx = mlp_backward(cache, Mat::Ones(1, 1), w, g);
    for (int k = 0; k < 3; ++k) {
        Vec up = x, down = x;
        up[k] += 1e-6;
        down[k] -= 1e-6;
        const double num = (mlp_forward(up, w)[0] - mlp_forward(down, w)[0]) / 2e-6;
        EXPECT_NEAR(dx(k, 0), num, 1e-8);
    }
}

TEST(AdamTest, ZeroGradientLeavesWeights)
{
    Adam opt(1e-3);
    Vec p = (Vec(3) << 1, 2, 3).finished();
    const Vec before = p;
    opt.step(p, Vec::Zero(3));
    EXPECT_EQ(p, before);
}

TEST(AdamTest, FirstStepIsLearningRate)
{
    Adam opt(1e-3);
    Vec p = Vec::Zero(2);
    opt.step(p, Vec::Ones(2));
    EXPECT_NEAR(p[0], -1e-3, 1e-10);
}

TEST(AdamTest, QuadraticBowlDecreases)
{
    Adam opt(0.05);
    Vec p = (Vec(2) << 3.0, -2.0).finished();
    auto loss = [](const Vec& q) { return q[0] * q[0] + 4.0 * q[1] * q[1]; };
    double prev = loss(p);
    for (int k = 0; k < 50; ++k) {
        const Vec g = (Vec(2) << 2.0 * p[0], 8.0 * p[1]).finished();
        opt.step(p, g);
        const double now = loss(p);
        EXPECT_LT(now, prev);
        prev = now;
    }
}

TEST(GradCheck, LinearModelExact)
{
    const Vec a = (Vec(3) << 1.5, -2.0, 0.5).finished();
    auto loss = [&](const Vec& p) { return a.dot(p); };
    const auto rep = finite_difference_check(loss, Vec::Ones(3), a);
    EXPECT_LE(rep.max_rel_error, 1e-10);
    EXPECT_DOUBLE_EQ(rep.perturbation, 1e-5);
    EXPECT_DOUBLE_EQ(relative_error(0.0, 0.0), 0.0);
}

TEST(Determinism, SameSeedSameWeights)
{
    const auto a = LstmWeights::init(6, 16, 42);
    const auto b = LstmWeights::init(6, 16, 42);
    EXPECT_EQ(a.params(), b.params());
    const auto c = LstmWeights::init(6, 16, 43);
    EXPECT_NE(a.params(), c.params());
}

TEST(Serialize, RoundTrips)
{
    const auto l = LstmWeights::init(5, 7, 1);
    EXPECT_EQ(lstm_from_json(to_json(l, 1)).params(), l.params());
    const auto r = RnnWeights::init(5, 7, 2);
    EXPECT_EQ(rnn_from_json(to_json(r)).params(), r.params());
    const auto m = MlpWeights::init({3, 8, 1}, {Activation::relu, Activation::linear}, 3);
    const auto j = to_json(m, 3);
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["arch"], "mlp");
    EXPECT_EQ(j["seed"], 3);
    const auto back = mlp_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.params(), m.params());
    EXPECT_EQ(back.activations(), m.activations());
    EXPECT_THROW(lstm_from_json(j), ValidationError);
}

TEST(SoftUpdate, Rates)
{
    Vec t = (Vec(2) << 1.0, 2.0).finished();
    const Vec s = (Vec(2) << 3.0, -2.0).finished();
    Vec copy = t;
    soft_update(copy, s, 1.0);
    EXPECT_EQ(copy, s);
    copy = t;
    soft_update(copy, s, 0.0);
    EXPECT_EQ(copy, t);
    soft_update(t, s, 0.005);
    EXPECT_NEAR(t[0], 0.005 * 3.0 + 0.995 * 1.0, 1e-15);
    EXPECT_NEAR(t[1], 0.005 * -2.0 + 0.995 * 2.0, 1e-15);
    Vec wrong = Vec::Zero(3);
    EXPECT_THROW(soft_update(wrong, s, 0.5), DimensionError);
}
