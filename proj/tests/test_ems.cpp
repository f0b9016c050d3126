#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hevlab/cycle.hpp"
#include "hevlab/ems/accounting.hpp"
#include "hevlab/ems/dp.hpp"
#include "hevlab/ems/ecms.hpp"

using namespace hevlab;
using namespace hevlab::ems;

namespace {

const powertrain::Plant& plant()
{
    static const powertrain::Plant p = powertrain::reference_plant();
    return p;
}

const cycle::DriveCycle& urban()
{
    static const cycle::DriveCycle c = cycle::builtin_cycle("urban300");
    return c;
}

powertrain::BatteryState flat_battery(double soc)
{
    powertrain::BatteryState b;
    b.soc = soc;
    b.capacity_ah = 85.0;
    b.u_oc = 345.0;
    b.r_int = 0.1;
    return b;
}

// Shared urban300 results: tuned constant-EF run and the DP reference.
struct UrbanRuns {
    EmsContext ctx;
    ShootingResult shot;
    double eta_corr = 0.0;
    DpSolution dp;
};

const UrbanRuns& urban_runs()
{
    static const UrbanRuns r = [] {
        UrbanRuns u;
        u.ctx = make_context(plant(), 0.35);
        u.shot = shoot_constant_ef(plant(), urban(), 0.35, u.ctx);
        u.eta_corr = u.ctx.eta_ice_est / u.shot.lambda;
        DpOptions o;
        o.soc_ref = 0.35;
        o.terminal_slope = soc_fuel_slope(plant().battery.state(0.35), u.eta_corr);
        u.dp = dp_solve(plant(), urban(), 0.35, o);
        return u;
    }();
    return r;
}

double corrected(const powertrain::SimResult& r)
{
    const auto& u = urban_runs();
    return soc_corrected_fuel(r.final_state.fuel_l, r.final_state.battery.soc, r.initial_soc,
                              plant().battery.state(r.initial_soc), u.eta_corr);
}

} // namespace

TEST(SocDerivativeTest, ZeroPowerZeroRate)
{
    EXPECT_EQ(soc_derivative(0.0, flat_battery(0.5)), 0.0);
}

TEST(SocDerivativeTest, QuadraticCurrentOracle)
{
    const auto b = flat_battery(0.5);
    const double i = (345.0 - std::sqrt(345.0 * 345.0 - 4.0 * 0.1 * 10e3)) / (2.0 * 0.1);
    EXPECT_NEAR(soc_derivative(10e3, b), -i / (85.0 * 3600.0), 1e-15);
    EXPECT_NEAR(soc_derivative(10e3, b), -9.553e-5, 5e-8);
    EXPECT_GT(soc_derivative(-10e3, b), 0.0);
}

TEST(HamiltonianTest, FreeElectricityPrefersMaxElectric)
{
    const auto bat = plant().battery.state(0.5);
    const auto ctx = make_context(plant(), 0.35);
    const double p_dem = 20e3;
    const auto d = ecms_step(plant(), bat, 0.0, p_dem, ctx);
    EXPECT_DOUBLE_EQ(d.p_bat, p_dem);
    EXPECT_EQ(d.p_ice, 0.0);
    EXPECT_EQ(d.cost, 0.0);
}

TEST(HamiltonianTest, ZeroBatteryPowerIsEngineFuel)
{
    for (double p : {5e3, 25e3, 60e3}) {
        EXPECT_DOUBLE_EQ(hamiltonian(plant(), 0.0, 1.3, p, 0.38), plant().fuel.rate(p));
    }
}

TEST(HamiltonianTest, BrakingAllowsPartialRegeneration)
{
    const double lhv = plant().engine->lhv();
    EXPECT_DOUBLE_EQ(hamiltonian(plant(), -4e3, 1.0, -10e3, 0.4), -4e3 / (0.4 * lhv));
    EXPECT_TRUE(std::isinf(hamiltonian(plant(), -11e3, 1.0, -10e3, 0.4)));
    EXPECT_TRUE(std::isinf(hamiltonian(plant(), 1e3, 1.0, -10e3, 0.4)));
}

TEST(HamiltonianTest, CoarseGridMatchesDenseArgmin)
{
    const auto bat = plant().battery.state(0.5);
    const auto ctx = make_context(plant(), 0.35);
    const auto coarse = ecms_step(plant(), bat, 1.2, 25e3, ctx, 21);
    const auto dense = ecms_step(plant(), bat, 1.2, 25e3, ctx, 2001, 0);
    EXPECT_LE(coarse.cost, dense.cost * 1.005);
    const auto iv = admissible_battery_power(plant(), bat, 25e3, 1.0);
    EXPECT_LE(std::abs(coarse.p_bat - dense.p_bat), (iv.hi - iv.lo) / 20.0);
}

TEST(EcmsStepTest, NoDemandNoBatteryUse)
{
    const auto ctx = make_context(plant(), 0.35);
    const auto d = ecms_step(plant(), plant().battery.state(0.5), 2.0, 0.0, ctx);
    EXPECT_EQ(d.p_bat, 0.0);
    EXPECT_EQ(d.p_ice, 0.0);
}

TEST(EcmsStepTest, BatteryPowerNonIncreasingInLambda)
{
    const auto ctx = make_context(plant(), 0.35);
    for (double p_dem : {-15e3, 8e3, 20e3, 45e3}) {
        const auto bat = plant().battery.state(0.5);
        double prev = std::numeric_limits<double>::infinity();
        for (double l = 0.0; l <= 3.0 + 1e-9; l += 0.05) {
            const double p = ecms_step(plant(), bat, l, p_dem, ctx).p_bat;
            EXPECT_LE(p, prev + 1e-6) << "P_dem " << p_dem << " lambda " << l;
            prev = p;
        }
    }
}

TEST(EcmsStepTest, UnservableDemandThrows)
{
    const auto ctx = make_context(plant(), 0.35);
    EXPECT_THROW(ecms_step(plant(), plant().battery.state(0.5), 1.0, 500e3, ctx), ConstraintError);
}

TEST(EcmsStepTest, FactorRangeBracketsChargeBehaviour)
{
    const auto ctx = make_context(plant(), 0.35);
    const auto lo = powertrain::simulate(plant(), urban(), 0.35, constant_ef_policy(plant(), ctx, ef_min));
    const auto hi = powertrain::simulate(plant(), urban(), 0.35, constant_ef_policy(plant(), ctx, ef_max));
    EXPECT_LT(lo.final_state.battery.soc, 0.35 - ctx.tolerance);
    EXPECT_GT(hi.final_state.battery.soc, 0.35);
}

TEST(EcmsStepTest, MatchesDenseSearchAlongCycle)
{
    const auto ctx = make_context(plant(), 0.35);
    double worst = 0.0;
    const auto r = powertrain::simulate(plant(), urban(), 0.35, [&](std::size_t, const powertrain::PowertrainState& s, double p_dem) {
        const auto a = ecms_step(plant(), s.battery, 1.1, p_dem, ctx);
        const auto b = ecms_step(plant(), s.battery, 1.1, p_dem, ctx, 2001, 0);
        worst = std::max(worst, (a.cost - b.cost) / std::max(std::abs(b.cost), 1e-12));
        return powertrain::Split{a.p_ice, a.p_bat, 1.1};
    });
    EXPECT_EQ(r.trace.size(), urban().size());
    EXPECT_LE(worst, 0.005);
}

TEST(CostateTest, ZeroAndLinear)
{
    const auto bat = flat_battery(0.5);
    const double lhv = units::gasoline_lhv;
    EXPECT_EQ(ef_from_costate(0.0, 0.38, bat, lhv), 0.0);
    const double a = ef_from_costate(-3.0, 0.38, bat, lhv);
    EXPECT_NEAR(ef_from_costate(-6.0, 0.38, bat, lhv), 2.0 * a, 1e-12 * std::abs(a));
    EXPECT_NEAR(a, lhv * 0.38 * 3.0 / (3600.0 * 85.0 * 345.0), 1e-15);
}

TEST(CostateTest, RoundTrip)
{
    const auto bat = flat_battery(0.4);
    for (double l : {0.5, 1.0, 1.37, 2.0}) {
        const double p = costate_from_ef(l, 0.38, bat, units::gasoline_lhv);
        EXPECT_NEAR(ef_from_costate(p, 0.38, bat, units::gasoline_lhv), l, 1e-12);
    }
}

TEST(AecmsTest, ZeroGainsHoldInitialFactor)
{
    PiGains g;
    g.kp = 0.0;
    g.ki = 0.0;
    g.lambda0 = 1.3;
    for (double soc : {0.2, 0.35, 0.7}) {
        EXPECT_DOUBLE_EQ(aecms_update(g, soc, 0.35, 1.0), 1.3);
    }
}

TEST(AecmsTest, ProportionalIntegralClosedForm)
{
    PiGains g;
    g.kp = 5.0;
    g.ki = 0.1;
    g.lambda0 = 1.2;
    EXPECT_NEAR(aecms_update(g, 0.33, 0.35, 1.0), 1.2 + 5.0 * 0.02 + 0.1 * 0.02, 1e-12);
    EXPECT_NEAR(aecms_update(g, 0.34, 0.35, 1.0), 1.2 + 5.0 * 0.01 + 0.1 * 0.03, 1e-12);
    EXPECT_NEAR(g.integral, 0.03, 1e-15);
}

TEST(AecmsTest, IntegralFrozenOnClamp)
{
    PiGains g;
    g.kp = 10.0;
    g.ki = 0.5;
    g.lambda0 = 1.2;
    // hand trace: e = 0.1 saturates at once (1.2 + 1 + 0.05 > 2), so nothing accumulates
    for (int k = 0; k < 50; ++k) {
        EXPECT_DOUBLE_EQ(aecms_update(g, 0.25, 0.35, 1.0), 2.0);
    }
    EXPECT_DOUBLE_EQ(g.integral, 0.0);
    // error reverses: output leaves the clamp on the first step
    EXPECT_NEAR(aecms_update(g, 0.36, 0.35, 1.0), 1.2 - 0.1 - 0.005, 1e-12);
    EXPECT_NEAR(g.integral, -0.01, 1e-15);
}

TEST(AecmsTest, FeedbackImprovesTerminalTracking)
{
    const auto ctx = make_context(plant(), 0.35);
    PiGains g;
    const auto fixed = powertrain::simulate(plant(), urban(), 0.35, constant_ef_policy(plant(), ctx, g.lambda0));
    const auto adaptive = powertrain::simulate(plant(), urban(), 0.35, aecms_policy(plant(), ctx, g));
    EXPECT_LT(std::abs(adaptive.final_state.battery.soc - 0.35), std::abs(fixed.final_state.battery.soc - 0.35));
}

TEST(RuleBasedTest, RuleRegions)
{
    const RuleParams rp;
    auto s = rule_based_step(plant(), plant().battery.state(0.5), 5e3, rp);
    EXPECT_EQ(s.p_ice, 0.0);
    EXPECT_EQ(s.p_bat, 5e3);
    s = rule_based_step(plant(), plant().battery.state(0.30), 20e3, rp);
    EXPECT_DOUBLE_EQ(s.p_ice, 28e3);
    EXPECT_DOUBLE_EQ(s.p_bat, -8e3);
    s = rule_based_step(plant(), plant().battery.state(0.34), 20e3, rp);
    EXPECT_DOUBLE_EQ(s.p_ice, 20e3);
    EXPECT_EQ(s.p_bat, 0.0);
    s = rule_based_step(plant(), plant().battery.state(0.5), -6e3, rp);
    EXPECT_EQ(s.p_ice, 0.0);
    EXPECT_EQ(s.p_bat, -6e3);
}

TEST(AccountingTest, UnchangedAtTarget)
{
    EXPECT_EQ(soc_corrected_fuel(1.234, 0.4, 0.4, flat_battery(0.4), 0.3), 1.234);
}

TEST(AccountingTest, OnePercentDeficitArithmetic)
{
    const double kg = 0.01 * 345.0 * 85.0 * 3600.0 / (0.19 * 44e6);
    const double litres = kg / 0.745;
    EXPECT_NEAR(soc_corrected_fuel(0.0, 0.34, 0.35, flat_battery(0.35), 0.19), litres, 1e-12);
    EXPECT_NEAR(litres, 0.170, 0.001);
}

TEST(AccountingTest, AffineInFinalSoc)
{
    const auto bat = flat_battery(0.35);
    auto f = [&](double fuel, double soc) { return soc_corrected_fuel(fuel, soc, 0.35, bat, 0.3); };
    const double slope_a = (f(1.0, 0.36) - f(1.0, 0.33)) / 0.03;
    const double slope_b = (f(0.2, 0.50) - f(0.2, 0.21)) / 0.29;
    EXPECT_NEAR(slope_a, slope_b, 1e-9 * std::abs(slope_a));
    EXPECT_NEAR(f(1.0, 0.33) - f(0.2, 0.33), 0.8, 1e-12);
    EXPECT_THROW(soc_fuel_slope(bat, 0.0), ValidationError);
}

TEST(AccountingTest, FuelEconomy)
{
    EXPECT_DOUBLE_EQ(fuel_economy(0.5, 10e3), 5.0);
    EXPECT_THROW(fuel_economy(0.5, 0.0), DomainError);
}

TEST(DiscreteDpTest, MatchesExhaustiveEnumeration)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        // cost[k][from][to]; the action is the next level
        double cost[3][2][2];
        for (auto& k : cost) {
            for (auto& f : k) {
                for (double& c : f) {
                    c = u(rng);
                }
            }
        }
        const std::vector<double> terminal{u(rng), u(rng)};
        const int start = trial % 2;
        const auto r = discrete_dp(3, 2, 2, start,
                                   [&](int k, int s, int a) -> std::optional<std::pair<int, double>> {
                                       return std::pair{a, cost[k][s][a]};
                                   },
                                   terminal);
        double best = dp_inf;
        for (int path = 0; path < 8; ++path) {
            int s = start;
            double c = 0.0;
            for (int k = 0; k < 3; ++k) {
                const int a = (path >> k) & 1;
                c += cost[k][s][a];
                s = a;
            }
            best = std::min(best, c + terminal[static_cast<std::size_t>(s)]);
        }
        EXPECT_NEAR(r.cost, best, 1e-12);
        ASSERT_EQ(r.states.size(), 4u);
        double replay = 0.0;
        for (int k = 0; k < 3; ++k) {
            replay += cost[k][r.states[static_cast<std::size_t>(k)]][r.actions[static_cast<std::size_t>(k)]];
        }
        EXPECT_NEAR(replay + terminal[static_cast<std::size_t>(r.states.back())], best, 1e-12);
    }
}

TEST(DiscreteDpTest, NoFeasiblePathThrows)
{
    EXPECT_THROW(discrete_dp(2, 2, 2, 0, [](int, int, int) -> std::optional<std::pair<int, double>> { return std::nullopt; },
                             {0.0, 0.0}),
                 InfeasibleError);
}

TEST(DpSolveTest, StandstillBurnsNothing)
{
    const cycle::DriveCycle idle("idle", 1.0, std::vector<double>(60, 0.0));
    DpOptions o;
    o.soc_ref = 0.5;
    const auto sol = dp_solve(plant(), idle, 0.5, o);
    EXPECT_EQ(sol.fuel_l, 0.0);
    EXPECT_EQ(sol.rollout.final_state.battery.soc, 0.5);
}

TEST(DpSolveTest, BellmanConsistencyOnNodes)
{
    const std::vector<double> v(urban().speeds().begin(), urban().speeds().begin() + 80);
    const cycle::DriveCycle shortc("short", 1.0, v);
    DpOptions o;
    o.soc_ref = 0.5;
    o.soc_points = 61;
    o.pbat_points = 41;
    o.tolerance = 0.02;
    const auto sol = dp_solve(plant(), shortc, 0.5, o);
    const double q = plant().battery.state(0.5).capacity_coulomb();
    int checked = 0;
    for (std::size_t k = 0; k < sol.policy.size(); k += 7) {
        for (std::size_t i = 0; i < sol.soc_grid.size(); i += 5) {
            const double p = sol.policy[k][i];
            if (!std::isfinite(p)) {
                continue;
            }
            const auto bat = plant().battery.state(sol.soc_grid[i]);
            const double next = p == 0.0 ? bat.soc : bat.soc - powertrain::battery_current(bat, p) / q;
            const double stage = plant().fuel.rate(std::max(0.0, sol.p_dem[k] - p));
            EXPECT_NEAR(sol.cost_to_go[k][i], stage + sol.value(k + 1, next), 1e-12);
            ++checked;
        }
    }
    EXPECT_GT(checked, 50);
    EXPECT_LE(std::abs(sol.rollout.final_state.battery.soc - 0.5), 0.02);
}

TEST(DpSolveTest, UnreachableWindowThrows)
{
    const cycle::DriveCycle idle("idle", 1.0, std::vector<double>(30, 0.0));
    DpOptions o;
    o.soc_ref = 0.6;
    EXPECT_THROW(dp_solve(plant(), idle, 0.3, o), InfeasibleError);
    o.soc_points = 20;
    EXPECT_THROW(dp_solve(plant(), idle, 0.6, o), ValidationError);
}

TEST(DpSolveTest, PolicyCsv)
{
    const cycle::DriveCycle idle("idle", 1.0, std::vector<double>(5, 0.0));
    DpOptions o;
    o.soc_ref = 0.5;
    o.soc_points = 50;
    const auto sol = dp_solve(plant(), idle, 0.5, o);
    const auto path = (std::filesystem::temp_directory_path() / "hevlab_dp_policy.csv").string();
    write_policy_csv(sol, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,soc_index,p_bat_opt");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    int finite = 0;
    for (const auto& row : sol.policy) {
        finite += static_cast<int>(std::count_if(row.begin(), row.end(), [](double x) { return std::isfinite(x); }));
    }
    EXPECT_EQ(rows, finite);
    EXPECT_EQ(rows, 5 * 50);
    std::filesystem::remove(path);
}

TEST(DpSolveTest, DominatesOnlineStrategies)
{
    const auto& u = urban_runs();
    const double dp = corrected(u.dp.rollout);
    PiGains g;
    g.lambda0 = u.shot.lambda;
    const auto rb = powertrain::simulate(plant(), urban(), 0.35, rule_based_policy(plant(), RuleParams{}));
    const auto ae = powertrain::simulate(plant(), urban(), 0.35, aecms_policy(plant(), u.ctx, g));
    EXPECT_LE(dp, corrected(u.shot.sim) * 1.005);
    EXPECT_LE(dp, corrected(ae) * 1.005);
    EXPECT_LT(dp, corrected(rb));
    EXPECT_LE(std::abs(u.dp.rollout.final_state.battery.soc - 0.35), 0.005 + 1e-9);
}

TEST(ShootingTest, LandsOnReference)
{
    const auto& u = urban_runs();
    EXPECT_TRUE(u.shot.bracketed);
    EXPECT_NEAR(u.shot.sim.final_state.battery.soc, 0.35, u.ctx.tolerance);
    EXPECT_GE(u.shot.lambda, ef_min);
    EXPECT_LE(u.shot.lambda, ef_max);
}
