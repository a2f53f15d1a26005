#include "kbcrane/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace kbcrane;

namespace {

ScenarioConfig short_run(int preset, double t_final, double dt = 1e-3) {
    ScenarioConfig cfg = scenario_preset(preset);
    cfg.t_final = t_final;
    cfg.dt = dt;
    return cfg;
}

TrajectoryRow row_at(double t, const Vec4 &actuated, double theta1 = 0.0, double theta2 = 0.0) {
    TrajectoryRow r;
    r.t = t;
    r.q << actuated, theta1, theta2;
    return r;
}

} // namespace

TEST(Rk4, ExponentialDecay) {
    double x = 1.0;
    const auto f = [](double, double v) { return -v; };
    for (int k = 0; k < 10; ++k) x = rk4_step(x, 0.1 * k, 0.1, f);
    EXPECT_NEAR(x, std::exp(-1.0), 1e-6);
}

TEST(Rk4, FourthOrderOnTimeDependentField) {
    // x' = cos t, x(0) = 0: global error scales as dt^4.
    auto run = [](double dt) {
        double x = 0.0;
        const int n = static_cast<int>(std::lround(2.0 / dt));
        for (int k = 0; k < n; ++k)
            x = rk4_step(x, k * dt, dt, [](double t, double) { return std::cos(t); });
        return std::abs(x - std::sin(2.0));
    };
    const double order = std::log2(run(0.2) / run(0.1));
    EXPECT_NEAR(order, 4.0, 0.2);
}

TEST(StepRk4, RestWithoutGravityStaysPut) {
    CraneParams p;
    p.g = 0.0;
    GeneralizedState s;
    s.q << 0.3, 0.2, -0.1, 2.0, 0.0, 0.0;
    const auto zero = [](double, const GeneralizedState &) { return ControlInput{}; };
    GeneralizedState x = s;
    for (int k = 0; k < 100; ++k) x = step_rk4(p, x, zero, 1e-2, k * 1e-2);
    EXPECT_EQ(x.q, s.q);
    EXPECT_EQ(x.qdot, s.qdot);
}

TEST(Wind, ZeroForceGivesZeroTorque) {
    GeneralizedState s;
    s.q << 0.3, 0.4, 0.2, 2.0, 0.1, -0.2;
    EXPECT_TRUE(wind_generalized_force(CraneParams{}, s, Vec3::Zero()).isZero(0.0));
}

TEST(Wind, VerticalForceOnHangingPayloadPullsCable) {
    GeneralizedState s;
    s.q << 0.3, 0.4, 0.2, 2.0, 0.0, 0.0;
    const Vec6 tau = wind_generalized_force(CraneParams{}, s, Vec3(0.0, 0.0, -120.0));
    EXPECT_NEAR(tau[kCable], 120.0, 1e-5);
    EXPECT_NEAR(tau[kTheta1], 0.0, 1e-5);
    EXPECT_NEAR(tau[kTheta2], 0.0, 1e-5);
}

TEST(Wind, HorizontalForceDoesNotStretchHangingCable) {
    GeneralizedState s;
    s.q << 0.0, 0.3, 0.2, 2.0, 0.0, 0.0;
    const Vec6 tau = wind_generalized_force(CraneParams{}, s, Vec3(50.0, 0.0, 0.0));
    EXPECT_NEAR(tau[kCable], 0.0, 1e-5);
    EXPECT_GT(tau.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Disturbance, ActiveWindowIsHalfOpen) {
    const DisturbanceSpec g;
    EXPECT_FALSE(g.active(29.999));
    EXPECT_TRUE(g.active(30.0));
    EXPECT_TRUE(g.active(30.999));
    EXPECT_FALSE(g.active(31.0));
}

TEST(Presets, DefineTheFiveScenarios) {
    for (int id = 1; id <= 5; ++id) {
        const auto cfg = scenario_preset(id);
        EXPECT_EQ(cfg.name, "scenario" + std::to_string(id));
        EXPECT_DOUBLE_EQ(cfg.initial_state.q[kCable], 1.0);
        EXPECT_DOUBLE_EQ(cfg.dt, 1e-3);
        EXPECT_DOUBLE_EQ(cfg.t_final, 150.0);
        EXPECT_NO_THROW(cfg.validate());
    }
    EXPECT_DOUBLE_EQ(scenario_preset(2).initial_state.q[kTheta1], 0.2);
    EXPECT_DOUBLE_EQ(scenario_preset(2).initial_state.q[kTheta2], 0.1);
    EXPECT_DOUBLE_EQ(scenario_preset(3).plant_params.m, 50.0);
    EXPECT_DOUBLE_EQ(scenario_preset(3).nominal_params.m, 100.0);
    ASSERT_EQ(scenario_preset(4).disturbances.size(), 1u);
    EXPECT_TRUE(scenario_preset(5).noise.has_value());
    EXPECT_THROW(scenario_preset(0), std::invalid_argument);
    EXPECT_THROW(scenario_preset(6), std::invalid_argument);
}

TEST(ScenarioConfig, ValidationNamesTheField) {
    auto expect_message = [](ScenarioConfig cfg, const std::string &needle) {
        try {
            cfg.validate();
            ADD_FAILURE() << "expected invalid_argument containing " << needle;
        } catch (const std::invalid_argument &e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    ScenarioConfig cfg = scenario_preset(1);
    cfg.dt = 0.0;
    expect_message(cfg, "dt");
    cfg = scenario_preset(1);
    cfg.plant_params.m = -1.0;
    expect_message(cfg, "'m'");
    cfg = scenario_preset(1);
    cfg.initial_state.q[kTheta1] = 2.0;
    expect_message(cfg, "theta1");
    cfg = scenario_preset(1);
    cfg.gains.kd_beta = 0.0;
    expect_message(cfg, "kd_beta");
}

TEST(ScenarioConfig, SampleCountOnUniformGrid) {
    ScenarioConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 150.0;
    EXPECT_EQ(cfg.sample_count(), 150001u);
    cfg.dt = 0.1;
    cfg.t_final = 0.3; // 2.9999999999999996 in binary
    EXPECT_EQ(cfg.sample_count(), 4u);
    cfg.t_final = 0.35;
    EXPECT_EQ(cfg.sample_count(), 4u);
}

TEST(Simulate, RowGridAndFirstRow) {
    const auto cfg = short_run(1, 0.5);
    const auto log = run_scenario(cfg);
    ASSERT_EQ(log.rows.size(), 501u);
    for (std::size_t k = 0; k < log.rows.size(); ++k)
        EXPECT_EQ(log.rows[k].t, static_cast<double>(k) * 1e-3);
    EXPECT_EQ(log.rows.front().q, cfg.initial_state.q);
    EXPECT_EQ(log.rows.front().u,
              pd_gravity_control(cfg.nominal_params, cfg.initial_state, cfg.setpoint, cfg.gains).u);
    EXPECT_EQ(log.rows.front().V,
              lyapunov_V(cfg.plant_params, cfg.initial_state, cfg.setpoint, cfg.gains));
}

TEST(Simulate, DeterministicWithNoise) {
    auto cfg = short_run(5, 1.0);
    cfg.rng_seed = 11;
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        EXPECT_EQ(a.rows[k].q, b.rows[k].q);
        EXPECT_EQ(a.rows[k].u, b.rows[k].u);
    }
    cfg.rng_seed = 12;
    const auto c = run_scenario(cfg);
    EXPECT_NE(a.rows.back().u, c.rows.back().u);
}

TEST(Simulate, NoiseEntersOnlyThroughTheController) {
    auto cfg = short_run(5, 0.2);
    const auto noisy = run_scenario(cfg);
    cfg.noise.reset();
    const auto clean = run_scenario(cfg);
    // Same initial plant state, different measured input.
    EXPECT_EQ(noisy.rows.front().q, clean.rows.front().q);
    EXPECT_NE(noisy.rows.front().u, clean.rows.front().u);
    EXPECT_LT((noisy.rows.back().q - clean.rows.back().q).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Simulate, LyapunovNonIncreasingForExactModel) {
    for (int id : {1, 2}) {
        const auto log = run_scenario(short_run(id, 20.0));
        const double V0 = log.rows.front().V;
        for (std::size_t k = 1; k < log.rows.size(); ++k)
            ASSERT_LE(log.rows[k].V - log.rows[k - 1].V, 1e-6 * V0)
                << "scenario " << id << " at t = " << log.rows[k].t;
        EXPECT_LT(log.rows.back().V, V0);
    }
}

TEST(Simulate, GustChangesTrajectoryOnlyAfterOnset) {
    auto cfg = short_run(4, 2.0);
    cfg.disturbances.front().t_start = 1.0;
    cfg.disturbances.front().duration = 0.5;
    const auto gust = run_scenario(cfg);
    cfg.disturbances.clear();
    const auto calm = run_scenario(cfg);
    for (std::size_t k = 0; k <= 1000; ++k) EXPECT_EQ(gust.rows[k].q, calm.rows[k].q);
    EXPECT_NE(gust.rows.back().q, calm.rows.back().q);
}

TEST(Simulate, DomainExitIsReportedWithPartialLog) {
    auto cfg = short_run(4, 10.0);
    cfg.disturbances.front().t_start = 0.1;
    cfg.disturbances.front().force_world = Vec3(1e5, 1e5, 0.0);
    const auto res = simulate(cfg);
    ASSERT_TRUE(res.aborted.has_value());
    EXPECT_GT(res.aborted->time(), 0.1);
    EXPECT_LT(res.aborted->time(), 10.0);
    EXPECT_NE(std::string(res.aborted->what()).find("theta"), std::string::npos);
    EXPECT_FALSE(res.log.rows.empty());
    EXPECT_EQ(res.log.rows.back().t, res.aborted->time());
    EXPECT_THROW(run_scenario(cfg), SimulationAborted);
}

TEST(Simulate, LqrControllerRunsFromEquilibrium) {
    ScenarioConfig cfg;
    cfg.controller = ControllerKind::Lqr;
    cfg.initial_state.q << cfg.setpoint.as_vector(), 0.0, 0.0;
    cfg.t_final = 1.0;
    const auto log = run_scenario(cfg);
    EXPECT_LT((log.rows.back().q - log.rows.front().q).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Metrics, ConstantLogAtSetpoint) {
    const Setpoint sp;
    TrajectoryLog log;
    for (int k = 0; k <= 10; ++k) log.rows.push_back(row_at(k, sp.as_vector()));
    const auto m = metrics(log, sp);
    for (const auto &ts : m.settling_time) {
        ASSERT_TRUE(ts.has_value());
        EXPECT_EQ(*ts, 0.0);
    }
    EXPECT_EQ(m.residual_swing[0], 0.0);
    EXPECT_EQ(m.residual_swing[1], 0.0);
    EXPECT_EQ(*m.overall_settling_time(), 0.0);
}

TEST(Metrics, SettlingAndSwingWindow) {
    Setpoint sp;
    sp.alpha_d = 1.0;
    sp.beta_d = sp.gamma_d = 0.0;
    sp.d_d = 1.0;
    TrajectoryLog log;
    // alpha: 0, 0.5, 0.99, 1.05 (outside 2% band), 1.01, 1.0 ...
    const double alpha[] = {0.0, 0.5, 0.99, 1.05, 1.01, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    for (int k = 0; k <= 10; ++k) {
        const double theta = k == 7 ? 0.3 : (k == 9 ? -0.4 : 0.0);
        log.rows.push_back(row_at(k, Vec4(alpha[k], 0.0, 0.0, 1.0), theta, 0.0));
    }
    const auto m = metrics(log, sp);
    ASSERT_TRUE(m.settling_time[0].has_value());
    EXPECT_EQ(*m.settling_time[0], 4.0);
    EXPECT_EQ(*m.overall_settling_time(), 4.0);
    // Final 20% of [0, 10] is t >= 8.
    EXPECT_EQ(m.residual_swing[0], 0.4);
    EXPECT_EQ(m.final_error[0], 0.0);
}

TEST(Metrics, NeverSettlingIsEmpty) {
    Setpoint sp;
    TrajectoryLog log;
    log.rows.push_back(row_at(0, Vec4::Zero()));
    log.rows.push_back(row_at(1, Vec4::Zero()));
    const auto m = metrics(log, sp);
    EXPECT_FALSE(m.settling_time[0].has_value());
    EXPECT_FALSE(m.overall_settling_time().has_value());
    EXPECT_THROW(metrics(TrajectoryLog{}, sp), std::invalid_argument);
}
