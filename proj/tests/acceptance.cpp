// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "kbcrane/kbcrane.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace kbcrane;

namespace {

int g_failures = 0;

void report(const std::string &name, bool ok, const std::string &detail) {
    if (!ok) ++g_failures;
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string num(double v, int precision = 4) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

std::string opt(const std::optional<double> &v) { return v ? num(*v) + " s" : "never"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string csv_of(const TrajectoryLog &log) {
    std::ostringstream os;
    write_trajectory_csv(os, log);
    return os.str();
}

struct Run {
    SimulationResult sim;
    double wall = 0.0;
};

Run timed(const ScenarioConfig &cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    Run r{simulate(cfg), 0.0};
    r.wall = seconds_since(t0);
    return r;
}

/// Largest single-step increase of V, relative to V(0).
double max_v_increase(const TrajectoryLog &log) {
    double worst = 0.0;
    for (std::size_t k = 1; k < log.rows.size(); ++k)
        worst = std::max(worst, log.rows[k].V - log.rows[k - 1].V);
    return worst / log.rows.front().V;
}

void structural_suite() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = run_property_suite();
    const double wall = seconds_since(t0);
    bool ok = wall < 10.0;
    std::string detail;
    for (const auto &r : results) {
        ok = ok && r.passed;
        detail += r.name + (r.passed ? " ok " : " FAILED ") + num(r.worst, 2) + "; ";
    }
    report("structural property suite (1000 states)", ok,
           detail + results[3].note + "; " + num(wall, 3) + " s");
}

void energy_oracles(const TrajectoryLog &s1_log) {
    // Conservative open-loop run: u = 0 and no gravity, so T + U is a constant of motion
    // and the boom cannot fall out of the admissible domain.
    CraneParams p;
    p.g = 0.0;
    const Setpoint sp;
    GeneralizedState s;
    s.q << sp.alpha_d, sp.beta_d, sp.gamma_d, sp.d_d, 0.2, -0.1;
    s.qdot << 0.1, 0.03, -0.03, 0.05, 0.2, -0.1;
    auto total = [&](const GeneralizedState &x) {
        return kinetic_energy(p, x) + potential_energy(p, x);
    };
    const double E0 = total(s);
    const auto zero = [](double, const GeneralizedState &) { return ControlInput{}; };
    const double dt = 1e-4;
    double drift = 0.0;
    bool admissible = true;
    for (int k = 0; k < 100000 && admissible; ++k) {
        s = step_rk4(p, s, zero, dt, k * dt);
        admissible = is_admissible(s);
        drift = std::max(drift, std::abs(total(s) - E0) / E0);
    }
    const bool energy_ok = admissible && drift <= 1e-5;

    // Closed loop: central difference of the logged V against -sum kd xdot^2.
    const ControlGains k;
    const auto &rows = s1_log.rows;
    const double h = s1_log.dt;
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        const double fd = (rows[i + 1].V - rows[i - 1].V) / (2.0 * h);
        const double analytic =
            lyapunov_Vdot_analytic(GeneralizedState{rows[i].q, rows[i].qdot}, k);
        worst = std::max(worst, std::abs(fd - analytic));
        scale = std::max(scale, std::abs(analytic));
    }
    const double rel = worst / scale;
    report("energy conservation and dV/dt oracle", energy_ok && rel <= 1e-4,
           "open loop |dE|/E max " + num(drift, 3) + (admissible ? "" : " (left domain)") +
               " (<= 1e-5); dV/dt max error / max |dV/dt| " + num(rel, 3) + " (<= 1e-4)");
}

void scenario1(const Run &run) {
    const auto &log = run.sim.log;
    const MetricsReport m = metrics(log, Setpoint{});
    const auto overall = m.overall_settling_time();
    bool settled = !run.sim.aborted;
    for (const auto &ts : m.settling_time) settled = settled && ts && *ts >= 50.0 && *ts <= 200.0;
    const double v_ratio = m.final_V / m.initial_V;
    const double sw1 = m.residual_swing[0] * kRadToDeg, sw2 = m.residual_swing[1] * kRadToDeg;
    const bool ok = settled && v_ratio <= 1e-3 && sw1 <= 0.5 && sw2 <= 0.5 && run.wall < 60.0;
    report("scenario 1 reproduction", ok,
           "settling alpha/beta/gamma/d " + opt(m.settling_time[0]) + " / " +
               opt(m.settling_time[1]) + " / " + opt(m.settling_time[2]) + " / " +
               opt(m.settling_time[3]) + " (each in [50, 200] s), overall " + opt(overall) +
               "; V(T)/V(0) " + num(v_ratio, 3) + " (<= 1e-3); residual swing " + num(sw1, 3) +
               " / " + num(sw2, 3) + " deg (<= 0.5); final e_alpha " + num(m.final_error[0], 3) +
               " rad; wall " + num(run.wall, 3) + " s (< 60)");
}

void scenario2(const Run &run) {
    const MetricsReport m = metrics(run.sim.log, Setpoint{});
    const double sw1 = m.residual_swing[0] * kRadToDeg, sw2 = m.residual_swing[1] * kRadToDeg;
    const double rise = max_v_increase(run.sim.log);
    const bool ok = !run.sim.aborted && sw1 <= 1.0 && sw2 <= 1.0 && rise <= 1e-6;
    report("scenario 2 reproduction", ok,
           "residual swing " + num(sw1, 3) + " / " + num(sw2, 3) +
               " deg (<= 1); largest step increase of V / V(0) " + num(rise, 3) + " (<= 1e-6)");
}

void scenario3(const Run &run) {
    const ScenarioConfig cfg = scenario_preset(3);
    const auto &rows = run.sim.log.rows;
    const double t_window = 0.8 * rows.back().t;
    const Setpoint &sp = cfg.setpoint;
    const ControlGains &k = cfg.gains;
    const double g = cfg.plant_params.g;
    const double dm = cfg.plant_params.m - cfg.nominal_params.m;
    // Steady state estimated as the mean over the final 20% of the run.
    double e_d = 0, e_b = 0, e_g = 0, cb = 0, cg = 0;
    std::size_t n = 0;
    for (const auto &r : rows) {
        if (r.t < t_window) continue;
        e_d += sp.d_d - r.q[kCable];
        e_b += sp.beta_d - r.q[kBeta];
        e_g += sp.gamma_d - r.q[kGamma];
        cb += std::cos(r.q[kBeta]);
        cg += std::cos(r.q[kGamma]);
        ++n;
    }
    e_d /= n, e_b /= n, e_g /= n, cb /= n, cg /= n;
    const double rhs_d = -dm * g;
    const double rhs_b = g * cfg.plant_params.l_b * cb * dm;
    const double rhs_g = g * cfg.plant_params.l_j * cg * dm;
    const double err_d = std::abs(k.kp_d * e_d - rhs_d) / std::abs(rhs_d);
    const double err_b = std::abs(k.kp_beta * e_b - rhs_b) / std::abs(rhs_b);
    const double err_g = std::abs(k.kp_gamma * e_g - rhs_g) / std::abs(rhs_g);
    const bool ok = !run.sim.aborted && err_d <= 0.01 && err_b <= 0.01 && err_g <= 0.01;
    report("scenario 3 analytic equilibrium", ok,
           "e_d " + num(e_d, 5) + " vs " + num(rhs_d / k.kp_d, 5) + " (rel " + num(err_d, 2) +
               "), e_beta " + num(e_b, 5) + " vs " + num(rhs_b / k.kp_beta, 5) + " (rel " +
               num(err_b, 2) + "), e_gamma " + num(e_g, 5) + " vs " + num(rhs_g / k.kp_gamma, 5) +
               " (rel " + num(err_g, 2) + "), each <= 1%");
}

void scenario4(const Run &run) {
    const MetricsReport m = metrics(run.sim.log, Setpoint{});
    const double sw1 = m.residual_swing[0] * kRadToDeg, sw2 = m.residual_swing[1] * kRadToDeg;
    bool settled = !run.sim.aborted;
    for (const auto &ts : m.settling_time) settled = settled && ts.has_value();
    const bool ok = settled && sw1 <= 1.0 && sw2 <= 2.0;
    report("scenario 4 gust rejection", ok,
           "residual swing " + num(sw1, 3) + " deg (<= 1) / " + num(sw2, 3) +
               " deg (<= 2); settling alpha/beta/gamma/d " + opt(m.settling_time[0]) + " / " +
               opt(m.settling_time[1]) + " / " + opt(m.settling_time[2]) + " / " +
               opt(m.settling_time[3]));
}

void lqr_pipeline(const Run &pd3) {
    const LqrWeights w;
    const auto design = design_lqr(CraneParams{}, Setpoint{}, w);
    const double residual =
        care_residual(design.model.A, design.model.B, w.Q(), w.R(), design.care.P);
    const double bound = 1e-6 * w.Q().norm();
    const double abscissa = spectral_abscissa(design.model.A - design.model.B * design.K);

    ScenarioConfig c1 = scenario_preset(1);
    c1.controller = ControllerKind::Lqr;
    const SimulationResult l1 = simulate(c1);
    const MetricsReport m1 = metrics(l1.log, c1.setpoint);
    const bool s1_settles = !l1.aborted && m1.overall_settling_time().has_value();

    ScenarioConfig c3 = scenario_preset(3);
    c3.controller = ControllerKind::Lqr;
    const SimulationResult l3 = simulate(c3);
    const MetricsReport m3 = metrics(l3.log, c3.setpoint);
    const MetricsReport p3 = metrics(pd3.sim.log, c3.setpoint);
    const bool s3_worse = !l3.aborted &&
                          std::abs(m3.final_error[kCable]) > std::abs(p3.final_error[kCable]) &&
                          std::abs(m3.final_error[kBeta]) > std::abs(p3.final_error[kBeta]);

    const bool ok = residual <= bound && abscissa < 0.0 && s1_settles && s3_worse;
    std::string s1_detail = l1.aborted ? std::string("aborted (") + l1.aborted->what() + ")"
                                       : "overall settling " + opt(m1.overall_settling_time());
    std::string s3_detail =
        l3.aborted ? std::string("aborted (") + l3.aborted->what() + ")"
                   : "|e_d| " + num(std::abs(m3.final_error[kCable]), 3) + " vs PD " +
                         num(std::abs(p3.final_error[kCable]), 3) + ", |e_beta| " +
                         num(std::abs(m3.final_error[kBeta]), 3) + " vs PD " +
                         num(std::abs(p3.final_error[kBeta]), 3);
    report("LQR pipeline", ok,
           "Riccati residual " + num(residual, 3) + " (<= " + num(bound, 3) +
               "), spectral abscissa " + num(abscissa, 3) + " (< 0); scenario 1 LQR " + s1_detail +
               "; scenario 3 LQR " + s3_detail);
}

void integrator_order() {
    auto final_state = [](double dt) {
        ScenarioConfig cfg = scenario_preset(1);
        cfg.dt = dt;
        cfg.t_final = 10.0;
        const auto log = run_scenario(cfg);
        return stack_state(GeneralizedState{log.rows.back().q, log.rows.back().qdot});
    };
    const Vec12 x1 = final_state(0.01), x2 = final_state(0.005), x3 = final_state(0.0025);
    const double d12 = (x1 - x2).cwiseAbs().maxCoeff();
    const double d23 = (x2 - x3).cwiseAbs().maxCoeff();
    const double order = std::log2(d12 / d23);
    report("integrator order (Richardson, scenario 1, 10 s)", order >= 3.5,
           "observed order " + num(order, 4) + " (>= 3.5); differences " + num(d12, 3) + ", " +
               num(d23, 3));
}

} // namespace

int main() {
    std::cout << "kbcrane " << kVersion << " acceptance" << std::endl;
    structural_suite();

    // Each scenario is run twice; the second run is only used for the determinism check.
    std::vector<Run> runs;
    bool identical = true;
    std::string det_detail;
    for (int id = 1; id <= 5; ++id) {
        ScenarioConfig cfg = scenario_preset(id);
        cfg.rng_seed = 20240531;
        runs.push_back(timed(cfg));
        const SimulationResult again = simulate(cfg);
        const bool same = csv_of(runs.back().sim.log) == csv_of(again.log);
        identical = identical && same;
        det_detail += "scenario " + std::to_string(id) + (same ? " identical" : " DIFFERS") +
                      (id < 5 ? "; " : "");
    }

    energy_oracles(runs[0].sim.log);
    scenario1(runs[0]);
    scenario2(runs[1]);
    scenario3(runs[2]);
    scenario4(runs[3]);
    lqr_pipeline(runs[2]);
    integrator_order();
    report("determinism (byte-identical CSV)", identical, det_detail);

    std::cout << (g_failures == 0 ? "all criteria passed"
                                  : std::to_string(g_failures) + " criteria failed")
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
