#pragma once

// Closed-loop simulation of the crane: fixed-step RK4, wind gusts, measurement
// noise, scenario presets and convergence metrics.

#include "kbcrane/control.hpp"
#include "kbcrane/dynamics.hpp"
#include "kbcrane/energy.hpp"
#include "kbcrane/kinematics.hpp"
#include "kbcrane/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kbcrane {

/// One classical Runge-Kutta step of xdot = f(t, x) for any vector-space state.
template <typename State, typename Deriv>
State rk4_step(const State &x, double t, double dt, Deriv &&f) {
    const State k1 = f(t, x);
    const State k2 = f(t + 0.5 * dt, State(x + (0.5 * dt) * k1));
    const State k3 = f(t + 0.5 * dt, State(x + (0.5 * dt) * k2));
    const State k4 = f(t + dt, State(x + dt * k3));
    return State(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Input evaluated at every integrator stage.
using InputProvider = std::function<ControlInput(double t, const GeneralizedState &)>;
/// External generalized force evaluated at every integrator stage.
using ForceProvider = std::function<Vec6(double t, const GeneralizedState &)>;

/// RK4 step of the crane dynamics; the input is re-evaluated at each stage.
inline GeneralizedState step_rk4(const CraneParams &p, const GeneralizedState &s,
                                 const InputProvider &u_provider, double dt, double t = 0.0,
                                 const ForceProvider &force = {}) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");
    auto f = [&](double tau, const Vec12 &x) -> Vec12 {
        const GeneralizedState st = unstack_state(x);
        const Vec6 ext = force ? force(tau, st) : Vec6::Zero();
        return state_derivative(p, x, u_provider(tau, st).u, ext);
    };
    return unstack_state(rk4_step(stack_state(s), t, dt, f));
}

/// Generalized force of a world-frame force acting on the payload: J^T F.
inline Vec6 wind_generalized_force(const CraneParams &p, const GeneralizedState &s,
                                   const Vec3 &force_world) {
    check_admissible(s);
    if (force_world.isZero(0.0)) return Vec6::Zero();
    return payload_jacobian(p, s.q).transpose() * force_world;
}

/// Rectangular force pulse on the payload.
struct DisturbanceSpec {
    enum class Kind { WindGust };
    Kind kind = Kind::WindGust;
    double t_start = 30.0;
    double duration = 1.0;
    Vec3 force_world = Vec3(50.0, 0.0, 0.0);

    bool active(double t) const { return t >= t_start && t < t_start + duration; }
};

/// Additive Gaussian noise on the measured positions.
struct NoiseSpec {
    double sigma_angles = 0.05 * kDegToRad; ///< alpha, beta, gamma, theta1, theta2 [rad]
    double sigma_d = 1e-3;                  ///< cable length [m]
    std::uint64_t seed = 0;
};

enum class ControllerKind { PdGravity, Lqr };

inline const char *to_string(ControllerKind k) {
    return k == ControllerKind::PdGravity ? "pd" : "lqr";
}

struct ScenarioConfig {
    std::string name = "custom";
    Setpoint setpoint;
    GeneralizedState initial_state;
    CraneParams plant_params;
    CraneParams nominal_params;
    ControllerKind controller = ControllerKind::PdGravity;
    ControlGains gains;
    std::optional<LqrWeights> lqr_weights;
    std::vector<DisturbanceSpec> disturbances;
    std::optional<NoiseSpec> noise;
    double dt = 1e-3;
    double t_final = 150.0;
    std::uint64_t rng_seed = 0;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("'dt' must be positive");
        if (!(t_final >= dt) || !std::isfinite(t_final))
            throw std::invalid_argument("'t_final' must be at least dt");
        setpoint.validate();
        try {
            plant_params.validate();
        } catch (const std::invalid_argument &e) {
            throw std::invalid_argument(std::string("plant: ") + e.what());
        }
        try {
            nominal_params.validate();
        } catch (const std::invalid_argument &e) {
            throw std::invalid_argument(std::string("nominal: ") + e.what());
        }
        gains.validate();
        if (lqr_weights) lqr_weights->validate();
        for (const auto &dist : disturbances) {
            if (!(dist.duration > 0.0))
                throw std::invalid_argument("disturbance 'duration' must be positive");
            if (!dist.force_world.allFinite())
                throw std::invalid_argument("disturbance 'force' must be finite");
        }
        if (noise && (!(noise->sigma_angles >= 0.0) || !(noise->sigma_d >= 0.0)))
            throw std::invalid_argument("noise sigmas must be non-negative");
        try {
            check_admissible(initial_state);
        } catch (const DomainViolation &e) {
            throw std::invalid_argument(std::string("initial state: ") + e.what());
        }
    }

    /// Number of logged samples on the uniform grid: floor(t_final / dt) + 1.
    std::size_t sample_count() const {
        const double ratio = t_final / dt;
        const double nearest = std::round(ratio);
        const double steps =
            std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? nearest : std::floor(ratio);
        return static_cast<std::size_t>(steps) + 1;
    }
};

/// Built-in scenario presets 1-5.
///
///  1 nominal move from rest; 2 initial payload swing; 3 payload lighter than
///  the controller believes; 4 wind gust at 30 s; 5 measurement noise.
inline ScenarioConfig scenario_preset(int id) {
    ScenarioConfig cfg;
    cfg.initial_state.q << 0.0, 0.0, 0.0, 1.0, 0.0, 0.0;
    switch (id) {
    case 1:
        break;
    case 2:
        cfg.initial_state.q[kTheta1] = 0.2;
        cfg.initial_state.q[kTheta2] = 0.1;
        break;
    case 3:
        cfg.plant_params.m = 50.0;
        break;
    case 4:
        cfg.disturbances.push_back(DisturbanceSpec{});
        break;
    case 5:
        cfg.noise = NoiseSpec{};
        break;
    default:
        throw std::invalid_argument("scenario must be 1..5 (got " + std::to_string(id) + ")");
    }
    cfg.name = "scenario" + std::to_string(id);
    return cfg;
}

struct TrajectoryRow {
    double t = 0.0;
    Vec6 q = Vec6::Zero();
    Vec6 qdot = Vec6::Zero();
    Vec4 u = Vec4::Zero();
    double E = 0.0;
    double V = 0.0;
};

struct TrajectoryLog {
    std::vector<TrajectoryRow> rows;
    double dt = 0.0;
};

/// Simulation stopped because the state left the admissible domain or the
/// inertia matrix became singular.
class SimulationAborted : public std::runtime_error {
public:
    SimulationAborted(double time, const std::string &what)
        : std::runtime_error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Outcome of a run that may stop early. `log` holds every row computed before
/// the abort.
struct SimulationResult {
    TrajectoryLog log;
    std::optional<SimulationAborted> aborted;
};

/// Closed-loop run. The plant integrates with plant_params; the controller uses
/// nominal_params and noise-corrupted measurements (a fresh draw per control
/// evaluation). Logged u is the input applied at the start of each step.
///
/// Invalid configurations and Riccati failures throw; leaving the admissible
/// domain is reported through SimulationResult::aborted.
inline SimulationResult simulate(const ScenarioConfig &cfg) {
    cfg.validate();

    std::optional<LqrDesign> lqr;
    if (cfg.controller == ControllerKind::Lqr)
        lqr = design_lqr(cfg.nominal_params, cfg.setpoint, cfg.lqr_weights.value_or(LqrWeights{}));

    std::mt19937_64 rng;
    if (cfg.noise) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.rng_seed),
                          static_cast<std::uint32_t>(cfg.rng_seed >> 32),
                          static_cast<std::uint32_t>(cfg.noise->seed),
                          static_cast<std::uint32_t>(cfg.noise->seed >> 32)};
        rng.seed(seq);
    }
    std::normal_distribution<double> unit_normal(0.0, 1.0);

    auto measure = [&](const GeneralizedState &s) {
        if (!cfg.noise) return s;
        GeneralizedState m = s;
        for (int i = 0; i < 6; ++i) {
            const double sigma = i == kCable ? cfg.noise->sigma_d : cfg.noise->sigma_angles;
            m.q[i] += sigma * unit_normal(rng);
        }
        return m;
    };

    auto control = [&](double, const GeneralizedState &s) -> ControlInput {
        const GeneralizedState measured = measure(s);
        if (lqr) return lqr_control(lqr->model, lqr->K, measured);
        return pd_gravity_control(cfg.nominal_params, measured, cfg.setpoint, cfg.gains);
    };

    auto external = [&](double t, const GeneralizedState &s) -> Vec6 {
        Vec6 tau = Vec6::Zero();
        for (const auto &dist : cfg.disturbances)
            if (dist.active(t)) tau += wind_generalized_force(cfg.plant_params, s, dist.force_world);
        return tau;
    };

    const std::size_t n = cfg.sample_count();
    SimulationResult result;
    TrajectoryLog &log = result.log;
    log.dt = cfg.dt;
    log.rows.reserve(n);

    GeneralizedState s = cfg.initial_state;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        try {
            const ControlInput u0 = control(t, s);
            log.rows.push_back({t, s.q, s.qdot, u0.u, energy_E(cfg.plant_params, s),
                                lyapunov_V(cfg.plant_params, s, cfg.setpoint, cfg.gains)});
            if (k + 1 == n) break;

            // The first stage reuses the logged input so one step consumes
            // exactly four control evaluations.
            bool first = true;
            auto stage_input = [&](double tau, const GeneralizedState &st) {
                if (first) {
                    first = false;
                    return u0;
                }
                return control(tau, st);
            };
            s = step_rk4(cfg.plant_params, s, stage_input, cfg.dt, t, external);
            check_admissible(s);
        } catch (const DomainViolation &e) {
            std::ostringstream os;
            os << "domain violation at t = " << t << " s: " << e.what();
            result.aborted.emplace(t, os.str());
            break;
        } catch (const SingularMassMatrix &e) {
            std::ostringstream os;
            os << "singular inertia matrix at t = " << t << " s: " << e.what();
            result.aborted.emplace(t, os.str());
            break;
        }
    }
    return result;
}

/// As simulate(), but throws SimulationAborted when the run stops early.
inline TrajectoryLog run_scenario(const ScenarioConfig &cfg) {
    SimulationResult r = simulate(cfg);
    if (r.aborted) throw *r.aborted;
    return std::move(r.log);
}

/// Convergence summary of a run.
struct MetricsReport {
    /// Per actuated coordinate; empty when the 2% band is never entered for good.
    std::array<std::optional<double>, 4> settling_time;
    std::array<double, 2> residual_swing{}; ///< max |theta_i| over the final 20% [rad]
    std::array<double, 4> peak_input{};     ///< max |u_i|
    std::array<double, 4> final_error{};    ///< x_d - x at the last sample
    double initial_V = 0.0;
    double final_V = 0.0;

    /// Time after which all four actuated coordinates stay in their bands.
    std::optional<double> overall_settling_time() const {
        double worst = 0.0;
        for (const auto &ts : settling_time) {
            if (!ts) return std::nullopt;
            worst = std::max(worst, *ts);
        }
        return worst;
    }
};

/// Settling uses a band of 2% of the commanded step |x_d - x(0)|.
inline MetricsReport metrics(const TrajectoryLog &log, const Setpoint &sp,
                             double band_fraction = 0.02, double final_window = 0.2) {
    if (log.rows.empty()) throw std::invalid_argument("metrics: empty trajectory log");
    MetricsReport r;
    const Vec4 target = sp.as_vector();
    const auto &first = log.rows.front();
    const auto &last = log.rows.back();

    for (int i = 0; i < 4; ++i) {
        const double band = band_fraction * std::abs(target[i] - first.q[i]);
        std::optional<double> settle;
        // Walk backwards while the error stays inside the band.
        for (auto it = log.rows.rbegin(); it != log.rows.rend(); ++it) {
            if (std::abs(target[i] - it->q[i]) > band) break;
            settle = it->t;
        }
        r.settling_time[i] = settle;
        r.final_error[i] = target[i] - last.q[i];
    }

    const double t_window = first.t + (1.0 - final_window) * (last.t - first.t);
    for (const auto &row : log.rows) {
        for (int i = 0; i < 4; ++i) r.peak_input[i] = std::max(r.peak_input[i], std::abs(row.u[i]));
        if (row.t >= t_window) {
            r.residual_swing[0] = std::max(r.residual_swing[0], std::abs(row.q[kTheta1]));
            r.residual_swing[1] = std::max(r.residual_swing[1], std::abs(row.q[kTheta2]));
        }
    }
    r.initial_V = first.V;
    r.final_V = last.V;
    return r;
}

} // namespace kbcrane
