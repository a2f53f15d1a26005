#pragma once

// Energies and the Lyapunov function used by the PD + gravity-compensation law.

#include "kbcrane/dynamics.hpp"
#include "kbcrane/kinematics.hpp"
#include "kbcrane/types.hpp"

#include <cmath>
#include <stdexcept>

namespace kbcrane {

/// Desired values of the four actuated coordinates.
struct Setpoint {
    double alpha_d = 60.0 * kDegToRad;
    double beta_d = 30.0 * kDegToRad;
    double gamma_d = 22.0 * kDegToRad;
    double d_d = 2.0;

    Vec4 as_vector() const { return {alpha_d, beta_d, gamma_d, d_d}; }

    void validate() const {
        constexpr double half_pi = std::numbers::pi / 2.0;
        if (!std::isfinite(alpha_d)) throw std::invalid_argument("setpoint 'alpha_d' must be finite");
        if (!(std::abs(beta_d) < half_pi))
            throw std::invalid_argument("setpoint 'beta_d' must satisfy |beta_d| < pi/2");
        if (!(std::abs(gamma_d) < half_pi))
            throw std::invalid_argument("setpoint 'gamma_d' must satisfy |gamma_d| < pi/2");
        if (!(d_d >= kMinCableLength))
            throw std::invalid_argument("setpoint 'd_d' must be at least the minimum cable length");
    }
};

/// Tracking errors e_x = x_d - x.
struct ErrorSignals {
    double e_alpha = 0.0;
    double e_beta = 0.0;
    double e_gamma = 0.0;
    double e_d = 0.0;

    Vec4 as_vector() const { return {e_alpha, e_beta, e_gamma, e_d}; }
};

inline ErrorSignals error_signals(const GeneralizedState &s, const Setpoint &sp) {
    return {sp.alpha_d - s.q[kAlpha], sp.beta_d - s.q[kBeta], sp.gamma_d - s.q[kGamma],
            sp.d_d - s.q[kCable]};
}

/// Proportional and derivative gains of the four actuated loops.
struct ControlGains {
    double kp_alpha = 1e3;
    double kp_beta = 1e4;
    double kp_gamma = 1e4;
    double kp_d = 1e3;
    double kd_alpha = 1e2;
    double kd_beta = 1e3;
    double kd_gamma = 1e3;
    double kd_d = 1e2;

    Vec4 kp() const { return {kp_alpha, kp_beta, kp_gamma, kp_d}; }
    Vec4 kd() const { return {kd_alpha, kd_beta, kd_gamma, kd_d}; }

    void validate() const {
        const std::array<std::pair<const char *, double>, 8> fields = {
            {{"kp_alpha", kp_alpha},
             {"kp_beta", kp_beta},
             {"kp_gamma", kp_gamma},
             {"kp_d", kp_d},
             {"kd_alpha", kd_alpha},
             {"kd_beta", kd_beta},
             {"kd_gamma", kd_gamma},
             {"kd_d", kd_d}}};
        for (const auto &[name, value] : fields) {
            if (!(value > 0.0) || !std::isfinite(value))
                throw std::invalid_argument(std::string("gain '") + name +
                                            "' must be strictly positive");
        }
    }
};

/// Kinetic energy as the quadratic form 0.5 qdot^T M qdot.
inline double kinetic_energy(const CraneParams &p, const GeneralizedState &s) {
    check_admissible(s);
    return 0.5 * s.qdot.dot(inertia_matrix<double>(p, s.q) * s.qdot);
}

/// Kinetic energy summed body by body from the centre-of-mass velocities.
///
/// Kept as a second code path for cross-checking the inertia matrix; the
/// velocity components are written in a left-handed horizontal frame, which
/// does not change any speed.
inline double kinetic_energy_direct(const CraneParams &p, const GeneralizedState &s) {
    check_admissible(s);
    const Trig<double> t(s.q);
    const double Sa = t.sa, Ca = t.ca, Sb = t.sb, Cb = t.cb, Sg = t.sg, Cg = t.cg;
    const double S1 = t.s1, C1 = t.c1, S2 = t.s2, C2 = t.c2;
    const double d = s.q[kCable];
    const double ad = s.qdot[0], bd = s.qdot[1], gd = s.qdot[2], dd = s.qdot[3],
                 t1d = s.qdot[4], t2d = s.qdot[5];
    const double lB = p.l_b, lJ = p.l_j;

    auto sq = [](double x) { return x * x; };

    const double boom = p.m_b / 8.0 *
                        (sq(lB * Cb * Sa * ad + lB * Ca * Sb * bd) +
                         sq(lB * Ca * Cb * ad - lB * Sa * Sb * bd) + lB * lB * Cb * Cb * bd * bd);

    const double jib =
        0.5 * p.m_j *
        (sq(lB * Cb * Sa * ad + lB * Ca * Sb * bd + 0.5 * lJ * Cg * Sa * ad +
            0.5 * lJ * Ca * Sg * gd) +
         sq(lB * Ca * Cb * ad + 0.5 * lJ * Ca * Cg * ad - lB * Sa * Sb * bd -
            0.5 * lJ * Sa * Sg * gd) +
         sq(lB * Cb * bd + 0.5 * lJ * Cg * gd));

    const double vx = C2 * Sa * S1 * dd - Ca * S2 * dd + lB * Cb * Sa * ad + lB * Ca * Sb * bd +
                      lJ * Cg * Sa * ad + lJ * Ca * Sg * gd - Ca * C2 * t2d * d +
                      Sa * S2 * ad * d + Ca * C2 * S1 * ad * d + C1 * C2 * Sa * t1d * d -
                      Sa * S1 * S2 * t2d * d;
    const double vz =
        lB * Cb * bd - C1 * C2 * dd + lJ * Cg * gd + C2 * S1 * t1d * d + C1 * S2 * t2d * d;
    const double vy = Sa * S2 * dd + lB * Ca * Cb * ad + lJ * Ca * Cg * ad - lB * Sa * Sb * bd -
                      lJ * Sa * Sg * gd + Ca * S2 * ad * d + C2 * Sa * t2d * d +
                      Ca * C2 * S1 * dd + Ca * C1 * C2 * t1d * d - C2 * Sa * S1 * ad * d -
                      Ca * S1 * S2 * t2d * d;
    const double payload = 0.5 * p.m * (vx * vx + vz * vz + vy * vy);

    const double rotors = 0.5 * p.I_tot * ad * ad + 0.5 * p.I_b * bd * bd + 0.5 * p.I_j * gd * gd;
    return boom + jib + payload + rotors;
}

inline double potential_energy(const CraneParams &p, const GeneralizedState &s) {
    check_admissible(s);
    return potential_energy<double>(p, s.q);
}

/// Kinetic energy plus the payload's swing potential m g d (1 - cos(theta1) cos(theta2)).
inline double energy_E(const CraneParams &p, const GeneralizedState &s) {
    return kinetic_energy(p, s) +
           p.m * p.g * s.q[kCable] * (1.0 - std::cos(s.q[kTheta1]) * std::cos(s.q[kTheta2]));
}

/// Time derivative of energy_E along the true dynamics under input u and an
/// external generalized force tau_ext.
inline double energy_rate(const CraneParams &p, const GeneralizedState &s, const ControlInput &in,
                          const Vec6 &tau_ext = Vec6::Zero()) {
    const Vec6 gv = gravity_vector<double>(p, s.q);
    const Vec4 &u = in.u;
    return s.qdot[kAlpha] * u[0] + s.qdot[kBeta] * (u[1] - gv[kBeta]) +
           s.qdot[kGamma] * (u[2] - gv[kGamma]) + s.qdot[kCable] * (u[3] + p.m * p.g) +
           s.qdot.dot(tau_ext);
}

/// V = E + 0.5 * sum kp_x e_x^2.
inline double lyapunov_V(const CraneParams &p, const GeneralizedState &s, const Setpoint &sp,
                         const ControlGains &k) {
    const Vec4 e = error_signals(s, sp).as_vector();
    return energy_E(p, s) + 0.5 * (k.kp().array() * e.array().square()).sum();
}

/// Closed-loop dV/dt under the PD + gravity-compensation law: -sum kd_x xdot^2.
inline double lyapunov_Vdot_analytic(const GeneralizedState &s, const ControlGains &k) {
    return -(k.kd().array() * s.qdot.head<4>().array().square()).sum();
}

} // namespace kbcrane
