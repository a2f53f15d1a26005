#pragma once

// Feedback laws: nonlinear PD with gravity compensation, and an LQR designed on
// a numerical linearization about the target equilibrium.

#include "kbcrane/dynamics.hpp"
#include "kbcrane/energy.hpp"
#include "kbcrane/riccati.hpp"
#include "kbcrane/types.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kbcrane {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat12x4 = Eigen::Matrix<double, 12, 4>;
using Mat4x12 = Eigen::Matrix<double, 4, 12>;

/// Static gravity load on the actuated joints, as seen with parameters p.
inline Vec4 gravity_compensation(const CraneParams &p, double beta, double gamma) {
    return {0.0, p.g * p.l_b * std::cos(beta) * (p.m + 0.5 * p.m_b + p.m_j),
            p.g * p.l_j * std::cos(gamma) * (p.m + 0.5 * p.m_j), -p.m * p.g};
}

/// PD + gravity compensation. Uses only the measured state and the
/// controller's own (nominal) parameters.
inline ControlInput pd_gravity_control(const CraneParams &p_nominal,
                                       const GeneralizedState &s_measured, const Setpoint &sp,
                                       const ControlGains &k) {
    const Vec4 e = error_signals(s_measured, sp).as_vector();
    const Vec4 rates = s_measured.qdot.head<4>();
    ControlInput in;
    in.u = k.kp().cwiseProduct(e) - k.kd().cwiseProduct(rates) +
           gravity_compensation(p_nominal, s_measured.q[kBeta], s_measured.q[kGamma]);
    return in;
}

/// State x = [q; qdot] as a 12-vector.
inline Vec12 stack_state(const GeneralizedState &s) {
    Vec12 x;
    x << s.q, s.qdot;
    return x;
}

inline GeneralizedState unstack_state(const Vec12 &x) {
    return {x.head<6>(), x.tail<6>()};
}

/// First-order state derivative [qdot; qddot].
inline Vec12 state_derivative(const CraneParams &p, const Vec12 &x, const Vec4 &u,
                              const Vec6 &tau_ext = Vec6::Zero()) {
    const GeneralizedState s = unstack_state(x);
    Vec12 xdot;
    xdot.head<6>() = s.qdot;
    xdot.tail<6>() = forward_dynamics(p, s, ControlInput{u}, tau_ext);
    return xdot;
}

struct LinearModel {
    Mat12 A = Mat12::Zero();
    Mat12x4 B = Mat12x4::Zero();
    Vec12 x_eq = Vec12::Zero();
    Vec4 u_eq = Vec4::Zero();
};

/// Diagonal LQR weights. Defaults are the weights of the nonlinear-vs-LQR comparison.
struct LqrWeights {
    Vec12 q_diag = (Vec12() << 1e2, 1e3, 1e3, 25.0, 10.0, 10.0, 10.0, 10.0, 10.0, 50.0, 1e2, 1e2)
                       .finished();
    Vec4 r_diag = Vec4(50.0, 50.0, 50.0, 10.0);

    Mat12 Q() const { return q_diag.asDiagonal(); }
    Eigen::Matrix4d R() const { return r_diag.asDiagonal(); }

    void validate() const {
        if ((q_diag.array() < 0.0).any() || !q_diag.allFinite())
            throw std::invalid_argument("LQR weight 'q' entries must be non-negative");
        if ((r_diag.array() <= 0.0).any() || !r_diag.allFinite())
            throw std::invalid_argument("LQR weight 'r' entries must be strictly positive");
    }
};

class EquilibriumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linearizes the crane about q = [alpha_d, beta_d, gamma_d, d_d, 0, 0], qdot = 0,
/// held by the gravity-compensating input. The kinematic rows are set exactly;
/// the dynamic rows come from central differences with step h.
inline LinearModel linearize(const CraneParams &p, const Setpoint &sp, double h = 1e-6) {
    LinearModel lm;
    lm.x_eq.head<4>() = sp.as_vector();
    lm.u_eq = gravity_compensation(p, sp.beta_d, sp.gamma_d);

    const Vec12 f0 = state_derivative(p, lm.x_eq, lm.u_eq);
    if (!(f0.norm() <= 1e-8)) {
        std::ostringstream os;
        os << "equilibrium input does not hold the crane at rest (residual " << f0.norm() << ")";
        throw EquilibriumError(os.str());
    }

    lm.A.topRightCorner<6, 6>().setIdentity();
    for (int j = 0; j < 12; ++j) {
        Vec12 xp = lm.x_eq;
        Vec12 xm = lm.x_eq;
        xp[j] += h;
        xm[j] -= h;
        lm.A.block<6, 1>(6, j) = (state_derivative(p, xp, lm.u_eq).tail<6>() -
                                  state_derivative(p, xm, lm.u_eq).tail<6>()) /
                                 (2.0 * h);
    }
    for (int j = 0; j < 4; ++j) {
        Vec4 up = lm.u_eq;
        Vec4 um = lm.u_eq;
        up[j] += h;
        um[j] -= h;
        lm.B.block<6, 1>(6, j) = (state_derivative(p, lm.x_eq, up).tail<6>() -
                                  state_derivative(p, lm.x_eq, um).tail<6>()) /
                                 (2.0 * h);
    }
    return lm;
}

struct LqrDesign {
    LinearModel model;
    Mat4x12 K = Mat4x12::Zero();
    CareSolution care;
};

/// Linearizes at the setpoint and solves the Riccati equation.
inline LqrDesign design_lqr(const CraneParams &p_nominal, const Setpoint &sp,
                            const LqrWeights &w = {}) {
    LqrDesign design;
    design.model = linearize(p_nominal, sp);
    design.care = solve_care(design.model.A, design.model.B, w.Q(), w.R());
    design.K = design.care.K;
    return design;
}

/// u = u_eq - K (x - x_eq).
inline ControlInput lqr_control(const LinearModel &model, const Mat4x12 &K,
                                const GeneralizedState &s_measured) {
    return ControlInput{model.u_eq - K * (stack_state(s_measured) - model.x_eq)};
}

} // namespace kbcrane
