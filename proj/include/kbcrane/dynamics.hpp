#pragma once

// Equations of motion M(q) qddot + C(q, qdot) qdot + g(q) = [u; 0; 0].
//
// M and g are written entry by entry in closed form. C is the Christoffel
// matrix built from the analytic partial derivatives of M, which makes
// 0.5 * Mdot - C skew-symmetric. scalar_eom_residual() evaluates the six
// expanded scalar equations on a separate code path and is used as an oracle.

#include "kbcrane/kinematics.hpp"
#include "kbcrane/types.hpp"

#include <array>
#include <limits>
#include <cmath>
#include <sstream>

namespace kbcrane {

/// Inertia, Coriolis and gravity terms at one state.
struct DynamicsTerms {
    Mat6 M = Mat6::Zero();
    Mat6 C = Mat6::Zero();
    Vec6 gvec = Vec6::Zero();
};

/// Inertia matrix M(q). Independent of alpha.
template <typename Scalar = double>
Matrix6<Scalar> inertia_matrix(const CraneParams &p, const Vector6<Scalar> &q) {
    const Trig<Scalar> t(q);
    const Scalar d = q[kCable];
    const Scalar m = p.m;
    const Scalar A1 = p.A1(), A2 = p.A2(), A3 = p.A3(), A4 = p.A4(), A5 = p.A5();
    // m * (horizontal reach of the jib tip)
    const Scalar P = A4 * t.cb + A5 * t.cg;

    Matrix6<Scalar> M = Matrix6<Scalar>::Zero();
    M(0, 0) = p.I_tot + d * d * m + A1 * t.cb * t.cb + A2 * t.cg * t.cg + A3 * t.cb * t.cg +
              2.0 * d * t.s2 * P - d * d * m * t.c1 * t.c1 * t.c2 * t.c2;
    M(0, 1) = A4 * d * t.c2 * t.sb * t.s1;
    M(0, 2) = A5 * d * t.c2 * t.sg * t.s1;
    M(0, 3) = t.c2 * t.s1 * P;
    M(0, 4) = d * t.c1 * t.c2 * (P + d * m * t.s2);
    M(0, 5) = -d * t.s1 * (d * m + P * t.s2);

    M(1, 1) = A1 + p.I_b;
    M(1, 2) = 0.5 * A3 * (t.cb * t.cg + t.sb * t.sg);
    M(1, 3) = -A4 * (t.sb * t.s2 + t.cb * t.c1 * t.c2);
    M(1, 4) = A4 * d * t.cb * t.c2 * t.s1;
    M(1, 5) = -A4 * d * (t.c2 * t.sb - t.cb * t.c1 * t.s2);

    M(2, 2) = A2 + p.I_j;
    M(2, 3) = -A5 * (t.sg * t.s2 + t.cg * t.c1 * t.c2);
    M(2, 4) = A5 * d * t.cg * t.c2 * t.s1;
    M(2, 5) = -A5 * d * (t.c2 * t.sg - t.cg * t.c1 * t.s2);

    M(3, 3) = m;
    M(4, 4) = d * d * m * t.c2 * t.c2;
    M(5, 5) = d * d * m;

    // M(3,4) = M(3,5) = M(4,5) = 0: the cable direction is orthogonal to both swing directions.
    M.template triangularView<Eigen::StrictlyLower>() = M.transpose();
    return M;
}

/// Partial derivatives dM/dq_i, i = 0..5. The alpha slot is zero.
template <typename Scalar = double>
std::array<Matrix6<Scalar>, 6> inertia_partials(const CraneParams &p, const Vector6<Scalar> &q) {
    const Trig<Scalar> t(q);
    const Scalar d = q[kCable];
    const Scalar m = p.m;
    const Scalar A1 = p.A1(), A2 = p.A2(), A3 = p.A3(), A4 = p.A4(), A5 = p.A5();
    const Scalar P = A4 * t.cb + A5 * t.cg;
    const Scalar sbg = t.sb * t.cg - t.cb * t.sg; // sin(beta - gamma)

    std::array<Matrix6<Scalar>, 6> dM;
    for (auto &D : dM) D.setZero();

    // beta
    {
        auto &D = dM[kBeta];
        const Scalar dP = -A4 * t.sb;
        D(0, 0) = -2.0 * A1 * t.cb * t.sb - A3 * t.sb * t.cg + 2.0 * d * t.s2 * dP;
        D(0, 1) = A4 * d * t.c2 * t.cb * t.s1;
        D(0, 3) = t.c2 * t.s1 * dP;
        D(0, 4) = d * t.c1 * t.c2 * dP;
        D(0, 5) = -d * t.s1 * t.s2 * dP;
        D(1, 2) = -0.5 * A3 * sbg;
        D(1, 3) = -A4 * (t.cb * t.s2 - t.sb * t.c1 * t.c2);
        D(1, 4) = -A4 * d * t.sb * t.c2 * t.s1;
        D(1, 5) = -A4 * d * (t.c2 * t.cb + t.sb * t.c1 * t.s2);
    }
    // gamma
    {
        auto &D = dM[kGamma];
        const Scalar dP = -A5 * t.sg;
        D(0, 0) = -2.0 * A2 * t.cg * t.sg - A3 * t.cb * t.sg + 2.0 * d * t.s2 * dP;
        D(0, 2) = A5 * d * t.c2 * t.cg * t.s1;
        D(0, 3) = t.c2 * t.s1 * dP;
        D(0, 4) = d * t.c1 * t.c2 * dP;
        D(0, 5) = -d * t.s1 * t.s2 * dP;
        D(1, 2) = 0.5 * A3 * sbg;
        D(2, 3) = -A5 * (t.cg * t.s2 - t.sg * t.c1 * t.c2);
        D(2, 4) = -A5 * d * t.sg * t.c2 * t.s1;
        D(2, 5) = -A5 * d * (t.c2 * t.cg + t.sg * t.c1 * t.s2);
    }
    // cable length
    {
        auto &D = dM[kCable];
        D(0, 0) = 2.0 * d * m + 2.0 * t.s2 * P - 2.0 * d * m * t.c1 * t.c1 * t.c2 * t.c2;
        D(0, 1) = A4 * t.c2 * t.sb * t.s1;
        D(0, 2) = A5 * t.c2 * t.sg * t.s1;
        D(0, 4) = t.c1 * t.c2 * (P + 2.0 * d * m * t.s2);
        D(0, 5) = -t.s1 * (2.0 * d * m + P * t.s2);
        D(1, 4) = A4 * t.cb * t.c2 * t.s1;
        D(1, 5) = -A4 * (t.c2 * t.sb - t.cb * t.c1 * t.s2);
        D(2, 4) = A5 * t.cg * t.c2 * t.s1;
        D(2, 5) = -A5 * (t.c2 * t.sg - t.cg * t.c1 * t.s2);
        D(4, 4) = 2.0 * d * m * t.c2 * t.c2;
        D(5, 5) = 2.0 * d * m;
    }
    // theta1
    {
        auto &D = dM[kTheta1];
        D(0, 0) = 2.0 * d * d * m * t.c1 * t.s1 * t.c2 * t.c2;
        D(0, 1) = A4 * d * t.c2 * t.sb * t.c1;
        D(0, 2) = A5 * d * t.c2 * t.sg * t.c1;
        D(0, 3) = t.c2 * t.c1 * P;
        D(0, 4) = -d * t.s1 * t.c2 * (P + d * m * t.s2);
        D(0, 5) = -d * t.c1 * (d * m + P * t.s2);
        D(1, 3) = A4 * t.cb * t.s1 * t.c2;
        D(1, 4) = A4 * d * t.cb * t.c2 * t.c1;
        D(1, 5) = -A4 * d * t.cb * t.s1 * t.s2;
        D(2, 3) = A5 * t.cg * t.s1 * t.c2;
        D(2, 4) = A5 * d * t.cg * t.c2 * t.c1;
        D(2, 5) = -A5 * d * t.cg * t.s1 * t.s2;
    }
    // theta2
    {
        auto &D = dM[kTheta2];
        D(0, 0) = 2.0 * d * t.c2 * P + 2.0 * d * d * m * t.c1 * t.c1 * t.c2 * t.s2;
        D(0, 1) = -A4 * d * t.s2 * t.sb * t.s1;
        D(0, 2) = -A5 * d * t.s2 * t.sg * t.s1;
        D(0, 3) = -t.s2 * t.s1 * P;
        D(0, 4) = d * t.c1 * (d * m * (t.c2 * t.c2 - t.s2 * t.s2) - t.s2 * P);
        D(0, 5) = -d * t.s1 * t.c2 * P;
        D(1, 3) = -A4 * (t.sb * t.c2 - t.cb * t.c1 * t.s2);
        D(1, 4) = -A4 * d * t.cb * t.s2 * t.s1;
        D(1, 5) = A4 * d * (t.s2 * t.sb + t.cb * t.c1 * t.c2);
        D(2, 3) = -A5 * (t.sg * t.c2 - t.cg * t.c1 * t.s2);
        D(2, 4) = -A5 * d * t.cg * t.s2 * t.s1;
        D(2, 5) = A5 * d * (t.s2 * t.sg + t.cg * t.c1 * t.c2);
        D(4, 4) = -2.0 * d * d * m * t.c2 * t.s2;
    }
    for (auto &D : dM) D.template triangularView<Eigen::StrictlyLower>() = D.transpose();
    return dM;
}

/// Christoffel-form Coriolis matrix:
///   C(k, j) = sum_i 0.5 * (dM_kj/dq_i + dM_ki/dq_j - dM_ij/dq_k) * qdot_i
template <typename Scalar = double>
Matrix6<Scalar> coriolis_matrix(const CraneParams &p, const Vector6<Scalar> &q,
                                const Vector6<Scalar> &qdot) {
    const auto dM = inertia_partials<Scalar>(p, q);
    Matrix6<Scalar> Mdot = Matrix6<Scalar>::Zero();
    for (int i = 0; i < 6; ++i) Mdot += dM[i] * qdot[i];

    // The second and third terms: sum_i (dM_ki/dq_j - dM_ij/dq_k) qdot_i
    Matrix6<Scalar> C = 0.5 * Mdot;
    for (int k = 0; k < 6; ++k) {
        for (int j = 0; j < 6; ++j) {
            Scalar acc = 0;
            for (int i = 0; i < 6; ++i) acc += (dM[j](k, i) - dM[k](i, j)) * qdot[i];
            C(k, j) += 0.5 * acc;
        }
    }
    return C;
}

/// Gravity vector g(q) = dU/dq in closed form. The slew entry is exactly zero.
template <typename Scalar = double>
Vector6<Scalar> gravity_vector(const CraneParams &p, const Vector6<Scalar> &q) {
    const Trig<Scalar> t(q);
    const Scalar d = q[kCable];
    const Scalar g = p.g;
    Vector6<Scalar> gv;
    gv[kAlpha] = 0;
    gv[kBeta] = 0.5 * g * p.l_b * t.cb * (2.0 * p.m + p.m_b + 2.0 * p.m_j);
    gv[kGamma] = 0.5 * g * p.l_j * t.cg * (2.0 * p.m + p.m_j);
    gv[kCable] = -g * p.m * t.c1 * t.c2;
    gv[kTheta1] = g * p.m * d * t.c2 * t.s1;
    gv[kTheta2] = g * p.m * d * t.c1 * t.s2;
    return gv;
}

/// M, C and g at an admissible state. Throws DomainViolation otherwise.
inline DynamicsTerms assemble_terms(const CraneParams &p, const GeneralizedState &s) {
    check_admissible(s);
    return {inertia_matrix<double>(p, s.q), coriolis_matrix<double>(p, s.q, s.qdot),
            gravity_vector<double>(p, s.q)};
}

/// dU/dq by central finite differences of the potential energy.
inline Vec6 gravity_from_potential(const CraneParams &p, const GeneralizedState &s,
                                   double h = 1e-6) {
    check_admissible(s);
    Vec6 grad;
    for (int i = 0; i < 6; ++i) {
        Vec6 qp = s.q;
        Vec6 qm = s.q;
        qp[i] += h;
        qm[i] -= h;
        grad[i] = (potential_energy<double>(p, qp) - potential_energy<double>(p, qm)) / (2.0 * h);
    }
    return grad;
}

/// Left-minus-right residuals of the six expanded scalar equations of motion.
///
/// Written out term by term, independently of inertia_matrix()/coriolis_matrix().
/// The swing equations keep their common factors (d cos(theta2) and -d).
inline Vec6 scalar_eom_residual(const CraneParams &p, const GeneralizedState &s,
                                const Vec6 &qddot, const ControlInput &in) {
    check_admissible(s);
    const Trig<double> t(s.q);
    const double Sb = t.sb, Cb = t.cb, Sg = t.sg, Cg = t.cg;
    const double S1 = t.s1, C1 = t.c1, S2 = t.s2, C2 = t.c2;
    const double S2b = std::sin(2.0 * s.q[kBeta]);
    const double S2g = std::sin(2.0 * s.q[kGamma]);
    const double S2t2 = std::sin(2.0 * s.q[kTheta2]);
    const double d = s.q[kCable];
    const double ad = s.qdot[0], bd = s.qdot[1], gd = s.qdot[2], dd = s.qdot[3],
                 t1d = s.qdot[4], t2d = s.qdot[5];
    const double add = qddot[0], bdd = qddot[1], gdd = qddot[2], ddd = qddot[3],
                 t1dd = qddot[4], t2dd = qddot[5];
    const double m = p.m, g = p.g, lB = p.l_b, lJ = p.l_j, mB = p.m_b, mJ = p.m_j;
    const double A1 = p.A1(), A2 = p.A2(), A3 = p.A3(), A4 = p.A4(), A5 = p.A5();
    const double I = p.I_tot, IB = p.I_b, IJ = p.I_j;
    const double d2 = d * d;

    // slew
    const double e1 =
        I * add + A1 * add * Cb * Cb + A2 * add * Cg * Cg + d2 * add * m +
        2 * d2 * ad * t1d * m * C1 * C2 * C2 * S1 + 2 * d2 * ad * t2d * m * C1 * C1 * C2 * S2 -
        A1 * ad * bd * S2b - A2 * ad * gd * S2g + A3 * add * Cb * Cg - d2 * t2dd * m * S1 +
        2 * dd * d * ad * m + 2 * A4 * d * add * Cb * S2 + 2 * A5 * d * add * Cg * S2 +
        2 * A4 * dd * ad * Cb * S2 + 2 * A5 * dd * ad * Cg * S2 - A3 * ad * bd * Cg * Sb -
        A3 * ad * gd * Cb * Sg - 2 * d2 * t1d * t2d * m * C1 - d2 * add * m * C1 * C1 * C2 * C2 +
        A4 * ddd * Cb * C2 * S1 + A5 * ddd * Cg * C2 * S1 - 2 * dd * d * t2d * m * S1 +
        A4 * d * bdd * C2 * Sb * S1 - A4 * d * t2dd * Cb * S1 * S2 + A5 * d * gdd * C2 * Sg * S1 -
        A5 * d * t2dd * Cg * S1 * S2 - 2 * A4 * dd * t2d * Cb * S1 * S2 -
        2 * A5 * dd * t2d * Cg * S1 * S2 + A4 * d * bd * bd * Cb * C2 * S1 -
        A4 * d * t1d * t1d * Cb * C2 * S1 - A4 * d * t2d * t2d * Cb * C2 * S1 +
        A5 * d * gd * gd * Cg * C2 * S1 - A5 * d * t1d * t1d * Cg * C2 * S1 -
        A5 * d * t2d * t2d * Cg * C2 * S1 - 2 * dd * d * ad * m * C1 * C1 * C2 * C2 +
        2 * d2 * t1d * t2d * m * C1 * C2 * C2 + 2 * A4 * d * ad * t2d * Cb * C2 +
        2 * A5 * d * ad * t2d * Cg * C2 + d2 * t1dd * m * C1 * C2 * S2 -
        2 * A4 * d * ad * bd * Sb * S2 - 2 * A5 * d * ad * gd * Sg * S2 +
        A4 * d * t1dd * Cb * C1 * C2 + A5 * d * t1dd * Cg * C1 * C2 +
        2 * A4 * dd * t1d * Cb * C1 * C2 + 2 * A5 * dd * t1d * Cg * C1 * C2 -
        d2 * t1d * t1d * m * C2 * S1 * S2 - 2 * A4 * d * t1d * t2d * Cb * C1 * S2 -
        2 * A5 * d * t1d * t2d * Cg * C1 * S2 + 2 * dd * d * t1d * m * C1 * C2 * S2;

    // boom luff
    const double e2 =
        A1 * bdd + IB * bdd + A1 * ad * ad * S2b / 2 + A3 * ad * ad * Cg * Sb / 2 -
        A3 * gd * gd * Cb * Sg / 2 + A3 * gd * gd * Cg * Sb / 2 + g * lB * m * Cb +
        g * lB * mB * Cb / 2 + g * lB * mJ * Cb + A3 * gdd * Cb * Cg / 2 - A4 * ddd * Sb * S2 +
        A3 * gdd * Sb * Sg / 2 - A4 * d * t2dd * C2 * Sb - 2 * A4 * dd * t2d * C2 * Sb -
        A4 * ddd * Cb * C1 * C2 + A4 * d * ad * ad * Sb * S2 + A4 * d * t2d * t2d * Sb * S2 +
        A4 * d * t1dd * Cb * C2 * S1 + A4 * d * t2dd * Cb * C1 * S2 +
        2 * A4 * dd * t1d * Cb * C2 * S1 + 2 * A4 * dd * t2d * Cb * C1 * S2 +
        A4 * d * add * C2 * Sb * S1 + 2 * A4 * dd * ad * C2 * Sb * S1 +
        A4 * d * t1d * t1d * Cb * C1 * C2 + A4 * d * t2d * t2d * Cb * C1 * C2 +
        2 * A4 * d * ad * t1d * C1 * C2 * Sb - 2 * A4 * d * t1d * t2d * Cb * S1 * S2 -
        2 * A4 * d * ad * t2d * Sb * S1 * S2;

    // jib luff
    const double e3 =
        A2 * gdd + IJ * gdd + A2 * ad * ad * S2g / 2 + A3 * ad * ad * Cb * Sg / 2 +
        A3 * bd * bd * Cb * Sg / 2 - A3 * bd * bd * Cg * Sb / 2 + g * lJ * m * Cg +
        g * lJ * mJ * Cg / 2 + A3 * bdd * Cb * Cg / 2 - A5 * ddd * Sg * S2 +
        A3 * bdd * Sb * Sg / 2 - A5 * d * t2dd * C2 * Sg - 2 * A5 * dd * t2d * C2 * Sg -
        A5 * ddd * Cg * C1 * C2 + A5 * d * ad * ad * Sg * S2 + A5 * d * t2d * t2d * Sg * S2 +
        A5 * d * t1dd * Cg * C2 * S1 + A5 * d * t2dd * Cg * C1 * S2 +
        2 * A5 * dd * t1d * Cg * C2 * S1 + 2 * A5 * dd * t2d * Cg * C1 * S2 +
        A5 * d * add * C2 * Sg * S1 + 2 * A5 * dd * ad * C2 * Sg * S1 +
        A5 * d * t1d * t1d * Cg * C1 * C2 + A5 * d * t2d * t2d * Cg * C1 * C2 +
        2 * A5 * d * ad * t1d * C1 * C2 * Sg - 2 * A5 * d * t1d * t2d * Cg * S1 * S2 -
        2 * A5 * d * ad * t2d * Sg * S1 * S2;

    // hoist
    const double e4 =
        ddd * m - d * ad * ad * m - d * t2d * t2d * m - A4 * ad * ad * Cb * S2 -
        A4 * bd * bd * Cb * S2 - A5 * ad * ad * Cg * S2 - A5 * gd * gd * Cg * S2 -
        d * t1d * t1d * m * C2 * C2 - A4 * bdd * Sb * S2 - A5 * gdd * Sg * S2 - g * m * C1 * C2 +
        d * ad * ad * m * C1 * C1 * C2 * C2 - A4 * bdd * Cb * C1 * C2 - A5 * gdd * Cg * C1 * C2 +
        A4 * add * Cb * C2 * S1 + A5 * add * Cg * C2 * S1 + 2 * d * ad * t2d * m * S1 +
        A4 * bd * bd * C1 * C2 * Sb + A5 * gd * gd * C1 * C2 * Sg -
        2 * A4 * ad * bd * C2 * Sb * S1 - 2 * A5 * ad * gd * C2 * Sg * S1 -
        2 * d * ad * t1d * m * C1 * C2 * S2;

    // tangential sway
    const double e5 =
        d * C2 *
        (g * m * S1 - A4 * bd * bd * Sb * S1 - A5 * gd * gd * Sg * S1 + d * t1dd * m * C2 +
         2 * dd * t1d * m * C2 + A4 * add * Cb * C1 + A5 * add * Cg * C1 + A4 * bdd * Cb * S1 +
         A5 * gdd * Cg * S1 - 2 * A4 * ad * bd * C1 * Sb - 2 * A5 * ad * gd * C1 * Sg +
         d * add * m * C1 * S2 + 2 * dd * ad * m * C1 * S2 - 2 * d * t1d * t2d * m * S2 -
         d * ad * ad * m * C1 * C2 * S1 + 2 * d * ad * t2d * m * C1 * C2);

    // radial sway
    const double e6 =
        -d * (A4 * ad * ad * Cb * C2 - 2 * dd * t2d * m - d * t2dd * m + A4 * bd * bd * Cb * C2 +
              A5 * ad * ad * Cg * C2 + A5 * gd * gd * Cg * C2 - d * t1d * t1d * m * S2t2 / 2 +
              d * add * m * S1 + 2 * dd * ad * m * S1 + A4 * bdd * C2 * Sb + A5 * gdd * C2 * Sg -
              g * m * C1 * S2 + A4 * bd * bd * C1 * Sb * S2 + A5 * gd * gd * C1 * Sg * S2 -
              A4 * bdd * Cb * C1 * S2 - A5 * gdd * Cg * C1 * S2 + A4 * add * Cb * S1 * S2 +
              A5 * add * Cg * S1 * S2 + 2 * d * ad * t1d * m * C1 * C2 * C2 -
              2 * A4 * ad * bd * Sb * S1 * S2 - 2 * A5 * ad * gd * Sg * S1 * S2 +
              d * ad * ad * m * C1 * C1 * C2 * S2);

    Vec6 r;
    r << e1, e2, e3, e4, e5, e6;
    return r - in.generalized();
}

/// Options for the mass-matrix solve.
struct SolveOptions {
    double max_condition = 1e12;
};

/// Solves M qddot = rhs: LDLT first, full-pivoting LU if the symmetric
/// factorization is not positive definite. Throws SingularMassMatrix when the
/// reciprocal condition estimate falls below 1 / max_condition.
inline Vec6 solve_mass_matrix(const Mat6 &M, const Vec6 &rhs, const SolveOptions &opt = {}) {
    const Eigen::LDLT<Mat6> ldlt(M);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const double rcond = ldlt.rcond();
        if (rcond * opt.max_condition >= 1.0) return ldlt.solve(rhs);
    }
    const Eigen::PartialPivLU<Mat6> lu(M);
    const double rcond = lu.rcond();
    if (!(rcond * opt.max_condition >= 1.0)) {
        const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
        std::ostringstream os;
        os << "inertia matrix is numerically singular (condition estimate " << cond << ")";
        throw SingularMassMatrix(cond, os.str());
    }
    return lu.solve(rhs);
}

/// qddot = M^{-1} (zeta + tau_ext - C qdot - g).
inline Vec6 forward_dynamics(const CraneParams &p, const GeneralizedState &s,
                             const ControlInput &in, const Vec6 &tau_ext = Vec6::Zero(),
                             const SolveOptions &opt = {}) {
    const DynamicsTerms terms = assemble_terms(p, s);
    const Vec6 rhs = in.generalized() + tau_ext - terms.C * s.qdot - terms.gvec;
    return solve_mass_matrix(terms.M, rhs, opt);
}

} // namespace kbcrane
