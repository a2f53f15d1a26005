#pragma once

// Payload geometry and gravitational potential.
//
// World frame: right-handed, z up, origin at the boom pivot on the slew axis.
// At alpha = 0 the boom points along +x. The boom and jib angles are measured
// from the horizontal, so the jib tip sits at radius l_b cos(beta) + l_j cos(gamma)
// and height l_b sin(beta) + l_j sin(gamma). theta2 tilts the cable in the radial
// direction and theta1 in the tangential one.

#include "kbcrane/types.hpp"

#include <cmath>

namespace kbcrane {

/// Sines and cosines of the configuration angles, computed once per evaluation.
template <typename Scalar> struct Trig {
    Scalar sa, ca, sb, cb, sg, cg, s1, c1, s2, c2;

    explicit Trig(const Vector6<Scalar> &q) {
        using std::cos;
        using std::sin;
        sa = sin(q[kAlpha]);
        ca = cos(q[kAlpha]);
        sb = sin(q[kBeta]);
        cb = cos(q[kBeta]);
        sg = sin(q[kGamma]);
        cg = cos(q[kGamma]);
        s1 = sin(q[kTheta1]);
        c1 = cos(q[kTheta1]);
        s2 = sin(q[kTheta2]);
        c2 = cos(q[kTheta2]);
    }
};

/// World-frame Cartesian position of the payload [m].
template <typename Scalar = double>
Eigen::Matrix<Scalar, 3, 1> payload_position(const CraneParams &p, const Vector6<Scalar> &q) {
    const Trig<Scalar> t(q);
    const Scalar d = q[kCable];
    const Scalar lb = p.l_b;
    const Scalar lj = p.l_j;
    const Scalar radial = lb * t.cb + lj * t.cg + d * t.s2;
    const Scalar tangential = d * t.s1 * t.c2;
    return {radial * t.ca - tangential * t.sa, radial * t.sa + tangential * t.ca,
            lb * t.sb + lj * t.sg - d * t.c1 * t.c2};
}

inline Vec3 payload_position(const CraneParams &p, const GeneralizedState &s) {
    return payload_position<double>(p, s.q);
}

/// Gravitational potential energy of boom, jib and payload [J].
template <typename Scalar = double>
Scalar potential_energy(const CraneParams &p, const Vector6<Scalar> &q) {
    const Trig<Scalar> t(q);
    const Scalar d = q[kCable];
    const Scalar g = p.g;
    return g * p.m * (p.l_b * t.sb + p.l_j * t.sg - t.c1 * t.c2 * d) +
           g * p.m_j * (p.l_b * t.sb + 0.5 * p.l_j * t.sg) + 0.5 * g * p.l_b * p.m_b * t.sb;
}

/// 3x6 Jacobian of the payload position with respect to q, by central differences.
inline Eigen::Matrix<double, 3, 6> payload_jacobian(const CraneParams &p, const Vec6 &q,
                                                    double h = 1e-7) {
    Eigen::Matrix<double, 3, 6> J;
    for (int i = 0; i < 6; ++i) {
        Vec6 qp = q;
        Vec6 qm = q;
        qp[i] += h;
        qm[i] -= h;
        J.col(i) = (payload_position<double>(p, qp) - payload_position<double>(p, qm)) / (2.0 * h);
    }
    return J;
}

} // namespace kbcrane
