#pragma once

// Core value types for the knuckle boom crane model.
//
// Generalized coordinates are ordered q = [alpha, beta, gamma, d, theta1, theta2]:
// tower slew, boom luff, jib luff (absolute, from the horizontal), cable length,
// tangential sway and radial sway of the payload.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace kbcrane {

template <typename Scalar> using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar> using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Vector6<double>;
using Mat6 = Matrix6<double>;

/// Index of each generalized coordinate inside q and qdot.
enum Coord : int { kAlpha = 0, kBeta = 1, kGamma = 2, kCable = 3, kTheta1 = 4, kTheta2 = 5 };

inline constexpr std::array<const char *, 6> kCoordNames = {"alpha", "beta", "gamma",
                                                            "d",     "theta1", "theta2"};

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Minimum admissible cable length [m].
inline constexpr double kMinCableLength = 0.01;

/// Thrown when a state leaves the region where the model and the controller
/// analysis are valid (swing, luff or cable-length limits).
class DomainViolation : public std::runtime_error {
public:
    DomainViolation(std::string coordinate, double value, const std::string &what)
        : std::runtime_error(what), coordinate_(std::move(coordinate)), value_(value) {}

    const std::string &coordinate() const noexcept { return coordinate_; }
    double value() const noexcept { return value_; }

private:
    std::string coordinate_;
    double value_;
};

/// Thrown when the inertia matrix cannot be inverted reliably.
class SingularMassMatrix : public std::runtime_error {
public:
    SingularMassMatrix(double condition, const std::string &what)
        : std::runtime_error(what), condition_(condition) {}
    double condition_estimate() const noexcept { return condition_; }

private:
    double condition_;
};

/// Physical parameters of the crane.
///
/// Defaults are the NK375b-sized values used throughout the scenarios; the two
/// link inertias default to a uniform slender rod about its centre.
struct CraneParams {
    double m_b = 300.0;  ///< boom mass [kg]
    double m_j = 250.0;  ///< jib mass [kg]
    double m = 100.0;    ///< payload mass [kg]
    double l_b = 2.0;    ///< boom length [m]
    double l_j = 2.3;    ///< jib length [m]
    double I_tot = 100.0; ///< tower inertia about the slew axis [kg m^2]
    double I_b = 300.0 * 2.0 * 2.0 / 12.0;   ///< boom inertia [kg m^2]
    double I_j = 250.0 * 2.3 * 2.3 / 12.0;   ///< jib inertia [kg m^2]
    double g = 9.81;     ///< gravitational acceleration [m/s^2]

    /// Rod inertias recomputed from the current masses and lengths.
    static CraneParams with_rod_inertias(CraneParams p) {
        p.I_b = p.m_b * p.l_b * p.l_b / 12.0;
        p.I_j = p.m_j * p.l_j * p.l_j / 12.0;
        return p;
    }

    // Lumped coefficients of the equations of motion.
    double A1() const { return l_b * l_b * m + l_b * l_b * m_b / 4.0 + l_b * l_b * m_j; }
    double A2() const { return l_j * l_j * m + l_j * l_j * m_j / 4.0; }
    double A3() const { return 2.0 * l_b * l_j * m + l_b * l_j * m_j; }
    // Payload coupling through the boom and the jib. These are l*m, not 2*l*m:
    // only this scaling reproduces the scalar equations of motion derived from
    // the kinetic energy (see docs/model.md).
    double A4() const { return l_b * m; }
    double A5() const { return l_j * m; }

    /// Throws std::invalid_argument naming the first non-positive field.
    void validate() const {
        const std::array<std::pair<const char *, double>, 9> fields = {{{"m_b", m_b},
                                                                         {"m_j", m_j},
                                                                         {"m", m},
                                                                         {"l_b", l_b},
                                                                         {"l_j", l_j},
                                                                         {"I_tot", I_tot},
                                                                         {"I_b", I_b},
                                                                         {"I_j", I_j},
                                                                         {"g", g}}};
        for (const auto &[name, value] : fields) {
            if (!(value > 0.0) || !std::isfinite(value)) {
                throw std::invalid_argument(std::string("crane parameter '") + name +
                                            "' must be strictly positive (got " +
                                            std::to_string(value) + ")");
            }
        }
    }
};

/// Configuration and velocity of the crane.
struct GeneralizedState {
    Vec6 q = Vec6::Zero();
    Vec6 qdot = Vec6::Zero();

    double alpha() const { return q[kAlpha]; }
    double beta() const { return q[kBeta]; }
    double gamma() const { return q[kGamma]; }
    double d() const { return q[kCable]; }
    double theta1() const { return q[kTheta1]; }
    double theta2() const { return q[kTheta2]; }
};

/// Actuator efforts [u1, u2, u3, u4]: three joint torques [N m] and the hoist force [N].
struct ControlInput {
    Vec4 u = Vec4::Zero();

    /// Generalized force vector; the two swing coordinates are unactuated.
    Vec6 generalized() const {
        Vec6 zeta = Vec6::Zero();
        zeta.head<4>() = u;
        return zeta;
    }
};

/// Checks the swing, luff and cable-length limits the model relies on.
/// Throws DomainViolation naming the offending coordinate.
inline void check_admissible(const GeneralizedState &s, double d_min = kMinCableLength) {
    for (int i = 0; i < 6; ++i) {
        if (!std::isfinite(s.q[i]) || !std::isfinite(s.qdot[i])) {
            throw DomainViolation(kCoordNames[i], s.q[i],
                                  std::string("non-finite state in coordinate ") + kCoordNames[i]);
        }
    }
    constexpr double half_pi = std::numbers::pi / 2.0;
    for (int i : {kBeta, kGamma, kTheta1, kTheta2}) {
        if (!(std::abs(s.q[i]) < half_pi)) {
            throw DomainViolation(kCoordNames[i], s.q[i],
                                  std::string("coordinate ") + kCoordNames[i] +
                                      " left the admissible range |x| < pi/2 (value " +
                                      std::to_string(s.q[i]) + " rad)");
        }
    }
    if (!(s.q[kCable] >= d_min)) {
        throw DomainViolation("d", s.q[kCable],
                              "cable length " + std::to_string(s.q[kCable]) +
                                  " m is below the minimum " + std::to_string(d_min) + " m");
    }
}

inline bool is_admissible(const GeneralizedState &s, double d_min = kMinCableLength) {
    try {
        check_admissible(s, d_min);
        return true;
    } catch (const DomainViolation &) {
        return false;
    }
}

} // namespace kbcrane
