#pragma once

// Structural property suite over seeded random admissible states:
//   skew_symmetry     |eta^T (0.5 Mdot - C) eta| / |eta|^2, Mdot by finite differences
//   gravity_gradient  |g - dU/dq| / |dU/dq|
//   scalar_equations  matrix form vs. the six expanded scalar equations
//   mass_matrix       M symmetric, smallest eigenvalue positive
//   slew_gravity      g_1 == 0
//   energy_rate       dE/dt along the dynamics vs. the closed-form power balance

#include "kbcrane/dynamics.hpp"
#include "kbcrane/energy.hpp"
#include "kbcrane/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace kbcrane {

struct PropertyResult {
    std::string name;
    double worst = 0.0;     ///< largest deviation
    double threshold = 0.0; ///< pass iff worst <= threshold
    bool passed = true;
    GeneralizedState worst_state;
    std::string note; ///< extra detail, e.g. the smallest eigenvalue of M
};

struct PropertySuiteOptions {
    std::size_t samples = 1000;
    std::uint64_t seed = 20240531;
    CraneParams params;
    /// Test hook applied to C before the skew-symmetry check.
    std::function<void(Mat6 &)> perturb_coriolis;
};

/// Uniform draw from the box |beta|, |gamma|, |theta| <= 80 deg, 0.1 <= d <= 10,
/// |alpha| <= pi, |qdot_i| <= 1.
inline GeneralizedState random_admissible_state(std::mt19937_64 &rng) {
    constexpr double lim = 80.0 * kDegToRad;
    std::uniform_real_distribution<double> angle(-lim, lim);
    std::uniform_real_distribution<double> slew(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> cable(0.1, 10.0);
    std::uniform_real_distribution<double> rate(-1.0, 1.0);
    GeneralizedState s;
    s.q << slew(rng), angle(rng), angle(rng), cable(rng), angle(rng), angle(rng);
    for (int i = 0; i < 6; ++i) s.qdot[i] = rate(rng);
    return s;
}

/// dM/dt along qdot by a fourth-order central difference in extended precision.
inline Mat6 mass_matrix_rate_fd(const CraneParams &p, const GeneralizedState &s,
                                long double h = 1e-4L) {
    using LD = long double;
    const Vector6<LD> q = s.q.cast<LD>();
    const Vector6<LD> v = s.qdot.cast<LD>();
    auto M = [&](LD eps) { return inertia_matrix<LD>(p, Vector6<LD>(q + eps * v)); };
    const Matrix6<LD> dM = (M(-2 * h) - 8 * M(-h) + 8 * M(h) - M(2 * h)) / (12 * h);
    return dM.cast<double>();
}

/// dE/dt by a fourth-order central difference along the state derivative.
inline double energy_rate_fd(const CraneParams &p, const GeneralizedState &s, const Vec6 &qddot,
                             double h = 1e-5) {
    auto E = [&](double eps) {
        return energy_E(p, GeneralizedState{s.q + eps * s.qdot, s.qdot + eps * qddot});
    };
    return (E(-2 * h) - 8 * E(-h) + 8 * E(h) - E(2 * h)) / (12 * h);
}

inline std::vector<PropertyResult> run_property_suite(const PropertySuiteOptions &opt = {}) {
    const CraneParams &p = opt.params;
    std::vector<PropertyResult> res = {{"skew_symmetry", 0.0, 1e-8},
                                       {"gravity_gradient", 0.0, 1e-6},
                                       {"scalar_equations", 0.0, 1e-8},
                                       {"mass_matrix", 0.0, 0.0},
                                       {"slew_gravity", 0.0, 0.0},
                                       {"energy_rate", 0.0, 1e-6}};
    enum { kSkew, kGrav, kScalar, kMass, kSlew, kEnergy };
    // mass_matrix deviation: asymmetry, plus a unit penalty for a non-positive eigenvalue.
    double min_eigenvalue = std::numeric_limits<double>::infinity();

    auto record = [&](int idx, double deviation, const GeneralizedState &s) {
        auto &r = res[idx];
        if (!(deviation <= r.worst)) {
            r.worst = std::isnan(deviation) ? std::numeric_limits<double>::infinity() : deviation;
            r.worst_state = s;
        }
    };

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t n = 0; n < opt.samples; ++n) {
        const GeneralizedState s = random_admissible_state(rng);
        Vec6 eta, qddot, tau;
        Vec4 u;
        for (int i = 0; i < 6; ++i) eta[i] = unit(rng);
        for (int i = 0; i < 6; ++i) qddot[i] = unit(rng);
        for (int i = 0; i < 4; ++i) u[i] = 1e3 * unit(rng);
        for (int i = 0; i < 6; ++i) tau[i] = 1e2 * unit(rng);
        const ControlInput in{u};

        const Mat6 M = inertia_matrix<double>(p, s.q);
        Mat6 C = coriolis_matrix<double>(p, s.q, s.qdot);
        const Vec6 gv = gravity_vector<double>(p, s.q);

        {
            Mat6 Cp = C;
            if (opt.perturb_coriolis) opt.perturb_coriolis(Cp);
            const Mat6 N = 0.5 * mass_matrix_rate_fd(p, s) - Cp;
            record(kSkew, std::abs(eta.dot(N * eta)) / eta.squaredNorm(), s);
        }
        {
            const Vec6 fd = gravity_from_potential(p, s);
            record(kGrav, (gv - fd).norm() / std::max(fd.norm(), 1.0), s);
        }
        {
            const Vec6 matrix_form = M * qddot + C * s.qdot + gv - in.generalized();
            record(kScalar, (scalar_eom_residual(p, s, qddot, in) - matrix_form).cwiseAbs().maxCoeff(),
                   s);
        }
        {
            const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
            const double min_eig = Eigen::SelfAdjointEigenSolver<Mat6>(M, Eigen::EigenvaluesOnly)
                                       .eigenvalues()
                                       .minCoeff();
            if (min_eig < min_eigenvalue) {
                min_eigenvalue = min_eig;
                if (res[kMass].worst == 0.0) res[kMass].worst_state = s;
            }
            record(kMass, asym + (min_eig > 0.0 ? 0.0 : 1.0 - min_eig), s);
        }
        record(kSlew, std::abs(gv[kAlpha]), s);
        {
            const Vec6 acc = forward_dynamics(p, s, in, tau);
            const double analytic = energy_rate(p, s, in, tau);
            const double numeric = energy_rate_fd(p, s, acc);
            const double scale = std::abs(s.qdot.head<4>().dot(u)) + std::abs(s.qdot.dot(tau)) +
                                 std::abs(s.qdot.dot(gv)) + 1.0;
            record(kEnergy, std::abs(numeric - analytic) / scale, s);
        }
    }
    res[kMass].note = "min eigenvalue " + std::to_string(min_eigenvalue);
    for (auto &r : res) r.passed = r.worst <= r.threshold;
    return res;
}

} // namespace kbcrane
