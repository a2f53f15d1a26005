#pragma once

// Continuous-time algebraic Riccati equation
//   A^T P + P A - P B R^{-1} B^T P + Q = 0
// solved with the matrix sign function of the Hamiltonian, then polished with
// Newton-Kleinman iterations until the residual meets the requested tolerance.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kbcrane {

using Eigen::MatrixXd;

class RiccatiError : public std::runtime_error {
public:
    enum class Kind { NonConvergence, Unstable, Invalid };

    RiccatiError(Kind kind, double residual, const std::string &what)
        : std::runtime_error(what), kind_(kind), residual_(residual) {}

    Kind kind() const noexcept { return kind_; }
    double residual() const noexcept { return residual_; }

private:
    Kind kind_;
    double residual_;
};

struct CareOptions {
    double tolerance = 1e-9; ///< relative to ||Q||_F
    int max_iterations = 200;
};

struct CareSolution {
    MatrixXd P;
    MatrixXd K;            ///< R^{-1} B^T P
    double residual = 0.0; ///< ||A^T P + P A - P B R^{-1} B^T P + Q||_F
    int iterations = 0;    ///< Newton-Kleinman refinements performed
};

inline double care_residual(const MatrixXd &A, const MatrixXd &B, const MatrixXd &Q,
                            const MatrixXd &R, const MatrixXd &P) {
    const MatrixXd G = B * R.ldlt().solve(B.transpose());
    return (A.transpose() * P + P * A - P * G * P + Q).norm();
}

/// Solves A^T X + X A + W = 0 through the Kronecker-product linear system.
inline MatrixXd solve_lyapunov(const MatrixXd &A, const MatrixXd &W) {
    const Eigen::Index n = A.rows();
    const MatrixXd I = MatrixXd::Identity(n, n);
    MatrixXd L = MatrixXd::Zero(n * n, n * n);
    // vec(A^T X) = (I kron A^T) vec X, vec(X A) = (A^T kron I) vec X
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            L.block(i * n, j * n, n, n) += I(i, j) * A.transpose();
            L.block(i * n, j * n, n, n) += A(j, i) * I;
        }
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(W.data(), n * n);
    const Eigen::VectorXd x = L.partialPivLu().solve(rhs);
    MatrixXd X = Eigen::Map<const MatrixXd>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
}

namespace detail {

/// Matrix sign function with determinant scaling.
inline MatrixXd matrix_sign(MatrixXd Z, int max_iter = 100, double tol = 1e-13) {
    const double n = static_cast<double>(Z.rows());
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::PartialPivLU<MatrixXd> lu(Z);
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < Z.rows(); ++i)
            log_det += std::log(std::abs(lu.matrixLU()(i, i)));
        const double c = std::exp(log_det / n);
        MatrixXd next = 0.5 * (Z / c + c * lu.inverse());
        const double change = (next - Z).lpNorm<1>();
        Z = std::move(next);
        if (change <= tol * Z.lpNorm<1>()) break;
    }
    return Z;
}

inline double spectral_abscissa(const MatrixXd &A) {
    const Eigen::EigenSolver<MatrixXd> es(A, false);
    return es.eigenvalues().real().maxCoeff();
}

} // namespace detail

/// Largest real part of the eigenvalues of A.
inline double spectral_abscissa(const MatrixXd &A) { return detail::spectral_abscissa(A); }

/// Stabilizing solution of the CARE and the LQR gain K = R^{-1} B^T P.
///
/// Throws RiccatiError on non-convergence (with the last residual) or when
/// the closed loop A - B K is not strictly stable.
inline CareSolution solve_care(const MatrixXd &A, const MatrixXd &B, const MatrixXd &Q,
                               const MatrixXd &R, const CareOptions &opt = {}) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
        R.rows() != B.cols() || R.cols() != B.cols()) {
        throw RiccatiError(RiccatiError::Kind::Invalid, 0.0, "solve_care: dimension mismatch");
    }
    const Eigen::LDLT<MatrixXd> R_ldlt(R);
    if (R_ldlt.info() != Eigen::Success || !R_ldlt.isPositive() ||
        R_ldlt.vectorD().minCoeff() <= 0.0) {
        throw RiccatiError(RiccatiError::Kind::Invalid, 0.0,
                           "solve_care: R must be positive definite");
    }
    const MatrixXd G = B * R_ldlt.solve(B.transpose());
    const double q_norm = std::max(Q.norm(), std::numeric_limits<double>::min());

    MatrixXd H(2 * n, 2 * n);
    H << A, -G, -Q, -A.transpose();
    const MatrixXd W = detail::matrix_sign(H);
    MatrixXd lhs(2 * n, n);
    MatrixXd rhs(2 * n, n);
    lhs << W.topRightCorner(n, n), W.bottomRightCorner(n, n) + MatrixXd::Identity(n, n);
    rhs << W.topLeftCorner(n, n) + MatrixXd::Identity(n, n), W.bottomLeftCorner(n, n);
    MatrixXd P = lhs.colPivHouseholderQr().solve(-rhs);
    P = 0.5 * (P + P.transpose());

    CareSolution sol;
    sol.residual = care_residual(A, B, Q, R, P);
    while (sol.residual > opt.tolerance * q_norm) {
        if (sol.iterations >= opt.max_iterations) {
            std::ostringstream os;
            os << "Riccati iteration did not converge after " << sol.iterations
               << " refinements (residual " << sol.residual << ")";
            throw RiccatiError(RiccatiError::Kind::NonConvergence, sol.residual, os.str());
        }
        // Newton-Kleinman: (A - G P)^T X + X (A - G P) + Q + P G P = 0
        const MatrixXd Acl = A - G * P;
        MatrixXd next = solve_lyapunov(Acl, Q + P * G * P);
        const double next_residual = care_residual(A, B, Q, R, next);
        ++sol.iterations;
        if (!std::isfinite(next_residual)) {
            throw RiccatiError(RiccatiError::Kind::NonConvergence, sol.residual,
                               "Riccati refinement diverged");
        }
        P = std::move(next);
        sol.residual = next_residual;
    }

    sol.P = P;
    sol.K = R_ldlt.solve(B.transpose() * P);
    const double abscissa = detail::spectral_abscissa(A - B * sol.K);
    if (!(abscissa < 0.0)) {
        std::ostringstream os;
        os << "LQR closed loop is not stable (spectral abscissa " << abscissa << ")";
        throw RiccatiError(RiccatiError::Kind::Unstable, sol.residual, os.str());
    }
    return sol;
}

} // namespace kbcrane
