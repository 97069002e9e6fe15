/*
 Copyright 2026 The adptrack Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef ADPTRACK_ORACLE_HPP
#define ADPTRACK_ORACLE_HPP

// Ground truth for linear-quadratic scenarios: continuous-time algebraic
// Riccati equation via Newton-Kleinman, and the matching ideal weights of the
// quadratic value basis.

#include "adptrack/core.hpp"
#include "adptrack/value_basis.hpp"

#include <optional>
#include <vector>

namespace adptrack::oracle {

struct LqSpec {
    Matrix A;
    Matrix B;
    Matrix Q_e;
    Matrix R;
};

struct RiccatiSolution {
    Matrix P;
    Matrix K;
    int iterations = 0;
    /// Riccati residual after each Newton step.
    std::vector<double> residuals;
};

/// Frobenius norm of A'P + PA - P B R^{-1} B' P + Q.
inline double care_residual(const LqSpec& s, const Matrix& P)
{
    const Matrix res = s.A.transpose() * P + P * s.A
                       - P * s.B * s.R.ldlt().solve(s.B.transpose()) * P + s.Q_e;
    return res.norm();
}

/// Solves A'X + XA + C = 0 through the Kronecker form (small n only).
inline Matrix solve_lyapunov(const Matrix& A, const Matrix& C)
{
    const Eigen::Index n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    Matrix kron(n * n, n * n);
    // vec(A'X) = (I kron A') vec X, vec(XA) = (A' kron I) vec X.
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            kron.block(i * n, j * n, n, n) = I(i, j) * A.transpose() + A(j, i) * I;
        }
    }
    const Eigen::Map<const Vector> c(C.data(), n * n);
    Eigen::FullPivLU<Matrix> lu(kron);
    if (!lu.isInvertible()) {
        throw NoConvergence("Lyapunov operator is singular");
    }
    const Vector x = lu.solve(-c);
    Matrix X = Eigen::Map<const Matrix>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
}

inline bool is_hurwitz(const Matrix& A)
{
    Eigen::EigenSolver<Matrix> es(A, false);
    return (es.eigenvalues().real().array() < 0.0).all();
}

/**
 * Stabilizing gain from Bass' method: with beta above the spectral abscissa
 * bound, Z solving (A + beta I) Z + Z (A + beta I)' = 2 B B' is positive
 * definite for a controllable pair and K = B' Z^{-1} makes A - BK Hurwitz.
 */
inline std::optional<Matrix> bass_gain(const Matrix& A, const Matrix& B)
{
    const Eigen::Index n = A.rows();
    const double beta = 1.0 + A.norm();
    const Matrix Ab = -(A + beta * Matrix::Identity(n, n));
    // Ab Z + Z Ab' + 2 B B' = 0.
    Matrix Z;
    try {
        Z = solve_lyapunov(Ab.transpose(), 2.0 * B * B.transpose());
    } catch (const NoConvergence&) {
        return std::nullopt;
    }
    Eigen::LDLT<Matrix> ldlt(Z);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || linalg::min_eigenvalue(Z) <= 1e-14) {
        return std::nullopt;
    }
    const Matrix K = B.transpose() * Z.inverse();
    if (!is_hurwitz(A - B * K)) {
        return std::nullopt;
    }
    return K;
}

/**
 * Newton-Kleinman iteration. K0 must stabilize A - B K0; when omitted, zero
 * is used for Hurwitz A and Bass' gain otherwise. Throws NoConvergence when no
 * stabilizing start exists or the residual stays above tolerance.
 */
inline RiccatiSolution solve_are(const LqSpec& s, std::optional<Matrix> K0 = std::nullopt,
                                 double tolerance = 1e-12, int max_iterations = 100)
{
    const Eigen::Index n = s.A.rows();
    const Eigen::Index m = s.B.cols();
    if (s.A.cols() != n || s.B.rows() != n || s.Q_e.rows() != n || s.Q_e.cols() != n
        || s.R.rows() != m || s.R.cols() != m) {
        throw ConfigError("solve_are: inconsistent LQ dimensions");
    }
    if ((s.Q_e - s.Q_e.transpose()).cwiseAbs().maxCoeff() > 1e-12
        || (s.R - s.R.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ConfigError("solve_are: Q_e and R must be symmetric");
    }

    Matrix K;
    if (K0) {
        K = *K0;
    } else if (is_hurwitz(s.A)) {
        K = Matrix::Zero(m, n);
    } else if (auto kb = bass_gain(s.A, s.B)) {
        K = *kb;
    } else {
        throw NoConvergence("solve_are: no stabilizing initial gain (pair not stabilizable?)");
    }
    if (!is_hurwitz(s.A - s.B * K)) {
        throw NoConvergence("solve_are: initial gain is not stabilizing");
    }

    const Eigen::LDLT<Matrix> r_ldlt(s.R);
    RiccatiSolution out;
    Matrix P = Matrix::Zero(n, n);
    for (int it = 1; it <= max_iterations; ++it) {
        const Matrix Acl = s.A - s.B * K;
        const Matrix C = s.Q_e + K.transpose() * s.R * K;
        P = solve_lyapunov(Acl, C);
        K = r_ldlt.solve(s.B.transpose() * P);
        const double res = care_residual(s, P);
        out.residuals.push_back(res);
        out.iterations = it;
        if (!P.allFinite()) {
            break;
        }
        if (res <= tolerance * std::max(1.0, P.norm())) {
            out.P = P;
            out.K = K;
            return out;
        }
    }
    throw NoConvergence("solve_are: Newton-Kleinman did not converge");
}

/**
 * W with W' sigma(zeta) = e' P e for a polynomial basis that contains every
 * error monomial e_i e_j (i <= j). Other basis terms receive zero weight.
 */
inline Vector ideal_quadratic_weights(const Matrix& P, const adp::ValueBasis& basis)
{
    const Eigen::Index n = P.rows();
    if (basis.kind() == adp::BasisKind::custom) {
        throw BasisMismatch("ideal_quadratic_weights: custom bases are not supported");
    }
    if (basis.n() != n) {
        throw BasisMismatch("ideal_quadratic_weights: basis dimension does not match P");
    }
    const Eigen::MatrixXi& ex = basis.exponents();
    Vector W = Vector::Zero(basis.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            Eigen::VectorXi want = Eigen::VectorXi::Zero(2 * n);
            want(i) += 1;
            want(j) += 1;
            Eigen::Index found = -1;
            for (Eigen::Index r = 0; r < ex.rows(); ++r) {
                if ((ex.row(r).transpose().array() == want.array()).all()) {
                    found = r;
                    break;
                }
            }
            if (found < 0) {
                throw BasisMismatch("ideal_quadratic_weights: basis lacks monomial e"
                                    + std::to_string(i + 1) + "*e" + std::to_string(j + 1));
            }
            W(found) = (i == j) ? P(i, i) : P(i, j) + P(j, i);
        }
    }
    return W;
}

} // namespace adptrack::oracle

#endif // ADPTRACK_ORACLE_HPP
