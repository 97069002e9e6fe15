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
#ifndef ADPTRACK_MODEL_HPP
#define ADPTRACK_MODEL_HPP

#include "adptrack/core.hpp"

#include <functional>
#include <optional>
#include <utility>

namespace adptrack {

using VectorField = std::function<Vector(const Vector&)>;
using MatrixField = std::function<Matrix(const Vector&)>;
using ScalarField = std::function<double(const Vector&)>;

/**
 * Control-affine plant xdot = f(x) + g(x) u.
 *
 * Only the simulator is allowed to see the drift f. Controller-side code
 * receives a KnownDynamics view, which omits it.
 */
struct SystemModel {
    int n = 0;
    int m = 0;
    VectorField f;
    MatrixField g;
    /// Ideal identifier weights, (p+1) x n, when the drift lies in the
    /// identifier basis span.
    std::optional<Matrix> true_theta;
};

/// Desired trajectory generated by xd_dot = h_d(x_d).
struct DesiredTrajectory {
    VectorField h_d;
    Vector x_d0;
    /// Known bound on the desired state norm.
    double d = 0.0;
};

/// Local cost r(zeta, mu) = Q(e) + mu' R mu.
struct CostSpec {
    ScalarField Q;
    Matrix R;
    /// Set when Q(e) = e' Qe e, which the Riccati oracle needs.
    std::optional<Matrix> Q_matrix;

    static CostSpec quadratic(Matrix q_e, Matrix r)
    {
        CostSpec c;
        c.Q = [q = q_e](const Vector& e) { return e.dot(q * e); };
        c.R = std::move(r);
        c.Q_matrix = std::move(q_e);
        return c;
    }
};

/// zeta = [e; x_d], error block first.
struct ConcatState {
    Vector e;
    Vector x_d;

    ConcatState() = default;
    ConcatState(Vector error, Vector desired) : e(std::move(error)), x_d(std::move(desired)) {}

    static ConcatState from_zeta(const Vector& zeta)
    {
        const Eigen::Index n = zeta.size() / 2;
        return {zeta.head(n), zeta.tail(n)};
    }

    static ConcatState from_plant(const Vector& x, const Vector& x_d) { return {x - x_d, x_d}; }

    [[nodiscard]] Eigen::Index n() const { return e.size(); }
    [[nodiscard]] Vector x() const { return e + x_d; }

    [[nodiscard]] Vector zeta() const
    {
        Vector z(2 * e.size());
        z << e, x_d;
        return z;
    }
};

/// What the controller is allowed to know: everything except the drift.
struct KnownDynamics {
    int n = 0;
    int m = 0;
    MatrixField g;
    DesiredTrajectory desired;
    CostSpec cost;
};

struct TrackingProblem {
    SystemModel plant;
    DesiredTrajectory desired;
    CostSpec cost;

    [[nodiscard]] KnownDynamics known() const { return {plant.n, plant.m, plant.g, desired, cost}; }
};

/// g+ = (g'g)^{-1} g'. Throws RankDeficient when sigma_min(g) <= kRankTolerance.
inline Matrix pseudoinverse(const Matrix& g_mat)
{
    if (g_mat.cols() > g_mat.rows()) {
        throw RankDeficient("pseudoinverse: more inputs than states, no full column rank");
    }
    Eigen::JacobiSVD<Matrix> svd(g_mat);
    const auto& sv = svd.singularValues();
    const double sigma_min = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
    if (!(sigma_min > kRankTolerance)) {
        throw RankDeficient("pseudoinverse: smallest singular value " + std::to_string(sigma_min)
                            + " below tolerance");
    }
    const Matrix gtg = g_mat.transpose() * g_mat;
    return gtg.ldlt().solve(g_mat.transpose());
}

/// u_d(x_d) = g+(x_d) (h_d(x_d) - f(x_d)).
inline Vector steady_state_control(const TrackingProblem& problem, const Vector& x_d)
{
    const Matrix g_pinv = pseudoinverse(problem.plant.g(x_d));
    return g_pinv * (problem.desired.h_d(x_d) - problem.plant.f(x_d));
}

/// ||(g g+ - I)(h_d - f_d)||, zero exactly when the matching condition holds at x_d.
inline double matching_residual(const TrackingProblem& problem, const Vector& x_d)
{
    const Matrix g_d = problem.plant.g(x_d);
    const Matrix g_pinv = pseudoinverse(g_d);
    const Vector r = problem.desired.h_d(x_d) - problem.plant.f(x_d);
    return (g_d * (g_pinv * r) - r).norm();
}

struct ConcatDynamics {
    Vector F;
    Matrix G;
};

/// Autonomous error dynamics zeta_dot = F(zeta) + G(zeta) mu.
inline ConcatDynamics concat_dynamics(const TrackingProblem& problem, const ConcatState& zeta)
{
    const Eigen::Index n = zeta.n();
    const Vector x = zeta.x();
    const Matrix g_x = problem.plant.g(x);
    pseudoinverse(g_x); // rank check only
    const Vector h_d = problem.desired.h_d(zeta.x_d);
    const Vector u_d = steady_state_control(problem, zeta.x_d);

    ConcatDynamics out;
    out.F.resize(2 * n);
    out.F.head(n) = problem.plant.f(x) - h_d + g_x * u_d;
    out.F.tail(n) = h_d;
    out.G = Matrix::Zero(2 * n, g_x.cols());
    out.G.topRows(n) = g_x;
    return out;
}

inline double local_cost(const CostSpec& cost, const ConcatState& zeta, const Vector& mu)
{
    return cost.Q(zeta.e) + mu.dot(cost.R * mu);
}

/// Checks R symmetric positive definite and Q(0) = 0; throws ConfigError.
inline void validate_cost(const CostSpec& cost, Eigen::Index n)
{
    if (cost.R.rows() != cost.R.cols() || cost.R.rows() == 0) {
        throw ConfigError("cost.R must be a non-empty square matrix");
    }
    if ((cost.R - cost.R.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ConfigError("cost.R must be symmetric");
    }
    if (linalg::min_eigenvalue(cost.R) <= 0.0) {
        throw ConfigError("cost.R must be positive definite");
    }
    if (std::abs(cost.Q(Vector::Zero(n))) > 1e-14) {
        throw ConfigError("cost.Q must vanish at zero error");
    }
}

} // namespace adptrack

#endif // ADPTRACK_MODEL_HPP
