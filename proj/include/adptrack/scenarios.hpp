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
#ifndef ADPTRACK_SCENARIOS_HPP
#define ADPTRACK_SCENARIOS_HPP

// Built-in benchmark plants. These are constructed test problems, each
// satisfying the matching condition on its desired trajectory by design.

#include "adptrack/model.hpp"
#include "adptrack/oracle.hpp"

#include <cmath>
#include <optional>

namespace adptrack::scenarios {

/// A registered plant together with what the simulator knows about it.
struct PlantDefinition {
    TrackingProblem problem;
    /// Linear drift matrix when f(x) = A x; enables the Riccati oracle and
    /// exact pass-through identification.
    std::optional<Matrix> A;
    std::optional<Matrix> B;
};

/// xdot = a x + b u, desired trajectory at rest (h_d = 0).
inline PlantDefinition scalar_lq(double a, double b, double x_d0)
{
    PlantDefinition def;
    auto& p = def.problem;
    p.plant.n = 1;
    p.plant.m = 1;
    p.plant.f = [a](const Vector& x) { return Vector(a * x); };
    p.plant.g = [b](const Vector&) { return Matrix::Constant(1, 1, b); };
    p.desired.h_d = [](const Vector& xd) { return Vector::Zero(xd.size()); };
    p.desired.x_d0 = Vector::Constant(1, x_d0);
    p.desired.d = std::abs(x_d0);
    def.A = Matrix::Constant(1, 1, a);
    def.B = Matrix::Constant(1, 1, b);
    return def;
}

/// Oscillating reference xd_dot = H x_d with H = [-1 1; -2 1] (eigenvalues +-i).
inline Matrix reference_generator()
{
    Matrix H(2, 2);
    H << -1.0, 1.0, -2.0, 1.0;
    return H;
}

/// Sup of ||x_d(t)|| on the reference orbit through x_d0.
inline double reference_orbit_bound(const Vector& x_d0)
{
    // H is similar to a rotation: x_d' S x_d is conserved with S = [2 -1; -1 1].
    Matrix S(2, 2);
    S << 2.0, -1.0, -1.0, 1.0;
    const double level = x_d0.dot(S * x_d0);
    // max ||x||^2 subject to x' S x = level is level / lambda_min(S).
    return std::sqrt(level / linalg::min_eigenvalue(S));
}

/// Two-state linear plant with A = [-1 1; a21 a22], B = [0; b2].
inline PlantDefinition twostate_lq(double a21, double a22, double b2, const Vector& x_d0)
{
    Matrix A(2, 2);
    A << -1.0, 1.0, a21, a22;
    Matrix B(2, 1);
    B << 0.0, b2;
    PlantDefinition def;
    auto& p = def.problem;
    p.plant.n = 2;
    p.plant.m = 1;
    p.plant.f = [A](const Vector& x) { return Vector(A * x); };
    p.plant.g = [B](const Vector&) { return B; };
    const Matrix H = reference_generator();
    p.desired.h_d = [H](const Vector& xd) { return Vector(H * xd); };
    p.desired.x_d0 = x_d0;
    p.desired.d = reference_orbit_bound(x_d0);
    def.A = A;
    def.B = B;
    return def;
}

/**
 * Two-state nonlinear plant
 *   f(x) = [-x1 + x2; -x1/2 - x2 (1 + c^2 - 2c)/2],  g(x) = [0; c],
 * with c = cos(2 x1) + 2. The reference shares the first row of f, so the
 * desired residual h_d - f_d lies in the range of g.
 */
inline PlantDefinition twostate_nl(const Vector& x_d0)
{
    PlantDefinition def;
    auto& p = def.problem;
    p.plant.n = 2;
    p.plant.m = 1;
    p.plant.f = [](const Vector& x) {
        const double c = std::cos(2.0 * x(0)) + 2.0;
        Vector out(2);
        out(0) = -x(0) + x(1);
        out(1) = -0.5 * x(0) - 0.5 * x(1) * (1.0 + c * c - 2.0 * c);
        return out;
    };
    p.plant.g = [](const Vector& x) {
        Matrix out(2, 1);
        out << 0.0, std::cos(2.0 * x(0)) + 2.0;
        return out;
    };
    const Matrix H = reference_generator();
    p.desired.h_d = [H](const Vector& xd) { return Vector(H * xd); };
    p.desired.x_d0 = x_d0;
    p.desired.d = reference_orbit_bound(x_d0);
    return def;
}

/// Pass-through identifier weights for a linear drift: theta' [1; x] = A x.
inline Matrix linear_theta(const Matrix& A, bool bias)
{
    const Eigen::Index n = A.rows();
    Matrix theta = Matrix::Zero(n + (bias ? 1 : 0), n);
    theta.bottomRows(n) = A.transpose();
    return theta;
}

} // namespace adptrack::scenarios

#endif // ADPTRACK_SCENARIOS_HPP
