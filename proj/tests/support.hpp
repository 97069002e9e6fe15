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
#ifndef ADPTRACK_TESTS_SUPPORT_HPP
#define ADPTRACK_TESTS_SUPPORT_HPP

#include "adptrack/adp.hpp"
#include "adptrack/config.hpp"
#include "adptrack/scenarios.hpp"
#include "adptrack/integrator.hpp"
#include "adptrack/sim.hpp"

#include <random>
#include <string>

namespace adptrack::testing {

inline const double kPStar = std::sqrt(2.0) - 1.0;

inline Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

inline Vector scalar(double x) { return Vector::Constant(1, x); }

/// xdot = a x + b u with h_d = 0 and Q = e^2, R = 1.
inline TrackingProblem scalar_problem(double a = -1.0, double b = 1.0, double x_d0 = 2.0)
{
    TrackingProblem p = scenarios::scalar_lq(a, b, x_d0).problem;
    p.cost = CostSpec::quadratic(Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    return p;
}

/// Parses a config shipped in configs/.
inline config::RunConfig shipped(const std::string& file)
{
    return config::parse_config(std::string(ADPTRACK_SOURCE_DIR) + "/configs/" + file);
}

/// Scalar controller with the pass-through identifier (no bias) and {e^2}.
inline adp::Controller scalar_controller(const adp::AdpGains& gains = {})
{
    const TrackingProblem p = scalar_problem();
    return {p.known(), sysid::IdentifierBasis::pass_through(1, false),
            adp::ValueBasis::error_quadratic(1), gains};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return sysid::uniform_from(rng, lo, hi);
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0)
{
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = uniform(rng, lo, hi);
    }
    return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0,
                            double hi = 1.0)
{
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) {
            m(i, j) = uniform(rng, lo, hi);
        }
    }
    return m;
}

/**
 * RMS gap between the plant-form error e = x - x_d and a second error state
 * integrated in the autonomous form e' = F + G mu_equivalent. Both share one
 * RK4 step over the augmented state, so the weight, x_d and theta_hat
 * trajectories are identical. The history stack is frozen at its initial
 * contents. Requires the true identifier weights.
 */
inline double equivalence_rms(const sim::Scenario& sc, double T)
{
    sim::Simulation s(sc);
    const auto& ctrl = s.controller();
    const auto& problem = sc.problem;
    const Matrix theta = *problem.plant.true_theta;
    const Eigen::Index n = problem.plant.n;
    const Eigen::Index nz = s.layout().size();

    const auto rhs = [&](double t, const Vector& y) {
        Vector dy(nz + n);
        dy.head(nz) = s.rhs(t, y.head(nz));
        const sim::ClosedLoopState cl = sim::unpack(y.head(nz), s.layout());
        const ConcatState zeta(y.tail(n), cl.x_d);
        const Vector mu = adp::mu_equivalent(ctrl, zeta, {cl.W_a}, theta, cl.theta_hat);
        const auto cd = concat_dynamics(problem, zeta);
        dy.tail(n) = cd.F.head(n) + cd.G.topRows(n) * mu;
        return dy;
    };

    Vector y(nz + n);
    y.head(nz) = s.flat_state();
    const sim::ClosedLoopState c0 = s.state();
    y.tail(n) = c0.x - c0.x_d;
    const auto steps = static_cast<std::size_t>(std::floor(T / sc.dt + 1e-9));
    double ss = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        y = rk4_step(rhs, static_cast<double>(k) * sc.dt, y, sc.dt);
        const sim::ClosedLoopState cl = sim::unpack(y.head(nz), s.layout());
        ss += (cl.x - cl.x_d - y.tail(n)).squaredNorm();
    }
    return std::sqrt(ss / static_cast<double>(std::max<std::size_t>(steps, 1)));
}

/// Ratio of terminal errors at dt and dt/2 for RK4 on y' = -y over [0, T].
inline double richardson_ratio(double dt, double T = 1.0)
{
    const auto solve = [T](double h) {
        Vector y = Vector::Ones(1);
        const auto steps = static_cast<int>(std::lround(T / h));
        for (int k = 0; k < steps; ++k) {
            y = rk4_step([](double, const Vector& v) { return Vector(-v); }, k * h, y, h);
        }
        return std::abs(y(0) - std::exp(-T));
    };
    return solve(dt) / solve(dt / 2.0);
}

} // namespace adptrack::testing

#endif // ADPTRACK_TESTS_SUPPORT_HPP
