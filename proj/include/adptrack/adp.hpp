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
#ifndef ADPTRACK_ADP_HPP
#define ADPTRACK_ADP_HPP

// Actor-critic approximation of the optimal tracking policy with Bellman-error
// extrapolation driven by the identified drift model.

#include "adptrack/model.hpp"
#include "adptrack/sysid.hpp"
#include "adptrack/value_basis.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace adptrack::adp {

struct AdpGains {
    double eta_c1 = 1.0;
    double eta_c2 = 1.0;
    double eta_a1 = 1.0;
    double eta_a2 = 0.01;
    double nu = 1.0;
    double beta = 0.0;
    double Gamma_bar = 1.0;
};

struct CriticState {
    Vector W;
    Matrix Gamma;
};

struct ActorState {
    Vector W;
};

/// Everything the controller may use. Deliberately has no access to the drift f.
struct Controller {
    KnownDynamics known;
    sysid::IdentifierBasis identifier_basis;
    ValueBasis basis;
    AdpGains gains;
    Matrix R_inv;

    Controller() = default;
    Controller(KnownDynamics k, sysid::IdentifierBasis ib, ValueBasis vb, AdpGains g)
        : known(std::move(k)), identifier_basis(std::move(ib)), basis(std::move(vb)), gains(g),
          R_inv(known.cost.R.inverse())
    {
    }
};

/// Quantities that depend only on x_d, shared by every point paired with it.
struct DesiredPoint {
    Vector x_d;
    Vector h_d;
    Matrix g_pinv;
    Vector sigma_theta_d;
};

inline DesiredPoint desired_point(const Controller& ctrl, const Vector& x_d)
{
    DesiredPoint d;
    d.x_d = x_d;
    d.h_d = ctrl.known.desired.h_d(x_d);
    d.g_pinv = pseudoinverse(ctrl.known.g(x_d));
    d.sigma_theta_d = ctrl.identifier_basis.sigma_f(x_d);
    return d;
}

/// mu_hat = -1/2 R^{-1} G' grad_sigma' W_a.
inline Vector policy(const Controller& ctrl, const ConcatState& zeta, const ActorState& actor)
{
    const Eigen::Index n = zeta.n();
    const Matrix g_x = ctrl.known.g(zeta.x());
    const Matrix grad = ctrl.basis.grad(zeta.zeta());
    return -0.5 * ctrl.R_inv * (g_x.transpose() * (grad.leftCols(n).transpose() * actor.W));
}

/// u_d estimate g_d+ (h_d - theta_hat' sigma_theta_d).
inline Vector desired_input_estimate(const DesiredPoint& d, const Matrix& theta_hat)
{
    return d.g_pinv * (d.h_d - theta_hat.transpose() * d.sigma_theta_d);
}

inline Vector desired_input_estimate(const Controller& ctrl, const Vector& x_d,
                                     const Matrix& theta_hat)
{
    return desired_input_estimate(desired_point(ctrl, x_d), theta_hat);
}

/// u = mu_hat + u_d estimate.
inline Vector applied_control(const Controller& ctrl, const ConcatState& zeta,
                              const ActorState& actor, const Matrix& theta_hat)
{
    return policy(ctrl, zeta, actor) + desired_input_estimate(ctrl, zeta.x_d, theta_hat);
}

struct ExtrapolationDynamics {
    Vector F_theta;
    Vector F_1;
};

inline ExtrapolationDynamics extrapolation_dynamics(const Controller& ctrl, const DesiredPoint& d,
                                                    const ConcatState& zeta,
                                                    const Matrix& theta_hat)
{
    const Eigen::Index n = zeta.n();
    const Vector x = zeta.x();
    const Matrix g_x = ctrl.known.g(x);
    const Matrix gg = g_x * d.g_pinv;
    ExtrapolationDynamics out;
    out.F_theta = Vector::Zero(2 * n);
    out.F_theta.head(n) = theta_hat.transpose() * ctrl.identifier_basis.sigma_f(x)
                          - gg * (theta_hat.transpose() * d.sigma_theta_d);
    out.F_1.resize(2 * n);
    out.F_1.head(n) = -d.h_d + gg * d.h_d;
    out.F_1.tail(n) = d.h_d;
    return out;
}

inline ExtrapolationDynamics extrapolation_dynamics(const Controller& ctrl, const ConcatState& zeta,
                                                    const Matrix& theta_hat)
{
    return extrapolation_dynamics(ctrl, desired_point(ctrl, zeta.x_d), zeta, theta_hat);
}

/// Approximate Bellman error and the regressor quantities the update laws need.
struct BellmanEval {
    double delta = 0.0;
    Vector omega;
    double rho = 1.0;
    Vector mu_hat;
    Matrix G_sigma; // grad_sigma G R^{-1} G' grad_sigma'
};

inline BellmanEval bellman_error(const Controller& ctrl, const DesiredPoint& d,
                                 const ConcatState& zeta, const Matrix& theta_hat,
                                 const CriticState& critic, const ActorState& actor)
{
    const Eigen::Index n = zeta.n();
    const Vector x = zeta.x();
    const Matrix g_x = ctrl.known.g(x);
    const Matrix grad = ctrl.basis.grad(zeta.zeta());
    const Matrix grad_e = grad.leftCols(n);
    const Matrix grad_g = grad_e * g_x; // grad_sigma G, L x m

    BellmanEval out;
    out.mu_hat = -0.5 * ctrl.R_inv * (grad_g.transpose() * actor.W);
    out.G_sigma = grad_g * ctrl.R_inv * grad_g.transpose();

    const auto ext = extrapolation_dynamics(ctrl, d, zeta, theta_hat);
    Vector flow = ext.F_theta + ext.F_1;
    flow.head(n) += g_x * out.mu_hat;
    out.omega = grad * flow;
    out.rho = 1.0 + ctrl.gains.nu * out.omega.dot(critic.Gamma * out.omega);
    out.delta = ctrl.known.cost.Q(zeta.e) + out.mu_hat.dot(ctrl.known.cost.R * out.mu_hat)
                + critic.W.dot(out.omega);
    return out;
}

inline BellmanEval bellman_error(const Controller& ctrl, const ConcatState& zeta,
                                 const Matrix& theta_hat, const CriticState& critic,
                                 const ActorState& actor)
{
    return bellman_error(ctrl, desired_point(ctrl, zeta.x_d), zeta, theta_hat, critic, actor);
}

/// Bellman-error evaluations at the current state and at every extrapolation point.
struct GridEvals {
    BellmanEval at_state;
    std::vector<BellmanEval> at_points;
};

inline Vector critic_dot(const CriticState& critic, const AdpGains& gains, const GridEvals& ev)
{
    const auto& s = ev.at_state;
    Vector acc = gains.eta_c1 * (s.omega / s.rho) * s.delta;
    if (!ev.at_points.empty()) {
        Vector sum = Vector::Zero(critic.W.size());
        for (const auto& p : ev.at_points) {
            sum += (p.omega / p.rho) * p.delta;
        }
        acc += (gains.eta_c2 / static_cast<double>(ev.at_points.size())) * sum;
    }
    return -(critic.Gamma * acc);
}

/// Saturated least-squares gain update; the indicator uses the spectral norm.
inline Matrix gamma_dot(const Matrix& gamma, const AdpGains& gains, const Vector& omega, double rho)
{
    if (linalg::symmetric_norm(gamma) > gains.Gamma_bar) {
        return Matrix::Zero(gamma.rows(), gamma.cols());
    }
    const Vector go = gamma * omega;
    return gains.beta * gamma - (gains.eta_c1 / (rho * rho)) * (go * go.transpose());
}

inline Vector actor_dot(const ActorState& actor, const CriticState& critic, const AdpGains& gains,
                        const GridEvals& ev)
{
    Vector out = -gains.eta_a1 * (actor.W - critic.W) - gains.eta_a2 * actor.W;
    const auto& s = ev.at_state;
    const double wc_omega = s.omega.dot(critic.W);
    out += (gains.eta_c1 * wc_omega / (4.0 * s.rho)) * (s.G_sigma.transpose() * actor.W);
    if (!ev.at_points.empty()) {
        const double scale = gains.eta_c2 / (4.0 * static_cast<double>(ev.at_points.size()));
        for (const auto& p : ev.at_points) {
            out += (scale * p.omega.dot(critic.W) / p.rho) * (p.G_sigma.transpose() * actor.W);
        }
    }
    return out;
}

/// (1/N) lambda_min(sum_i omega_i omega_i' / rho_i) over the given evaluations.
inline double cbar(const std::vector<BellmanEval>& points)
{
    if (points.empty()) {
        return 0.0;
    }
    const Eigen::Index L = points.front().omega.size();
    Matrix sum = Matrix::Zero(L, L);
    for (const auto& p : points) {
        sum.noalias() += (p.omega * p.omega.transpose()) / p.rho;
    }
    return std::max(0.0, linalg::min_eigenvalue(sum)) / static_cast<double>(points.size());
}

/**
 * Control error that reproduces the applied-control error trajectory in
 * the autonomous form. Simulator-side: requires the true identifier weights.
 */
inline Vector mu_equivalent(const Controller& ctrl, const ConcatState& zeta,
                            const ActorState& actor, const Matrix& theta_true,
                            const Matrix& theta_hat)
{
    const DesiredPoint d = desired_point(ctrl, zeta.x_d);
    const Matrix theta_tilde = theta_true - theta_hat;
    return policy(ctrl, zeta, actor) + d.g_pinv * (theta_tilde.transpose() * d.sigma_theta_d);
}

// --- extrapolation grid ------------------------------------------------------

enum class GridStrategy { tracking, fixed_zeta };
enum class GridLayout { lattice, halton };

struct GridConfig {
    std::size_t N = 1;
    /// Per-coordinate [lo, hi]: n entries for tracking, 2n for fixed_zeta.
    std::vector<std::pair<double, double>> bounds;
    GridStrategy strategy = GridStrategy::tracking;
    GridLayout layout = GridLayout::lattice;
    std::uint64_t seed = 0;
};

struct ExtrapolationGrid {
    GridStrategy strategy = GridStrategy::tracking;
    /// Error-space points (tracking) or full zeta points (fixed_zeta).
    std::vector<Vector> points;

    [[nodiscard]] std::size_t N() const { return points.size(); }

    /// Concatenated states at which the Bellman error is extrapolated.
    [[nodiscard]] std::vector<ConcatState> states(const Vector& x_d) const
    {
        std::vector<ConcatState> out;
        out.reserve(points.size());
        for (const auto& p : points) {
            if (strategy == GridStrategy::tracking) {
                out.emplace_back(p, x_d);
            } else {
                out.push_back(ConcatState::from_zeta(p));
            }
        }
        return out;
    }
};

namespace detail {

inline double radical_inverse(std::uint64_t index, std::uint64_t base)
{
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double out = 0.0;
    while (index > 0) {
        out += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return out;
}

inline constexpr std::array<std::uint64_t, 16> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                          23, 29, 31, 37, 41, 43, 47, 53};

} // namespace detail

/// Deterministic low-discrepancy point in the unit cube; index starts at 1.
inline Vector halton_point(std::uint64_t index, Eigen::Index dim)
{
    if (dim > static_cast<Eigen::Index>(detail::kPrimes.size())) {
        throw ConfigError("halton sequence supports at most 16 dimensions");
    }
    Vector out(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        out(k) = detail::radical_inverse(index, detail::kPrimes[static_cast<std::size_t>(k)]);
    }
    return out;
}

inline ExtrapolationGrid make_grid(const GridConfig& cfg)
{
    if (cfg.bounds.empty()) {
        throw ConfigError("grid bounds are empty");
    }
    if (cfg.N == 0) {
        throw ConfigError("grid needs at least one point");
    }
    for (const auto& [lo, hi] : cfg.bounds) {
        if (!(hi >= lo)) {
            throw ConfigError("grid bound has hi < lo");
        }
    }
    const auto dim = static_cast<Eigen::Index>(cfg.bounds.size());
    ExtrapolationGrid grid;
    grid.strategy = cfg.strategy;

    if (cfg.layout == GridLayout::halton) {
        for (std::size_t i = 0; i < cfg.N; ++i) {
            const Vector u = halton_point(cfg.seed + i + 1, dim);
            Vector p(dim);
            for (Eigen::Index k = 0; k < dim; ++k) {
                const auto& [lo, hi] = cfg.bounds[static_cast<std::size_t>(k)];
                p(k) = lo + (hi - lo) * u(k);
            }
            grid.points.push_back(std::move(p));
        }
        return grid;
    }

    // Lattice: N must be a perfect power of the dimension.
    const auto per_axis = static_cast<std::size_t>(
        std::llround(std::pow(static_cast<double>(cfg.N), 1.0 / static_cast<double>(dim))));
    std::size_t total = 1;
    for (Eigen::Index k = 0; k < dim; ++k) {
        total *= per_axis;
    }
    if (total != cfg.N) {
        throw ConfigError("lattice grid needs N = k^" + std::to_string(dim) + " points, got "
                          + std::to_string(cfg.N));
    }
    std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
    for (std::size_t count = 0; count < total; ++count) {
        Vector p(dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            const auto& [lo, hi] = cfg.bounds[static_cast<std::size_t>(k)];
            const std::size_t i = idx[static_cast<std::size_t>(k)];
            p(k) = per_axis == 1 ? 0.5 * (lo + hi)
                                 : lo + (hi - lo) * static_cast<double>(i)
                                            / static_cast<double>(per_axis - 1);
        }
        grid.points.push_back(std::move(p));
        // Last coordinate varies fastest.
        for (Eigen::Index k = dim - 1; k >= 0; --k) {
            auto& i = idx[static_cast<std::size_t>(k)];
            if (++i < per_axis) {
                break;
            }
            i = 0;
        }
    }
    return grid;
}

/// Evaluates the Bellman error at the state and every grid point, in grid order.
inline GridEvals evaluate_grid(const Controller& ctrl, const ExtrapolationGrid& grid,
                               const ConcatState& zeta, const Matrix& theta_hat,
                               const CriticState& critic, const ActorState& actor)
{
    GridEvals ev;
    const DesiredPoint d = desired_point(ctrl, zeta.x_d);
    ev.at_state = bellman_error(ctrl, d, zeta, theta_hat, critic, actor);
    ev.at_points.reserve(grid.N());
    if (grid.strategy == GridStrategy::tracking) {
        for (const auto& p : grid.points) {
            ev.at_points.push_back(
                bellman_error(ctrl, d, ConcatState(p, zeta.x_d), theta_hat, critic, actor));
        }
    } else {
        for (const auto& p : grid.points) {
            const ConcatState zi = ConcatState::from_zeta(p);
            ev.at_points.push_back(bellman_error(ctrl, zi, theta_hat, critic, actor));
        }
    }
    return ev;
}

/// cbar at the current weights, evaluated over the grid paired with x_d.
inline double cbar(const Controller& ctrl, const ExtrapolationGrid& grid, const Vector& x_d,
                   const Matrix& theta_hat, const CriticState& critic, const ActorState& actor)
{
    std::vector<BellmanEval> evals;
    for (const auto& zi : grid.states(x_d)) {
        evals.push_back(bellman_error(ctrl, zi, theta_hat, critic, actor));
    }
    return cbar(evals);
}

} // namespace adptrack::adp

#endif // ADPTRACK_ADP_HPP
