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
#ifndef ADPTRACK_SIM_HPP
#define ADPTRACK_SIM_HPP

#include "adptrack/adp.hpp"
#include "adptrack/integrator.hpp"
#include "adptrack/model.hpp"
#include "adptrack/oracle.hpp"
#include "adptrack/sysid.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace adptrack::sim {

struct IdentifierSettings {
    double k = 10.0;
    double k_theta = 1.0;
    Vector gamma_theta;
    std::size_t M = 10;
    std::size_t window = 3;
    std::size_t record_stride = 1;
    double excitation_threshold = 0.1;
    double d_bar = 0.0;
    Matrix theta0;
};

struct AdpSettings {
    adp::AdpGains gains;
    adp::GridConfig grid;
    Vector W_c0;
    Vector W_a0;
    double gamma0 = 1.0;
};

/// A fully specified closed-loop experiment.
struct Scenario {
    std::string name;
    TrackingProblem problem;
    Vector x0;
    sysid::IdentifierBasis identifier_basis;
    IdentifierSettings identifier;
    adp::ValueBasis basis;
    AdpSettings adp;
    double T = 10.0;
    double dt = 0.001;
    std::optional<oracle::LqSpec> lq;

    [[nodiscard]] adp::Controller controller() const
    {
        return {problem.known(), identifier_basis, basis, adp.gains};
    }
};

/// Closed-loop state and its flat packing
/// Z = [x; x_hat; x_d; vec(theta_hat); W_c; W_a; vec(Gamma)], column-major blocks.
struct ClosedLoopState {
    Vector x;
    Vector x_hat;
    Vector x_d;
    Matrix theta_hat;
    Vector W_c;
    Vector W_a;
    Matrix Gamma;
};

struct Layout {
    Eigen::Index n = 0;
    Eigen::Index p1 = 0;
    Eigen::Index L = 0;

    [[nodiscard]] Eigen::Index size() const { return 3 * n + n * p1 + 2 * L + L * L; }
};

inline Vector pack(const ClosedLoopState& s)
{
    const Eigen::Index n = s.x.size();
    const Eigen::Index nt = s.theta_hat.size();
    const Eigen::Index L = s.W_c.size();
    Vector z(3 * n + nt + 2 * L + L * L);
    Eigen::Index o = 0;
    z.segment(o, n) = s.x;
    o += n;
    z.segment(o, n) = s.x_hat;
    o += n;
    z.segment(o, n) = s.x_d;
    o += n;
    z.segment(o, nt) = Eigen::Map<const Vector>(s.theta_hat.data(), nt);
    o += nt;
    z.segment(o, L) = s.W_c;
    o += L;
    z.segment(o, L) = s.W_a;
    o += L;
    z.segment(o, L * L) = Eigen::Map<const Vector>(s.Gamma.data(), L * L);
    return z;
}

inline ClosedLoopState unpack(const Vector& z, const Layout& lay)
{
    if (z.size() != lay.size()) {
        throw Error("unpack: flat state has wrong size");
    }
    const Eigen::Index n = lay.n;
    const Eigen::Index nt = n * lay.p1;
    const Eigen::Index L = lay.L;
    ClosedLoopState s;
    Eigen::Index o = 0;
    s.x = z.segment(o, n);
    o += n;
    s.x_hat = z.segment(o, n);
    o += n;
    s.x_d = z.segment(o, n);
    o += n;
    s.theta_hat = Eigen::Map<const Matrix>(z.data() + o, lay.p1, n);
    o += nt;
    s.W_c = z.segment(o, L);
    o += L;
    s.W_a = z.segment(o, L);
    o += L;
    s.Gamma = Eigen::Map<const Matrix>(z.data() + o, L, L);
    return s;
}

struct TraceRow {
    double t = 0.0;
    Vector e;
    Vector x;
    Vector x_d;
    Vector u;
    Vector mu_hat;
    Vector W_c;
    Vector W_a;
    Matrix theta_hat;
    double delta_t = 0.0;
    double mean_abs_delta_i = 0.0;
    double excitation_level = 0.0;
    double cbar = 0.0;
    double gamma_norm = 0.0;
    double gamma_min_eig = 0.0;
    double V0 = 0.0;
    double e_norm = 0.0;
    std::optional<double> theta_tilde_norm;
};

struct Trace {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    Eigen::Index L = 0;
    Eigen::Index p1 = 0;
    double dt = 0.0;
    double excitation_threshold = 0.0;
    double Gamma_bar = 0.0;
    std::vector<TraceRow> rows;
    bool diverged = false;
    std::string error;
    /// Largest ||xdot_bar - xdot|| among recorded stack candidates.
    double derivative_error_max = 0.0;
    /// Largest increase of V0 over a single step (<= 0 means nonincreasing).
    double V0_max_step_increase = -std::numeric_limits<double>::infinity();
    std::vector<sysid::HistoryEntry> final_stack;
};

/**
 * Fixed-step closed-loop simulation. The history stack and the derivative
 * buffer change only between steps, never inside the Runge-Kutta stages.
 */
class Simulation {
public:
    explicit Simulation(Scenario scenario)
        : sc_(std::move(scenario)), ctrl_(sc_.controller()),
          grid_(adp::make_grid(sc_.adp.grid)),
          stack_(sc_.identifier.M, sc_.identifier_basis.dim(), sc_.problem.plant.n,
                 sc_.identifier.d_bar),
          buffer_(sc_.identifier.window)
    {
        const auto n = static_cast<Eigen::Index>(sc_.problem.plant.n);
        lay_ = {n, sc_.identifier_basis.dim(), sc_.basis.size()};
        if (sc_.identifier_basis.n() != n) {
            throw ConfigError("identifier basis does not match the state dimension");
        }
        if (sc_.basis.n() != n) {
            throw ConfigError("value basis does not match the state dimension");
        }
        if (!(sc_.dt > 0.0)) {
            throw ConfigError("dt must be positive");
        }
        if (!(sc_.T > 0.0)) {
            throw ConfigError("T must be positive");
        }
        ClosedLoopState s;
        s.x = sc_.x0;
        s.x_hat = sc_.x0;
        s.x_d = sc_.problem.desired.x_d0;
        s.theta_hat = sc_.identifier.theta0.size() > 0
                          ? sc_.identifier.theta0
                          : Matrix::Zero(lay_.p1, n);
        s.W_c = sc_.adp.W_c0;
        s.W_a = sc_.adp.W_a0;
        s.Gamma = sc_.adp.gamma0 * Matrix::Identity(lay_.L, lay_.L);
        if (s.x.size() != n || s.x_d.size() != n || s.theta_hat.rows() != lay_.p1
            || s.theta_hat.cols() != n || s.W_c.size() != lay_.L || s.W_a.size() != lay_.L) {
            throw ConfigError("initial state dimensions are inconsistent");
        }
        z_ = pack(s);
        buffer_.push(t_, s.x, control_at(s));
    }

    [[nodiscard]] const Scenario& scenario() const { return sc_; }
    [[nodiscard]] const adp::Controller& controller() const { return ctrl_; }
    [[nodiscard]] const adp::ExtrapolationGrid& grid() const { return grid_; }
    [[nodiscard]] const sysid::HistoryStack& stack() const { return stack_; }
    [[nodiscard]] const Layout& layout() const { return lay_; }
    [[nodiscard]] double time() const { return t_; }
    [[nodiscard]] const Vector& flat_state() const { return z_; }
    [[nodiscard]] ClosedLoopState state() const { return unpack(z_, lay_); }
    [[nodiscard]] std::size_t steps() const { return steps_; }

    void set_state(const ClosedLoopState& s) { z_ = pack(s); }
    sysid::HistoryStack& mutable_stack() { return stack_; }

    /// Applied control u = mu_hat + u_d estimate at a closed-loop state.
    [[nodiscard]] Vector control_at(const ClosedLoopState& s) const
    {
        const ConcatState zeta = ConcatState::from_plant(s.x, s.x_d);
        adp::ActorState actor{s.W_a};
        return adp::applied_control(ctrl_, zeta, actor, s.theta_hat);
    }

    /// Time derivative of the packed closed-loop state, stack held fixed.
    [[nodiscard]] Vector rhs(double /*t*/, const Vector& z) const
    {
        const ClosedLoopState s = unpack(z, lay_);
        const ConcatState zeta = ConcatState::from_plant(s.x, s.x_d);
        const adp::CriticState critic{s.W_c, s.Gamma};
        const adp::ActorState actor{s.W_a};
        const auto& plant = sc_.problem.plant;

        const adp::GridEvals ev =
            adp::evaluate_grid(ctrl_, grid_, zeta, s.theta_hat, critic, actor);
        const adp::DesiredPoint d = adp::desired_point(ctrl_, s.x_d);
        const Vector u = ev.at_state.mu_hat + adp::desired_input_estimate(d, s.theta_hat);

        const Matrix g_x = plant.g(s.x);
        sysid::IdentifierState id{s.x_hat, s.theta_hat, sc_.identifier.k,
                                  sc_.identifier.k_theta, sc_.identifier.gamma_theta};

        ClosedLoopState ds;
        ds.x = plant.f(s.x) + g_x * u;
        ds.x_hat = s.theta_hat.transpose() * ctrl_.identifier_basis.sigma_f(s.x) + g_x * u
                   + sc_.identifier.k * (s.x - s.x_hat);
        ds.x_d = d.h_d;
        ds.theta_hat = sysid::theta_dot(ctrl_.identifier_basis, id, s.x, s.x_hat, stack_);
        ds.W_c = adp::critic_dot(critic, ctrl_.gains, ev);
        ds.W_a = adp::actor_dot(actor, critic, ctrl_.gains, ev);
        ds.Gamma = adp::gamma_dot(s.Gamma, ctrl_.gains, ev.at_state.omega, ev.at_state.rho);
        Vector out = pack(ds);
        if (!out.allFinite()) {
            throw NumericalDivergence("closed-loop derivative is not finite at t = "
                                      + std::to_string(t_));
        }
        return out;
    }

    /// One RK4 step followed by the discrete events (Gamma symmetrization and
    /// saturation, derivative buffer push, stack recording).
    void step(double dt)
    {
        if (!(dt > 0.0)) {
            throw ConfigError("step: dt must be positive");
        }
        Vector next = rk4_step([this](double t, const Vector& z) { return rhs(t, z); }, t_, z_, dt);
        ClosedLoopState s = unpack(next, lay_);
        s.Gamma = 0.5 * (s.Gamma + s.Gamma.transpose());
        const double gn = linalg::symmetric_norm(s.Gamma);
        if (gn > ctrl_.gains.Gamma_bar) {
            s.Gamma *= ctrl_.gains.Gamma_bar / gn;
        }
        next = pack(s);
        if (!next.allFinite() || next.norm() > 1e9) {
            throw NumericalDivergence("closed-loop state diverged at t = " + std::to_string(t_ + dt));
        }
        z_ = std::move(next);
        ++steps_;
        t_ = t0_ + static_cast<double>(steps_) * dt;

        buffer_.push(t_, s.x, control_at(s));
        if (buffer_.ready() && steps_ % sc_.identifier.record_stride == 0) {
            const bool changed = sysid::record_experience(stack_, buffer_, ctrl_.identifier_basis,
                                                          ctrl_.known.g);
            if (changed) {
                const auto& c = buffer_.center();
                const auto& plant = sc_.problem.plant;
                const Vector xdot = plant.f(c.x) + plant.g(c.x) * c.u;
                derivative_error_max_ = std::max(
                    derivative_error_max_, (sysid::numeric_derivative(buffer_) - xdot).norm());
            }
        }
    }

    [[nodiscard]] double derivative_error_max() const { return derivative_error_max_; }

    /// Diagnostics row at the current state.
    [[nodiscard]] TraceRow observe() const
    {
        const ClosedLoopState s = state();
        const ConcatState zeta = ConcatState::from_plant(s.x, s.x_d);
        const adp::CriticState critic{s.W_c, s.Gamma};
        const adp::ActorState actor{s.W_a};
        const adp::GridEvals ev =
            adp::evaluate_grid(ctrl_, grid_, zeta, s.theta_hat, critic, actor);
        const adp::DesiredPoint d = adp::desired_point(ctrl_, s.x_d);

        TraceRow r;
        r.t = t_;
        r.e = zeta.e;
        r.x = s.x;
        r.x_d = s.x_d;
        r.mu_hat = ev.at_state.mu_hat;
        r.u = r.mu_hat + adp::desired_input_estimate(d, s.theta_hat);
        r.W_c = s.W_c;
        r.W_a = s.W_a;
        r.theta_hat = s.theta_hat;
        r.delta_t = ev.at_state.delta;
        double acc = 0.0;
        for (const auto& p : ev.at_points) {
            acc += std::abs(p.delta);
        }
        r.mean_abs_delta_i = ev.at_points.empty() ? 0.0 : acc / static_cast<double>(ev.at_points.size());
        r.excitation_level = stack_.excitation_level();
        r.cbar = adp::cbar(ev.at_points);
        r.gamma_norm = linalg::symmetric_norm(s.Gamma);
        r.gamma_min_eig = linalg::min_eigenvalue(s.Gamma);
        const Vector x_tilde = s.x - s.x_hat;
        r.V0 = 0.5 * x_tilde.squaredNorm();
        if (const auto& theta = sc_.problem.plant.true_theta) {
            const Matrix tt = *theta - s.theta_hat;
            const Vector inv_gamma = sc_.identifier.gamma_theta.cwiseInverse();
            r.V0 += 0.5 * (tt.transpose() * inv_gamma.asDiagonal() * tt).trace();
            r.theta_tilde_norm = tt.norm();
        }
        r.e_norm = zeta.e.norm();
        return r;
    }

    /// Runs for floor(T/dt) steps, returning floor(T/dt) + 1 rows. On
    /// divergence the trace keeps every valid row and records the error.
    Trace run(double T, double dt)
    {
        if (!(T > 0.0) || !(dt > 0.0)) {
            throw ConfigError("run: T and dt must be positive");
        }
        const auto steps = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
        Trace tr;
        tr.n = lay_.n;
        tr.m = sc_.problem.plant.m;
        tr.L = lay_.L;
        tr.p1 = lay_.p1;
        tr.dt = dt;
        tr.excitation_threshold = sc_.identifier.excitation_threshold;
        tr.Gamma_bar = ctrl_.gains.Gamma_bar;
        tr.rows.reserve(steps + 1);
        try {
            tr.rows.push_back(observe());
            for (std::size_t k = 0; k < steps; ++k) {
                step(dt);
                tr.rows.push_back(observe());
                const double inc = tr.rows.back().V0 - tr.rows[tr.rows.size() - 2].V0;
                tr.V0_max_step_increase = std::max(tr.V0_max_step_increase, inc);
            }
        } catch (const NumericalDivergence& ex) {
            tr.diverged = true;
            tr.error = ex.what();
        }
        tr.derivative_error_max = derivative_error_max_;
        tr.final_stack = stack_.entries();
        return tr;
    }

    Trace run() { return run(sc_.T, sc_.dt); }

private:
    Scenario sc_;
    adp::Controller ctrl_;
    adp::ExtrapolationGrid grid_;
    sysid::HistoryStack stack_;
    sysid::DerivativeBuffer buffer_;
    Layout lay_;
    Vector z_;
    double t0_ = 0.0;
    double t_ = 0.0;
    std::size_t steps_ = 0;
    double derivative_error_max_ = 0.0;
};

/// Summary statistics of a trace.
struct Metrics {
    std::size_t rows = 0;
    bool diverged = false;
    double tail_rms_e = 0.0;
    std::optional<double> terminal_theta_tilde;
    std::optional<double> terminal_Wc_error;
    std::optional<double> terminal_Wa_error;
    double max_gamma_norm = 0.0;
    double min_gamma_eig = 0.0;
    double min_cbar = 0.0;
    /// Running minimum of cbar once the stack first reached the excitation threshold.
    std::optional<double> min_cbar_after_excitation;
    std::optional<double> excitation_time;
    double final_excitation_level = 0.0;
    double max_abs_delta_tail = 0.0;
    /// First time ||theta_tilde||_F <= 1e-3 after which it stays below it.
    std::optional<double> theta_converged_time;
    double V0_max_step_increase = 0.0;
    double derivative_error_max = 0.0;
};

/// Tail window is the last 20% of the rows (at least one row).
inline Metrics metrics(const Trace& tr, const std::optional<Vector>& W_ideal = std::nullopt)
{
    if (tr.rows.empty()) {
        throw EmptyTrace("metrics: trace has no rows");
    }
    Metrics mt;
    const std::size_t N = tr.rows.size();
    mt.rows = N;
    mt.diverged = tr.diverged;
    const std::size_t tail = std::max<std::size_t>(1, N / 5);
    const std::size_t first_tail = N - tail;
    double ss = 0.0;
    double max_delta = 0.0;
    for (std::size_t i = first_tail; i < N; ++i) {
        ss += tr.rows[i].e_norm * tr.rows[i].e_norm;
        max_delta = std::max(max_delta, std::abs(tr.rows[i].delta_t));
    }
    mt.tail_rms_e = std::sqrt(ss / static_cast<double>(tail));
    mt.max_abs_delta_tail = max_delta;

    const TraceRow& last = tr.rows.back();
    mt.terminal_theta_tilde = last.theta_tilde_norm;
    if (W_ideal) {
        mt.terminal_Wc_error = (last.W_c - *W_ideal).norm();
        mt.terminal_Wa_error = (last.W_a - *W_ideal).norm();
    }
    mt.max_gamma_norm = 0.0;
    mt.min_gamma_eig = std::numeric_limits<double>::infinity();
    mt.min_cbar = std::numeric_limits<double>::infinity();
    for (const auto& r : tr.rows) {
        mt.max_gamma_norm = std::max(mt.max_gamma_norm, r.gamma_norm);
        mt.min_gamma_eig = std::min(mt.min_gamma_eig, r.gamma_min_eig);
        mt.min_cbar = std::min(mt.min_cbar, r.cbar);
        if (!mt.excitation_time && r.excitation_level >= tr.excitation_threshold) {
            mt.excitation_time = r.t;
        }
        if (mt.excitation_time) {
            mt.min_cbar_after_excitation =
                std::min(mt.min_cbar_after_excitation.value_or(r.cbar), r.cbar);
        }
    }
    mt.final_excitation_level = last.excitation_level;
    if (last.theta_tilde_norm) {
        std::optional<double> since;
        for (const auto& r : tr.rows) {
            if (r.theta_tilde_norm && *r.theta_tilde_norm <= 1e-3) {
                if (!since) {
                    since = r.t;
                }
            } else {
                since.reset();
            }
        }
        mt.theta_converged_time = since;
    }
    mt.V0_max_step_increase = N > 1 ? tr.V0_max_step_increase : 0.0;
    mt.derivative_error_max = tr.derivative_error_max;
    return mt;
}

} // namespace adptrack::sim

#endif // ADPTRACK_SIM_HPP
