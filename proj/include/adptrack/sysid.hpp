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
#ifndef ADPTRACK_SYSID_HPP
#define ADPTRACK_SYSID_HPP

// Concurrent-learning identifier for the drift dynamics.

#include "adptrack/model.hpp"

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace adptrack::sysid {

enum class Activation { identity, tanh, gaussian };

inline Activation parse_activation(std::string_view name)
{
    if (name == "identity") {
        return Activation::identity;
    }
    if (name == "tanh") {
        return Activation::tanh;
    }
    if (name == "gaussian") {
        return Activation::gaussian;
    }
    throw ConfigError("unknown activation `" + std::string(name) + "`");
}

inline std::string_view to_string(Activation a)
{
    switch (a) {
    case Activation::identity:
        return "identity";
    case Activation::tanh:
        return "tanh";
    case Activation::gaussian:
        return "gaussian";
    }
    return "identity";
}

/// Uniform draw in [lo, hi) from the top 53 bits of a 64-bit Mersenne twister,
/// so the sequence does not depend on the standard library's distributions.
inline double uniform_from(std::mt19937_64& rng, double lo, double hi)
{
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
}

/**
 * Single-hidden-layer basis sigma_f(Y' [1; x]).
 *
 * The output optionally starts with a constant bias 1, giving p + 1
 * components. Y is fixed for the lifetime of the identifier.
 */
struct IdentifierBasis {
    int p = 0;
    Matrix Y; // (n+1) x p
    Activation activation = Activation::identity;
    bool bias = true;

    [[nodiscard]] int dim() const { return p + (bias ? 1 : 0); }
    [[nodiscard]] Eigen::Index n() const { return Y.rows() - 1; }

    [[nodiscard]] Vector sigma_f(const Vector& x) const
    {
        const Vector z = Y.transpose().col(0) + Y.bottomRows(Y.rows() - 1).transpose() * x;
        Vector out(dim());
        const int offset = bias ? 1 : 0;
        if (bias) {
            out(0) = 1.0;
        }
        for (int i = 0; i < p; ++i) {
            switch (activation) {
            case Activation::identity:
                out(offset + i) = z(i);
                break;
            case Activation::tanh:
                out(offset + i) = std::tanh(z(i));
                break;
            case Activation::gaussian:
                out(offset + i) = std::exp(-z(i) * z(i));
                break;
            }
        }
        return out;
    }

    /// Identity activation with Y selecting x, so sigma_f(x) = [1; x] (or x).
    static IdentifierBasis pass_through(Eigen::Index n, bool with_bias)
    {
        IdentifierBasis b;
        b.p = static_cast<int>(n);
        b.Y = Matrix::Zero(n + 1, n);
        b.Y.bottomRows(n) = Matrix::Identity(n, n);
        b.activation = Activation::identity;
        b.bias = with_bias;
        return b;
    }

    /// Y drawn uniformly from [-1, 1] with a fixed seed.
    static IdentifierBasis random(Eigen::Index n, int neurons, Activation act, std::uint64_t seed,
                                  bool with_bias)
    {
        IdentifierBasis b;
        b.p = neurons;
        b.Y.resize(n + 1, neurons);
        std::mt19937_64 rng(seed);
        for (Eigen::Index j = 0; j < b.Y.cols(); ++j) {
            for (Eigen::Index i = 0; i < b.Y.rows(); ++i) {
                b.Y(i, j) = uniform_from(rng, -1.0, 1.0);
            }
        }
        b.activation = act;
        b.bias = with_bias;
        return b;
    }
};

/// sigma_theta(zeta) = sigma_f evaluated at the plant state e + x_d.
inline Vector sigma_theta(const IdentifierBasis& basis, const ConcatState& zeta)
{
    return basis.sigma_f(zeta.x());
}

struct IdentifierState {
    Vector x_hat;
    Matrix theta_hat; // (p+1) x n
    double k = 1.0;
    double k_theta = 1.0;
    Vector gamma_theta; // diagonal of Gamma_theta
};

/// xhat_dot = theta_hat' sigma_theta(zeta) + g(x) u + k (x - xhat).
inline Vector identifier_xdot(const KnownDynamics& known, const IdentifierBasis& basis,
                              const IdentifierState& state, const Vector& x, const ConcatState& zeta,
                              const Vector& u)
{
    return state.theta_hat.transpose() * sigma_theta(basis, zeta) + known.g(x) * u
           + state.k * (x - state.x_hat);
}

struct HistoryEntry {
    Vector x;
    Vector u;
    Vector xdot_bar;
    Vector sigma_f;
    Vector gu; // g(x_j) u_j
};

/**
 * Recorded (x_j, u_j, xdot_bar_j) triples. The Gram matrix sum sigma_j sigma_j'
 * and the cross term sum sigma_j (xdot_bar_j - g_j u_j)' are cached.
 */
class HistoryStack {
public:
    HistoryStack() = default;
    HistoryStack(std::size_t capacity, int basis_dim, Eigen::Index n, double d_bar = 0.0)
        : capacity_(capacity), d_bar_(d_bar), gram_(Matrix::Zero(basis_dim, basis_dim)),
          cross_(Matrix::Zero(basis_dim, n))
    {
        if (capacity == 0) {
            throw ConfigError("history stack capacity must be positive");
        }
    }

    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] bool full() const { return entries_.size() >= capacity_; }
    [[nodiscard]] double d_bar() const { return d_bar_; }
    [[nodiscard]] const std::vector<HistoryEntry>& entries() const { return entries_; }
    [[nodiscard]] const Matrix& gram() const { return gram_; }
    [[nodiscard]] const Matrix& cross() const { return cross_; }

    /// lambda_min(sum sigma_fj sigma_fj'); 0 for an empty stack.
    [[nodiscard]] double excitation_level() const
    {
        if (entries_.empty()) {
            return 0.0;
        }
        return std::max(0.0, linalg::min_eigenvalue(gram_));
    }

    void push(HistoryEntry entry)
    {
        if (full()) {
            throw Error("history stack is full");
        }
        entries_.push_back(std::move(entry));
        rebuild();
    }

    void replace(std::size_t j, HistoryEntry entry)
    {
        entries_.at(j) = std::move(entry);
        rebuild();
    }

private:
    void rebuild()
    {
        gram_.setZero();
        cross_.setZero();
        for (const auto& en : entries_) {
            gram_.noalias() += en.sigma_f * en.sigma_f.transpose();
            cross_.noalias() += en.sigma_f * (en.xdot_bar - en.gu).transpose();
        }
    }

    std::size_t capacity_ = 1;
    double d_bar_ = 0.0;
    std::vector<HistoryEntry> entries_;
    Matrix gram_;
    Matrix cross_;
};

/// excitation_level as a free function for symmetry with the other operations.
inline double excitation_level(const HistoryStack& stack)
{
    return stack.excitation_level();
}

/**
 * theta_hat_dot = Gamma_theta sigma_f(x) xtilde'
 *               + k_theta Gamma_theta sum_j sigma_fj (xdot_bar_j - g_j u_j - theta_hat' sigma_fj)'.
 */
inline Matrix theta_dot(const IdentifierBasis& basis, const IdentifierState& state, const Vector& x,
                        const Vector& x_hat, const HistoryStack& stack)
{
    const Vector x_tilde = x - x_hat;
    Matrix out = basis.sigma_f(x) * x_tilde.transpose();
    if (stack.size() > 0) {
        out += state.k_theta * (stack.cross() - stack.gram() * state.theta_hat);
    }
    return state.gamma_theta.asDiagonal() * out;
}

struct Sample {
    double t = 0.0;
    Vector x;
    Vector u;
};

/// Fixed-length window of the most recent (t, x, u) samples; w is odd.
class DerivativeBuffer {
public:
    explicit DerivativeBuffer(std::size_t window = 3) : window_(window)
    {
        if (window < 3 || window % 2 == 0) {
            throw ConfigError("derivative window must be odd and at least 3");
        }
    }

    void push(double t, Vector x, Vector u = {})
    {
        if (!samples_.empty() && !(t > samples_.back().t)) {
            throw NonuniformSpacing("derivative buffer timestamps must increase strictly");
        }
        samples_.push_back({t, std::move(x), std::move(u)});
        if (samples_.size() > window_) {
            samples_.pop_front();
        }
    }

    void clear() { samples_.clear(); }

    [[nodiscard]] bool ready() const { return samples_.size() == window_; }
    [[nodiscard]] std::size_t window() const { return window_; }
    [[nodiscard]] std::size_t size() const { return samples_.size(); }
    [[nodiscard]] const Sample& at(std::size_t i) const { return samples_.at(i); }
    [[nodiscard]] const Sample& center() const
    {
        if (!ready()) {
            throw BufferNotReady("derivative buffer holds " + std::to_string(samples_.size())
                                 + " of " + std::to_string(window_) + " samples");
        }
        return samples_[window_ / 2];
    }

private:
    std::size_t window_;
    std::deque<Sample> samples_;
};

/// Central-difference weights for the first derivative at the middle of w
/// unit-spaced nodes; exact for polynomials of degree < w.
inline Vector central_difference_weights(std::size_t window)
{
    const auto w = static_cast<Eigen::Index>(window);
    const double half = static_cast<double>(w / 2);
    Matrix vander(w, w);
    for (Eigen::Index row = 0; row < w; ++row) {
        for (Eigen::Index col = 0; col < w; ++col) {
            vander(row, col) = std::pow(static_cast<double>(col) - half, static_cast<double>(row));
        }
    }
    Vector rhs = Vector::Zero(w);
    rhs(1) = 1.0;
    return vander.fullPivLu().solve(rhs);
}

inline Vector numeric_derivative(const DerivativeBuffer& buffer)
{
    if (!buffer.ready()) {
        throw BufferNotReady("numeric_derivative needs " + std::to_string(buffer.window())
                             + " samples, have " + std::to_string(buffer.size()));
    }
    const std::size_t w = buffer.window();
    const double t0 = buffer.at(0).t;
    const double dt = (buffer.at(w - 1).t - t0) / static_cast<double>(w - 1);
    for (std::size_t i = 1; i + 1 < w; ++i) {
        if (std::abs(buffer.at(i).t - (t0 + static_cast<double>(i) * dt)) > 1e-9) {
            throw NonuniformSpacing("derivative buffer samples are not uniformly spaced");
        }
    }
    Vector weights;
    if (w == 3) {
        weights = Eigen::Vector3d(-0.5, 0.0, 0.5);
    } else {
        weights = central_difference_weights(w);
    }
    Vector out = Vector::Zero(buffer.at(0).x.size());
    for (std::size_t i = 0; i < w; ++i) {
        out += weights(static_cast<Eigen::Index>(i)) * buffer.at(i).x;
    }
    return out / dt;
}

/**
 * Offers the buffer's central sample to the stack.
 *
 * Accepted unconditionally while the stack has room. Once full, the
 * candidate replaces the entry whose removal maximizes the new excitation
 * level, but only if that strictly beats the current level. Returns true
 * when the stack changed.
 */
inline bool record_experience(HistoryStack& stack, const DerivativeBuffer& buffer,
                              const IdentifierBasis& basis, const MatrixField& g)
{
    const Sample& c = buffer.center();
    HistoryEntry cand;
    cand.x = c.x;
    cand.u = c.u;
    cand.xdot_bar = numeric_derivative(buffer);
    cand.sigma_f = basis.sigma_f(c.x);
    cand.gu = c.u.size() > 0 ? Vector(g(c.x) * c.u) : Vector::Zero(c.x.size());

    if (!stack.full()) {
        stack.push(std::move(cand));
        return true;
    }

    const double current = stack.excitation_level();
    const Matrix base = stack.gram() + cand.sigma_f * cand.sigma_f.transpose();
    double best = current + 1e-12 * std::max(1.0, std::abs(current));
    std::size_t best_j = stack.size();
    for (std::size_t j = 0; j < stack.size(); ++j) {
        const Vector& s = stack.entries()[j].sigma_f;
        const double level = linalg::min_eigenvalue(base - s * s.transpose());
        if (level > best) {
            best = level;
            best_j = j;
        }
    }
    if (best_j == stack.size()) {
        return false;
    }
    stack.replace(best_j, std::move(cand));
    return true;
}

} // namespace adptrack::sysid

#endif // ADPTRACK_SYSID_HPP
