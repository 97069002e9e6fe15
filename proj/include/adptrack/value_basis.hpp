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
#ifndef ADPTRACK_VALUE_BASIS_HPP
#define ADPTRACK_VALUE_BASIS_HPP

#include "adptrack/core.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adptrack::adp {

enum class BasisKind { error_quadratic, zeta_polynomial, custom };

inline std::string_view to_string(BasisKind k)
{
    switch (k) {
    case BasisKind::error_quadratic:
        return "error_quadratic";
    case BasisKind::zeta_polynomial:
        return "zeta_polynomial";
    case BasisKind::custom:
        return "custom";
    }
    return "custom";
}

/**
 * Value-function basis sigma: R^{2n} -> R^L with analytic Jacobian.
 *
 * Polynomial families are described by an L x 2n exponent table over the
 * concatenated state [e; x_d]. The custom family wraps user callbacks.
 */
class ValueBasis {
public:
    using SigmaFn = std::function<Vector(const Vector&)>;
    using GradFn = std::function<Matrix(const Vector&)>;

    ValueBasis() = default;

    /// All monomials of total degree 2 in e, ordered e1^2, e1 e2, ..., en^2.
    static ValueBasis error_quadratic(Eigen::Index n)
    {
        std::vector<Eigen::VectorXi> rows;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                Eigen::VectorXi ex = Eigen::VectorXi::Zero(2 * n);
                ex(i) += 1;
                ex(j) += 1;
                rows.push_back(ex);
            }
        }
        return from_rows(BasisKind::error_quadratic, n, rows);
    }

    /// Error quadratics multiplied by {1, x_d1^2, ..., x_dn^2}.
    static ValueBasis zeta_polynomial_default(Eigen::Index n)
    {
        const ValueBasis quad = error_quadratic(n);
        std::vector<Eigen::VectorXi> rows;
        for (Eigen::Index k = -1; k < n; ++k) {
            for (Eigen::Index r = 0; r < quad.exponents_.rows(); ++r) {
                Eigen::VectorXi ex = quad.exponents_.row(r).transpose();
                if (k >= 0) {
                    ex(n + k) += 2;
                }
                rows.push_back(ex);
            }
        }
        return from_rows(BasisKind::zeta_polynomial, n, rows);
    }

    static ValueBasis zeta_polynomial(Eigen::Index n, Eigen::MatrixXi exponents)
    {
        if (exponents.cols() != 2 * n || exponents.rows() == 0) {
            throw ConfigError("value basis exponents must have 2n columns and at least one row");
        }
        if (exponents.minCoeff() < 0) {
            throw ConfigError("value basis exponents must be non-negative");
        }
        ValueBasis b;
        b.kind_ = BasisKind::zeta_polynomial;
        b.n_ = n;
        b.exponents_ = std::move(exponents);
        return b;
    }

    static ValueBasis custom(Eigen::Index n, Eigen::Index size, SigmaFn sigma, GradFn grad)
    {
        ValueBasis b;
        b.kind_ = BasisKind::custom;
        b.n_ = n;
        b.custom_size_ = size;
        b.sigma_fn_ = std::move(sigma);
        b.grad_fn_ = std::move(grad);
        return b;
    }

    [[nodiscard]] BasisKind kind() const { return kind_; }
    [[nodiscard]] Eigen::Index n() const { return n_; }
    [[nodiscard]] Eigen::Index size() const
    {
        return kind_ == BasisKind::custom ? custom_size_ : exponents_.rows();
    }
    [[nodiscard]] const Eigen::MatrixXi& exponents() const { return exponents_; }

    [[nodiscard]] Vector sigma(const Vector& zeta) const
    {
        if (kind_ == BasisKind::custom) {
            return sigma_fn_(zeta);
        }
        Vector out(exponents_.rows());
        for (Eigen::Index r = 0; r < exponents_.rows(); ++r) {
            double v = 1.0;
            for (Eigen::Index c = 0; c < exponents_.cols(); ++c) {
                v *= ipow(zeta(c), exponents_(r, c));
            }
            out(r) = v;
        }
        return out;
    }

    /// L x 2n Jacobian.
    [[nodiscard]] Matrix grad(const Vector& zeta) const
    {
        if (kind_ == BasisKind::custom) {
            return grad_fn_(zeta);
        }
        const Eigen::Index cols = exponents_.cols();
        Matrix out = Matrix::Zero(exponents_.rows(), cols);
        for (Eigen::Index r = 0; r < exponents_.rows(); ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                const int k = exponents_(r, c);
                if (k == 0) {
                    continue;
                }
                double v = k * ipow(zeta(c), k - 1);
                for (Eigen::Index o = 0; o < cols; ++o) {
                    if (o != c) {
                        v *= ipow(zeta(o), exponents_(r, o));
                    }
                }
                out(r, c) = v;
            }
        }
        return out;
    }

private:
    static double ipow(double x, int k)
    {
        double v = 1.0;
        for (int i = 0; i < k; ++i) {
            v *= x;
        }
        return v;
    }

    static ValueBasis from_rows(BasisKind kind, Eigen::Index n,
                                const std::vector<Eigen::VectorXi>& rows)
    {
        ValueBasis b;
        b.kind_ = kind;
        b.n_ = n;
        b.exponents_.resize(static_cast<Eigen::Index>(rows.size()), 2 * n);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            b.exponents_.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
        }
        return b;
    }

    BasisKind kind_ = BasisKind::error_quadratic;
    Eigen::Index n_ = 0;
    Eigen::MatrixXi exponents_;
    Eigen::Index custom_size_ = 0;
    SigmaFn sigma_fn_;
    GradFn grad_fn_;
};

} // namespace adptrack::adp

#endif // ADPTRACK_VALUE_BASIS_HPP
