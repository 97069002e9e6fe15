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
#ifndef ADPTRACK_CORE_HPP
#define ADPTRACK_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace adptrack {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RankDeficient : public Error {
public:
    using Error::Error;
};

class BufferNotReady : public Error {
public:
    using Error::Error;
};

class NonuniformSpacing : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericalDivergence : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class BasisMismatch : public Error {
public:
    using Error::Error;
};

class EmptyTrace : public Error {
public:
    using Error::Error;
};

/// Smallest singular value below which a control-effectiveness matrix is
/// treated as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

namespace linalg {

/// Smallest eigenvalue of a symmetric matrix; 0 for an empty matrix.
inline double min_eigenvalue(const Matrix& sym)
{
    if (sym.size() == 0) {
        return 0.0;
    }
    if (sym.rows() == 1) {
        return sym(0, 0);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
inline double symmetric_norm(const Matrix& sym)
{
    if (sym.size() == 0) {
        return 0.0;
    }
    if (sym.rows() == 1) {
        return std::abs(sym(0, 0));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Spectral norm (largest singular value) of a general matrix.
inline double operator_norm(const Matrix& a)
{
    if (a.size() == 0) {
        return 0.0;
    }
    if (a.rows() == 1 || a.cols() == 1) {
        return a.norm();
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

} // namespace linalg
} // namespace adptrack

#endif // ADPTRACK_CORE_HPP
