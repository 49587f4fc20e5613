// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <string_view>

namespace jslol {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace numkit {

/// Thin SVD g = u * diag(s) * v^T with r = min(rows, cols).
struct SvdResult {
    Matrix u;  // m x r, orthonormal columns
    Vector s;  // nonincreasing, nonnegative
    Matrix v;  // n x r, orthonormal columns
};

/// Throws ValidationError naming `what` if any entry is NaN or Inf.
void require_finite(const Matrix& m, std::string_view what);

/// Thin singular value decomposition.
///
/// Throws ValidationError on non-finite input and ConvergenceError when the
/// Jacobi sweeps do not converge (message carries the matrix size).
SvdResult svd(const Matrix& g);

/// Proximal map of tau * nuclear norm: U diag(max(0, s - tau)) V^T.
Matrix svt(const Matrix& g, double tau);

/// Sum of singular values.
double nuclear_norm(const Matrix& g);

/// Elementwise sign(x) * max(0, |x| - tau).
Matrix soft_threshold(const Matrix& m, double tau);

/// Solves a * x = b for symmetric positive definite a via Cholesky.
/// Throws FactorizationError if a is not SPD.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Columnwise minimiser of 1/2 x^T a x - b^T x subject to 1^T x = 1:
///
///   x = a^-1 b - c (1^T a^-1 b - 1),   c = a^-1 1 / (1^T a^-1 1).
///
/// This is the closed form shared by the X and Y code updates.
Matrix sum_to_one_solve(const Matrix& a, const Matrix& b);

/// Same as sum_to_one_solve but with a precomputed Cholesky factor, for the
/// solvers that reuse one system matrix across column blocks.
class SumToOneSolver {
public:
    explicit SumToOneSolver(const Matrix& a);
    Matrix solve(const Matrix& b) const;
    Eigen::Index size() const { return c_.size(); }

private:
    Eigen::LLT<Matrix> llt_;
    Vector c_;
};

/// Sum-to-one solves for a = f^T f + shift I with a wide factor f, through the
/// Woodbury identity; only the rows(f) x rows(f) matrix shift I + f f^T is
/// factored.
class ShiftedGramSumToOneSolver {
public:
    ShiftedGramSumToOneSolver(const Matrix& f, double shift);
    Matrix solve(const Matrix& b) const;
    Eigen::Index size() const { return c_.size(); }

private:
    Matrix apply_inverse(const Matrix& b) const;

    Matrix f_;
    double shift_;
    Eigen::LLT<Matrix> llt_;
    Vector c_;
};

}  // namespace numkit
}  // namespace jslol
