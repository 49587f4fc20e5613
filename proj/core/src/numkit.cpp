// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "jslol/numkit.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "jslol/errors.hpp"

namespace jslol::numkit {

namespace {

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_square(const Matrix& a, std::string_view what) {
    if (a.rows() != a.cols()) {
        throw ValidationError(std::string(what) + ": expected a square matrix, got " + shape(a));
    }
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite()) {
        throw ValidationError(std::string(what) + ": matrix " + shape(m) +
                              " contains non-finite values");
    }
}

SvdResult svd(const Matrix& g) {
    require_finite(g, "svd");
    const Eigen::Index r = std::min(g.rows(), g.cols());
    if (r == 0) {
        return {Matrix(g.rows(), 0), Vector(0), Matrix(g.cols(), 0)};
    }
    Eigen::BDCSVD<Matrix> dec(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success || !dec.singularValues().allFinite()) {
        throw ConvergenceError("svd: decomposition of " + shape(g) + " matrix did not converge");
    }
    return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix svt(const Matrix& g, double tau) {
    if (!(tau >= 0.0)) {
        throw ValidationError("svt: threshold must be nonnegative");
    }
    SvdResult d = svd(g);
    Eigen::Index rank = 0;
    while (rank < d.s.size() && d.s(rank) > tau) {
        ++rank;
    }
    if (rank == 0) {
        return Matrix::Zero(g.rows(), g.cols());
    }
    const Vector shrunk = (d.s.head(rank).array() - tau).matrix();
    return d.u.leftCols(rank) * shrunk.asDiagonal() * d.v.leftCols(rank).transpose();
}

double nuclear_norm(const Matrix& g) {
    return svd(g).s.sum();
}

Matrix soft_threshold(const Matrix& m, double tau) {
    if (!(tau >= 0.0)) {
        throw ValidationError("soft_threshold: threshold must be nonnegative");
    }
    return m.unaryExpr([tau](double x) {
        const double mag = std::abs(x) - tau;
        if (mag <= 0.0) {
            return 0.0;
        }
        return x > 0.0 ? mag : -mag;
    });
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
    require_square(a, "solve_spd");
    if (a.rows() != b.rows()) {
        throw ValidationError("solve_spd: right-hand side " + shape(b) +
                              " does not match system " + shape(a));
    }
    if (a.size() > 0 &&
        (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
        throw FactorizationError("solve_spd: matrix " + shape(a) + " is not symmetric");
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw FactorizationError("solve_spd: matrix " + shape(a) + " is not positive definite");
    }
    return llt.solve(b);
}

SumToOneSolver::SumToOneSolver(const Matrix& a) {
    require_square(a, "sum_to_one_solve");
    if (a.rows() == 0) {
        throw ValidationError("sum_to_one_solve: empty system");
    }
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
        throw FactorizationError("sum_to_one_solve: matrix " + shape(a) + " is not symmetric");
    }
    llt_.compute(a);
    if (llt_.info() != Eigen::Success) {
        throw FactorizationError("sum_to_one_solve: matrix " + shape(a) +
                                 " is not positive definite");
    }
    const Vector a_inv_ones = llt_.solve(Vector::Ones(a.rows()));
    c_ = a_inv_ones / a_inv_ones.sum();
}

Matrix SumToOneSolver::solve(const Matrix& b) const {
    if (b.rows() != c_.size()) {
        throw ValidationError("sum_to_one_solve: right-hand side has " + std::to_string(b.rows()) +
                              " rows, expected " + std::to_string(c_.size()));
    }
    Matrix x = llt_.solve(b);
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::RowVectorXd excess = x.colwise().sum().array() - 1.0;
        x.noalias() -= c_ * excess;
    }
    return x;
}

ShiftedGramSumToOneSolver::ShiftedGramSumToOneSolver(const Matrix& f, double shift)
    : f_(f), shift_(shift) {
    require_finite(f, "shifted Gram factor");
    if (f.cols() == 0) {
        throw ValidationError("sum_to_one_solve: empty system");
    }
    if (!(shift > 0.0) || !std::isfinite(shift)) {
        throw FactorizationError("sum_to_one_solve: shift must be positive");
    }
    Matrix inner = f * f.transpose();
    inner = 0.5 * (inner + inner.transpose()).eval();
    inner.diagonal().array() += shift;
    llt_.compute(inner);
    if (llt_.info() != Eigen::Success) {
        throw FactorizationError("sum_to_one_solve: inner matrix " + shape(inner) +
                                 " is not positive definite");
    }
    const Vector a_inv_ones = apply_inverse(Vector::Ones(f.cols()));
    c_ = a_inv_ones / a_inv_ones.sum();
}

Matrix ShiftedGramSumToOneSolver::apply_inverse(const Matrix& b) const {
    Matrix x = b;
    x.noalias() -= f_.transpose() * llt_.solve(f_ * b);
    return x / shift_;
}

Matrix ShiftedGramSumToOneSolver::solve(const Matrix& b) const {
    if (b.rows() != c_.size()) {
        throw ValidationError("sum_to_one_solve: right-hand side has " + std::to_string(b.rows()) +
                              " rows, expected " + std::to_string(c_.size()));
    }
    Matrix x = apply_inverse(b);
    // One refinement step against the full system.
    Matrix r = b - shift_ * x;
    r.noalias() -= f_.transpose() * (f_ * x);
    x += apply_inverse(r);
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::RowVectorXd excess = x.colwise().sum().array() - 1.0;
        x.noalias() -= c_ * excess;
    }
    return x;
}

Matrix sum_to_one_solve(const Matrix& a, const Matrix& b) {
    return SumToOneSolver(a).solve(b);
}

}  // namespace jslol::numkit
