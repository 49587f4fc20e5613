// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include <doctest.h>

#include <cmath>
#include <random>

#include "jslol/baselines.hpp"
#include "jslol/errors.hpp"
#include "oracles.hpp"

using namespace jslol;

namespace {

OverlapSplit toy_split(const Matrix& h_in, const Matrix& m_in, const Matrix& m_out) {
    OverlapSplit s;
    s.h_in = h_in;
    s.m_in = m_in;
    s.m_out = m_out;
    return s;
}

double rmse(const Matrix& a, const Matrix& b) {
    return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("pwc copies the nearest overlap spectrum") {
    std::mt19937_64 rng(31);
    const Matrix h = oracle::random_matrix(8, 30, rng, 0, 1);
    const Matrix m = oracle::random_matrix(3, 30, rng, 0, 1);
    const Matrix q = oracle::random_matrix(3, 25, rng, 0, 1);
    const OverlapSplit s = toy_split(h, m, q);
    const Matrix out = pwc(s);
    const auto nn = oracle::brute_nearest(m, q);
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        CHECK(out.col(j) == h.col(static_cast<Eigen::Index>(nn[static_cast<std::size_t>(j)])));
    }
    CHECK(pwc(s, 3) == out);
}

TEST_CASE("pwc on duplicated pixels is an exact copy and ties go low") {
    Matrix m(2, 5);
    m << 0, 1, 0, 2, 1,
         0, 0, 0, 2, 0;
    Matrix h(3, 5);
    h << 1, 2, 3, 4, 5,
         1, 2, 3, 4, 5,
         1, 2, 3, 4, 5;
    Matrix q(2, 3);
    q << 0, 1, 0.5,
         0, 0, 0;
    const Matrix out = pwc(toy_split(h, m, q));
    CHECK(out(0, 0) == 1);  // pixels 0 and 2 tie
    CHECK(out(0, 1) == 2);  // pixels 1 and 4 tie
    CHECK(out(0, 2) == 1);  // equidistant from 0 and 1
}

TEST_CASE("pwc with a single overlap pixel") {
    const Matrix h = Matrix::Constant(4, 1, 0.3);
    const Matrix m = Matrix::Constant(2, 1, 0.5);
    std::mt19937_64 rng(32);
    const Matrix out = pwc(toy_split(h, m, oracle::random_matrix(2, 6, rng)));
    CHECK((out.array() == 0.3).all());
}

TEST_CASE("regression recovers a planted linear transform") {
    std::mt19937_64 rng(33);
    const Matrix t = oracle::random_matrix(10, 4, rng);
    const Matrix m = oracle::random_matrix(4, 100, rng, 0, 1);
    const Matrix q = oracle::random_matrix(4, 20, rng, 0, 1);
    const OverlapSplit s = toy_split(t * m, m, q);
    const RegressionModel model = fit_regression(s, 0.0);
    CHECK((model.t - t).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((apply_regression(model, q) - oracle::naive_product(t, q)).cwiseAbs().maxCoeff() <= 1e-9);
    const RegressionModel ridge = fit_regression(s);
    CHECK(ridge.ridge == 1e-6);
    CHECK((ridge.t - t).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("regression is the ridge minimiser") {
    std::mt19937_64 rng(34);
    const Matrix h = oracle::random_matrix(6, 40, rng, 0, 1);
    const Matrix m = oracle::random_matrix(3, 40, rng, 0, 1);
    const double lambda = 0.05;
    const OverlapSplit s = toy_split(h, m, Matrix(3, 0));
    const Matrix t = fit_regression(s, lambda).t;
    const auto loss = [&](const Matrix& c) {
        return 0.5 * (h - c * m).squaredNorm() + 0.5 * lambda * c.squaredNorm();
    };
    const Matrix grad = -(h - t * m) * m.transpose() + lambda * t;
    CHECK(grad.cwiseAbs().maxCoeff() <= 1e-10);
    const double base = loss(t);
    for (int i = 0; i < 100; ++i) {
        const Matrix dt = 1e-3 * oracle::random_matrix(6, 3, rng);
        CHECK(loss(t + dt) >= base);
    }
}

TEST_CASE("regression rejects rank-deficient MS data without ridge") {
    Matrix m(2, 4);
    m << 1, 2, 3, 4,
         2, 4, 6, 8;
    const OverlapSplit s = toy_split(Matrix::Ones(3, 4), m, Matrix(2, 0));
    CHECK_THROWS_AS(fit_regression(s, 0.0), FactorizationError);
    CHECK_NOTHROW(fit_regression(s, 1e-3));
    CHECK_THROWS_AS(fit_regression(s, -1.0), ValidationError);
    CHECK_THROWS_AS(apply_regression(fit_regression(s, 1e-3), Matrix(3, 2)), ValidationError);
}

TEST_CASE("ms dictionary baseline with the whole overlap as atoms") {
    std::mt19937_64 rng(35);
    // Three overlap pixels with affinely independent MS spectra; the out
    // pixels are convex mixtures, so the sum-to-one codes are unique.
    const Matrix h = oracle::random_matrix(7, 3, rng, 0, 1);
    const Matrix srf = oracle::random_matrix(4, 7, rng, 0, 1);
    const Matrix m = srf * h;
    const Matrix a = oracle::random_simplex(3, 40, rng);
    const OverlapSplit s = toy_split(h, m, m * a);
    SStepParams p;
    p.eta = 1e-6;
    const MsDictionaryResult r = ms_dictionary_baseline(s, p, 3, 0);
    CHECK(r.codes.rows() == 3);
    CHECK(rmse(r.reconstruction, h * a) <= 1e-3);
    CHECK(oracle::max_column_sum_error(r.codes) <= 1e-8);

    const MsDictionaryResult again = ms_dictionary_baseline(s, p, 3, 0);
    CHECK(again.reconstruction == r.reconstruction);
}

TEST_CASE("ms dictionary baseline budget edge cases") {
    std::mt19937_64 rng(36);
    const Matrix h = oracle::random_matrix(5, 20, rng, 0, 1);
    const Matrix m = oracle::random_matrix(3, 20, rng, 0, 1);
    const OverlapSplit s = toy_split(h, m, oracle::random_matrix(3, 8, rng, 0, 1));
    const MsDictionaryResult one = ms_dictionary_baseline(s, SStepParams{}, 1, 4);
    CHECK(one.codes.rows() == 1);
    for (Eigen::Index j = 1; j < one.reconstruction.cols(); ++j) {
        CHECK((one.reconstruction.col(j) - one.reconstruction.col(0)).norm() <= 1e-9);
    }
    CHECK_THROWS_AS(ms_dictionary_baseline(s, SStepParams{}, 0, 4), ValidationError);
    CHECK_THROWS_AS(ms_dictionary_baseline(s, SStepParams{}, 21, 4), ValidationError);
    const MsDictionaryResult a = ms_dictionary_baseline(s, SStepParams{}, 10, 4);
    const MsDictionaryResult b = ms_dictionary_baseline(s, SStepParams{}, 10, 5);
    CHECK(a.reconstruction == ms_dictionary_baseline(s, SStepParams{}, 10, 4).reconstruction);
    CHECK(a.reconstruction != b.reconstruction);
}
