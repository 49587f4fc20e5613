// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jslol/errors.hpp"
#include "jslol/evalkit.hpp"
#include "oracles.hpp"

using namespace jslol;

TEST_CASE("perfect reconstruction report") {
    std::mt19937_64 rng(41);
    const Matrix ref = oracle::random_matrix(6, 50, rng, 0.1, 1);
    const ReconReport r = recon_metrics(ref, ref);
    CHECK(r.rmse == 0.0);
    CHECK(r.psnr == kPsnrCap);
    CHECK(r.sad == 0.0);
    CHECK(r.ssim == doctest::Approx(1.0));
    REQUIRE(r.ergas.has_value());
    CHECK(*r.ergas == 0.0);
}

TEST_CASE("constant offset on one band") {
    std::mt19937_64 rng(42);
    const Matrix ref = oracle::random_matrix(9, 30, rng, 0.2, 0.8);
    Matrix est = ref;
    est.row(4).array() += 0.1;
    const ReconReport r = recon_metrics(ref, est);
    CHECK(r.rmse == doctest::Approx(0.1 / 3.0));
}

TEST_CASE("metrics agree with loop definitions") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index bands = 2 + trial % 7;
        const Eigen::Index pixels = 5 + 3 * trial;
        const Matrix ref = oracle::random_matrix(bands, pixels, rng, 0.05, 1);
        const Matrix est = ref + 0.05 * oracle::random_matrix(bands, pixels, rng);
        const ReconReport r = recon_metrics(ref, est);
        const oracle::LoopMetrics o = oracle::loop_metrics(ref, est);
        CHECK(std::abs(r.rmse - o.rmse) <= 1e-10);
        CHECK(std::abs(r.psnr - o.psnr) <= 1e-10);
        CHECK(std::abs(r.sad - o.sad) <= 1e-10);
        CHECK(std::abs(r.ssim - o.ssim) <= 1e-10);
        REQUIRE(r.ergas.has_value());
        CHECK(std::abs(*r.ergas - o.ergas) <= 1e-10);
    }
}

TEST_CASE("undefined ERGAS and excluded pixels") {
    Matrix ref(2, 3);
    ref << 0, 0, 0,
           1, 2, 3;
    Matrix est = ref;
    est(1, 1) = 2.5;
    est(0, 2) = 0.1;
    const ReconReport r = recon_metrics(ref, est);
    CHECK_FALSE(r.ergas.has_value());
    CHECK(r.psnr_excluded_bands == 1);

    Matrix z(2, 3);
    z << 0, 1, 1,
         0, 1, 2;
    const ReconReport s = recon_metrics(z, z);
    CHECK(s.sad_excluded_pixels == 1);
    CHECK(s.sad == 0.0);

    CHECK_THROWS_AS(recon_metrics(ref, Matrix(2, 2)), ValidationError);
    Matrix bad = ref;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(recon_metrics(ref, bad), ValidationError);
}

TEST_CASE("spectral angle of orthogonal spectra") {
    Matrix ref(2, 1);
    ref << 1, 0;
    Matrix est(2, 1);
    est << 0, 1;
    CHECK(recon_metrics(ref, est).sad == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("nearest-neighbour classification") {
    std::mt19937_64 rng(44);
    const Matrix train = oracle::random_matrix(5, 40, rng);
    std::vector<int> labels(40);
    for (int i = 0; i < 40; ++i) {
        labels[static_cast<std::size_t>(i)] = i % 4;
    }
    const Matrix test = oracle::random_matrix(5, 30, rng);
    const auto pred = nn_classify(train, labels, test);
    const auto nn = oracle::brute_nearest(train, test);
    for (std::size_t j = 0; j < pred.size(); ++j) {
        CHECK(pred[j] == labels[nn[j]]);
    }
    CHECK(nn_classify(train, labels, train) == labels);

    Matrix tie(1, 2);
    tie << -1, 1;
    Matrix zero = Matrix::Zero(1, 1);
    CHECK(nn_classify(tie, {7, 3}, zero) == std::vector<int>{7});
    CHECK_THROWS_AS(nn_classify(train, {1, 2}, test), ValidationError);
}

TEST_CASE("scores from a confusion matrix") {
    const ClassReport r = classification_scores({{1, 1}, {1, 1}});
    CHECK(r.oa == doctest::Approx(0.5));
    CHECK(r.aa == doctest::Approx(0.5));
    CHECK(r.kappa == doctest::Approx(0.0).scale(1));

    const ClassReport d = classification_scores({{5, 0, 0}, {0, 3, 0}, {0, 0, 2}});
    CHECK(d.oa == 1.0);
    CHECK(d.aa == 1.0);
    CHECK(d.kappa == doctest::Approx(1.0));

    // OA = 15/20, chance agreement (12 * 9 + 8 * 11) / 400 = 0.49.
    const ClassReport h = classification_scores({{8, 4}, {1, 7}});
    CHECK(h.oa == doctest::Approx(0.75));
    CHECK(h.aa == doctest::Approx(0.5 * (8.0 / 12.0 + 7.0 / 8.0)));
    CHECK(h.kappa == doctest::Approx((0.75 - 0.49) / 0.51));
}

TEST_CASE("scores from label vectors") {
    const std::vector<int> truth{1, 1, 2, 2, 3, 3, 3};
    const ClassReport one = classification_scores(std::vector<int>(7, 3), truth);
    CHECK(one.oa == doctest::Approx(3.0 / 7.0));
    CHECK(one.aa == doctest::Approx(1.0 / 3.0));
    CHECK(one.kappa == doctest::Approx(0.0).scale(1));
    CHECK(one.classes == std::vector<int>{1, 2, 3});

    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> t(60);
        std::vector<int> p(60);
        for (std::size_t i = 0; i < 60; ++i) {
            t[i] = static_cast<int>(rng() % 5);
            p[i] = rng() % 3 == 0 ? static_cast<int>(rng() % 5) : t[i];
        }
        const ClassReport r = classification_scores(p, t);
        CHECK(r.kappa <= r.oa + 1e-12);
        CHECK(r.oa >= 0.0);
        CHECK(r.oa <= 1.0);
    }
    CHECK_THROWS_AS(classification_scores(std::vector<int>{1}, std::vector<int>{1, 2}), ValidationError);
}

TEST_CASE("fclsu exact cases") {
    Matrix e(3, 2);
    e << 1, 0,
         0, 1,
         0, 0;
    Matrix h(3, 3);
    h << 1, 0.3, 2,
         0, 0.7, -1,
         0, 0, 0;
    const Matrix a = fclsu(h, e);
    CHECK(a(0, 0) == doctest::Approx(1.0));
    CHECK(a(1, 0) == doctest::Approx(0.0).scale(1));
    CHECK(a(0, 1) == doctest::Approx(0.3));
    CHECK(a(1, 1) == doctest::Approx(0.7));
    CHECK(a(0, 2) == doctest::Approx(1.0));
    CHECK(a(1, 2) == doctest::Approx(0.0).scale(1));

    const Matrix single = fclsu(h, e.col(0));
    CHECK((single.array() == 1.0).all());
}

TEST_CASE("fclsu feasibility and optimality on random pixels") {
    std::mt19937_64 rng(46);
    const Matrix e = oracle::random_matrix(12, 5, rng, 0, 1);
    const Matrix truth = oracle::random_simplex(5, 1000, rng);
    const Matrix h = e * truth + 0.05 * oracle::random_matrix(12, 1000, rng);
    const Matrix a = fclsu(h, e);
    CHECK(a.minCoeff() >= -1e-12);
    CHECK(oracle::max_column_sum_error(a) <= 1e-10);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
        worst = std::max(worst, fclsu_kkt_residual(h.col(j), e, a.col(j)));
    }
    CHECK(worst <= 1e-6);

    const Matrix clean = fclsu(e * truth, e);
    CHECK((clean - truth).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("unmixing scores") {
    Matrix e(2, 2);
    e << 1, 0,
         0, 1;
    Matrix truth(2, 2);
    truth << 1, 0.5,
             0, 0.5;
    Matrix est(2, 2);
    est << 1, 0.7,
           0, 0.3;
    const Matrix h = truth;
    const UnmixReport r = unmix_scores(est, truth, h, e);
    // Per-pixel aRMSE: 0 and 0.2.
    CHECK(r.armse.mean == doctest::Approx(0.1));
    CHECK(r.armse.std == doctest::Approx(0.1));
    CHECK(r.rrmse.mean == doctest::Approx(0.1));
    const double angle = std::acos((0.35 + 0.15) / (std::sqrt(0.5) * std::sqrt(0.58)));
    CHECK(r.asam.mean == doctest::Approx(angle / 2));
    CHECK(r.asam.std == doctest::Approx(angle / 2));
}

TEST_CASE("fclsu with linearly dependent endmembers") {
    std::mt19937_64 rng(47);
    // Twelve endmembers spanning a three-dimensional subspace.
    const Matrix e = oracle::random_matrix(10, 3, rng, 0, 1) * oracle::random_simplex(3, 12, rng);
    const Matrix h = e * oracle::random_simplex(12, 200, rng) + 0.01 * oracle::random_matrix(10, 200, rng);
    const Matrix a = fclsu(h, e);
    CHECK(a.minCoeff() >= -1e-12);
    CHECK(oracle::max_column_sum_error(a) <= 1e-10);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
        worst = std::max(worst, fclsu_kkt_residual(h.col(j), e, a.col(j)));
    }
    CHECK(worst <= 1e-6);

    Matrix twins(3, 2);
    twins << 1, 1,
             0, 0,
             2, 2;
    const Matrix t = fclsu(Matrix::Ones(3, 1), twins);
    CHECK(t.sum() == doctest::Approx(1.0));
}
