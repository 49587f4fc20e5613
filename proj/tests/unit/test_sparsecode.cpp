// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "jslol/errors.hpp"
#include "jslol/sparsecode.hpp"
#include "jslol/synthetic.hpp"
#include "oracles.hpp"

using namespace jslol;

namespace {

double rmse(const Matrix& a, const Matrix& b) {
    return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("sparse coding parameter defaults and validation") {
    SStepParams p;
    CHECK(p.eta == 1e-4);
    CHECK(p.rho0 == 1e-3);
    CHECK(p.rho_max == 1e6);
    CHECK(p.xi == 1.5);
    CHECK_NOTHROW(p.validate());
    p.eta = -1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = {};
    p.block_size = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = {};
    p.rho0 = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("init_sstep") {
    const SStepState s = init_sstep(4, 7, SStepParams{});
    CHECK(s.y.rows() == 4);
    CHECK(s.y.cols() == 7);
    CHECK((s.y.array() == 0.25).all());
    CHECK(s.o.isZero());
    CHECK(s.delta.isZero());
    CHECK(s.rho == 1e-3);
}

TEST_CASE("update_y solves the sum-to-one KKT system") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix d = oracle::random_matrix(4, 6, rng, 0, 1);
        const Matrix m = oracle::random_matrix(4, 9, rng, 0, 1);
        SStepState st = init_sstep(6, 9, SStepParams{});
        st.o = oracle::random_matrix(6, 9, rng);
        st.delta = oracle::random_matrix(6, 9, rng);
        st.rho = 0.05 * (trial + 1);
        const Matrix y = update_y(st, d, m, SStepParams{});
        const Matrix a = oracle::naive_product(d.transpose(), d) + st.rho * Matrix::Identity(6, 6);
        const Matrix b = oracle::naive_product(d.transpose(), m) + st.rho * st.o + st.delta;
        CHECK(oracle::max_column_sum_error(y) <= 1e-10);
        CHECK(oracle::sum_to_one_kkt_residual(a, b, y) <= 1e-8);
    }
}

TEST_CASE("update_y edge cases") {
    std::mt19937_64 rng(22);
    SUBCASE("single atom") {
        const Matrix d = oracle::random_matrix(3, 1, rng, 0, 1);
        const Matrix m = oracle::random_matrix(3, 5, rng, 0, 1);
        const SStepState st = init_sstep(1, 5, SStepParams{});
        CHECK((update_y(st, d, m, SStepParams{}).array() - 1.0).abs().maxCoeff() <= 1e-12);
    }
    SUBCASE("large penalty pins Y to O projected onto the simplex plane") {
        const Matrix d = oracle::random_matrix(3, 4, rng, 0, 1);
        const Matrix m = oracle::random_matrix(3, 5, rng, 0, 1);
        SStepState st = init_sstep(4, 5, SStepParams{});
        st.o = oracle::random_simplex(4, 5, rng);
        st.rho = 1e9;
        CHECK((update_y(st, d, m, SStepParams{}) - st.o).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("update_o and update_delta") {
    std::mt19937_64 rng(23);
    SStepState st = init_sstep(5, 8, SStepParams{});
    st.y = oracle::random_matrix(5, 8, rng);
    st.delta = oracle::random_matrix(5, 8, rng);
    st.rho = 0.5;
    const Matrix v = st.y - st.delta / 0.5;
    CHECK((update_o(st, 0.0) - v).cwiseAbs().maxCoeff() <= 1e-15);
    const Matrix o = update_o(st, 0.1);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        CHECK(std::abs(o(i) - oracle::grid_soft_threshold(v(i), 0.2, -6, 6)) <= 1e-4);
    }

    SStepParams p;
    st.o = st.y;
    const Matrix before = st.delta;
    update_delta(st, p);
    CHECK(st.delta == before);
    CHECK(st.rho == doctest::Approx(0.75));
    st.rho = p.rho_max;
    update_delta(st, p);
    CHECK(st.rho == p.rho_max);
}

TEST_CASE("run_sstep fits MS pixels generated from the dictionary") {
    std::mt19937_64 rng(24);
    const Matrix d = oracle::random_matrix(6, 4, rng, 0, 1);
    const Matrix truth = oracle::random_simplex(4, 200, rng);
    const Matrix m = d * truth;
    const SStepResult r = run_sstep(m, d, SStepParams{});
    CHECK(r.trace.converged);
    CHECK(oracle::max_column_sum_error(r.y) <= 1e-8);
    CHECK(rmse(d * r.y, m) <= 1e-3);
    CHECK(rmse(r.y, truth) <= 1e-2);
    CHECK(r.trace.back().residuals.size() == 1);
    CHECK(r.trace.back().residuals[0] < 1e-6);
}

TEST_CASE("run_sstep with max_iter = 0 and empty inputs") {
    std::mt19937_64 rng(25);
    const Matrix d = oracle::random_matrix(3, 4, rng, 0, 1);
    const Matrix m = oracle::random_matrix(3, 6, rng, 0, 1);
    SStepParams p;
    p.max_iter = 0;
    const SStepResult r = run_sstep(m, d, p);
    CHECK(r.trace.empty());
    CHECK((r.y.array() == 0.25).all());

    CHECK_THROWS_AS(run_sstep(Matrix(3, 0), d, SStepParams{}), ValidationError);
    CHECK_THROWS_AS(run_sstep(Matrix(2, 6), d, SStepParams{}), ValidationError);
}

TEST_CASE("run_sstep blocks match a single block") {
    std::mt19937_64 rng(26);
    const Matrix d = oracle::random_matrix(4, 6, rng, 0, 1);
    const Matrix m = d * oracle::random_simplex(6, 50, rng);
    SStepParams one;
    SStepParams many;
    many.block_size = 7;
    SStepParams threaded = many;
    threaded.threads = 3;
    const SStepResult a = run_sstep(m, d, one);
    const SStepResult b = run_sstep(m, d, many);
    const SStepResult c = run_sstep(m, d, threaded);
    CHECK(a.trace.iterations() == b.trace.iterations());
    CHECK((a.y - b.y).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(b.y == c.y);
}

TEST_CASE("larger eta gives sparser codes") {
    std::mt19937_64 rng(27);
    const Matrix d = oracle::random_matrix(4, 12, rng, 0, 1);
    const Matrix m = d * oracle::random_simplex(12, 100, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double eta : {1e-6, 1e-3, 1e-2, 1e-1}) {
        SStepParams p;
        p.eta = eta;
        const double l1 = run_sstep(m, d, p).y.cwiseAbs().sum();
        CHECK(l1 <= prev * (1 + 1e-6));
        prev = l1;
    }
}

TEST_CASE("reconstruct is the dictionary product") {
    std::mt19937_64 rng(28);
    const Matrix d = oracle::random_matrix(9, 5, rng);
    const Matrix y = oracle::random_matrix(5, 13, rng);
    CHECK((reconstruct(d, y) - oracle::naive_product(d, y)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(reconstruct(d, Matrix(4, 3)), ValidationError);
}

TEST_CASE("pipeline on the planted scene") {
    const PlantedSpec spec;
    const PlantedScene scene = make_planted_scene(spec);
    const OverlapSplit split = split_overlap(scene.hs, scene.ms, scene.overlap);
    const PlantedSolverParams params = planted_solver_params(spec, 2);
    const PipelineResult r = jslol_pipeline(split, params.dstep, params.sstep);
    REQUIRE(split.h_out_ref.has_value());
    CHECK(rmse(r.h_out, *split.h_out_ref) <= 1e-2);
    CHECK(r.estimate.width() == split.layout.out_width());
    CHECK(r.estimate.height() == split.layout.height);
    CHECK(r.estimate.bands() == spec.bands);

    const PipelineResult again = jslol_pipeline(split, params.dstep, params.sstep);
    CHECK(again.h_out == r.h_out);
}

TEST_CASE("pipeline with the overlap covering the whole image") {
    const PlantedSpec spec;
    const PlantedScene scene = make_planted_scene(spec);
    const OverlapSplit split = split_overlap(scene.hs, scene.ms, ColumnRange{0, spec.width});
    DStepParams d = planted_solver_params(spec, 0).dstep;
    d.max_iter = 5;
    const PipelineResult r = jslol_pipeline(split, d, SStepParams{});
    CHECK(r.h_out.cols() == 0);
    CHECK(r.estimate.width() == 0);
}
