// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include <benchmark/benchmark.h>

#include <random>

#include "jslol/dictlearn.hpp"
#include "jslol/evalkit.hpp"
#include "jslol/numkit.hpp"
#include "jslol/sparsecode.hpp"
#include "jslol/synthetic.hpp"

namespace {

using namespace jslol;

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m(i) = u(rng);
    }
    return m;
}

const OverlapSplit& planted_split() {
    static const OverlapSplit split = [] {
        const PlantedScene scene = make_planted_scene({});
        return split_overlap(scene.hs, scene.ms, scene.overlap);
    }();
    return split;
}

void BM_Svt(benchmark::State& state) {
    const auto n = state.range(0);
    const Matrix g = random_matrix(n, n / 2, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(numkit::svt(g, 0.5));
    }
}
BENCHMARK(BM_Svt)->Arg(64)->Arg(220)->Arg(440);

void BM_SumToOneSolve(benchmark::State& state) {
    const auto l = state.range(0);
    Matrix a = random_matrix(l, l, 2);
    a = a.transpose() * a + Matrix::Identity(l, l);
    const Matrix b = random_matrix(l, 4096, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(numkit::sum_to_one_solve(a, b));
    }
}
BENCHMARK(BM_SumToOneSolve)->Arg(30)->Arg(208);

void BM_UpdateX(benchmark::State& state) {
    const OverlapSplit& split = planted_split();
    DStepParams p;
    p.dict_size = 30;
    const DStepInit init = init_dstep(split, p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(update_x(init.state, init.dict, split, p));
    }
}
BENCHMARK(BM_UpdateX);

void BM_RunDStepPlanted(benchmark::State& state) {
    const OverlapSplit& split = planted_split();
    const DStepParams p = planted_solver_params({}, 0).dstep;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_dstep(split, p));
    }
}
BENCHMARK(BM_RunDStepPlanted)->Unit(benchmark::kMillisecond);

void BM_RunSStep(benchmark::State& state) {
    const Matrix d = random_matrix(13, 208, 4);
    const Matrix m = random_matrix(13, state.range(0), 5);
    SStepParams p;
    p.max_iter = 50;
    p.threads = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_sstep(m, d, p));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunSStep)->Args({4096, 1})->Args({16384, 1})->Args({16384, 4})->Unit(benchmark::kMillisecond);

void BM_Fclsu(benchmark::State& state) {
    const Matrix e = random_matrix(198, 3, 6);
    const Matrix h = random_matrix(198, 1000, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fclsu(h, e));
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Fclsu)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
