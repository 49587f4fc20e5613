// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "jslol/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "jslol/errors.hpp"

namespace jslol {

Matrix pwc(const OverlapSplit& split, std::size_t threads) {
    const Eigen::Index n = split.m_in.cols();
    const Eigen::Index n1 = split.m_out.cols();
    if (n == 0) {
        throw ValidationError("pwc: empty overlap region");
    }
    if (split.m_in.rows() != split.m_out.rows()) {
        throw ValidationError("pwc: MS channel counts differ between overlap and target");
    }
    Matrix out(split.h_in.rows(), n1);
    auto work = [&](Eigen::Index first, Eigen::Index last) {
        for (Eigen::Index j = first; j < last; ++j) {
            Eigen::Index best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d = (split.m_in.col(i) - split.m_out.col(j)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            out.col(j) = split.h_in.col(best);
        }
    };
    threads = std::clamp<std::size_t>(threads, 1, static_cast<std::size_t>(std::max<Eigen::Index>(n1, 1)));
    if (threads == 1) {
        work(0, n1);
    } else {
        std::vector<std::jthread> pool;
        const Eigen::Index chunk = (n1 + static_cast<Eigen::Index>(threads) - 1) /
                                   static_cast<Eigen::Index>(threads);
        for (Eigen::Index first = 0; first < n1; first += chunk) {
            pool.emplace_back(work, first, std::min(first + chunk, n1));
        }
    }
    return out;
}

RegressionModel fit_regression(const OverlapSplit& split, double ridge) {
    if (!(ridge >= 0.0)) {
        throw ValidationError("fit_regression: ridge must be nonnegative");
    }
    if (split.m_in.cols() == 0) {
        throw ValidationError("fit_regression: empty overlap region");
    }
    Matrix g = split.m_in * split.m_in.transpose();
    g = 0.5 * (g + g.transpose()).eval();
    g.diagonal().array() += ridge;
    const Matrix r = split.h_in * split.m_in.transpose();
    try {
        return {numkit::solve_spd(g, r.transpose()).transpose(), ridge};
    } catch (const FactorizationError&) {
        throw FactorizationError("fit_regression: M_in M_in^T + ridge I is singular; use ridge > 0");
    }
}

Matrix apply_regression(const RegressionModel& model, const Matrix& m_out) {
    if (model.t.cols() != m_out.rows()) {
        throw ValidationError("apply_regression: model expects " + std::to_string(model.t.cols()) +
                              " channels, got " + std::to_string(m_out.rows()));
    }
    return model.t * m_out;
}

MsDictionaryResult ms_dictionary_baseline(const OverlapSplit& split, const SStepParams& params,
                                          std::size_t atom_budget, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(split.m_in.cols());
    if (n == 0) {
        throw ValidationError("ms_dictionary_baseline: empty overlap region");
    }
    if (atom_budget == 0 || atom_budget > n) {
        throw ValidationError("ms_dictionary_baseline: atom budget must be in [1, N]");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < atom_budget; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(pool[i], pool[j]);
    }
    const auto l = static_cast<Eigen::Index>(atom_budget);
    DictionaryPair d{Matrix(split.h_in.rows(), l), Matrix(split.m_in.rows(), l)};
    for (Eigen::Index a = 0; a < l; ++a) {
        const auto src = static_cast<Eigen::Index>(pool[static_cast<std::size_t>(a)]);
        d.d_h.col(a) = split.h_in.col(src);
        d.d_m.col(a) = split.m_in.col(src);
    }

    MsDictionaryResult out;
    if (split.m_out.cols() == 0) {
        out.reconstruction = Matrix(split.h_in.rows(), 0);
        out.codes = Matrix(l, 0);
        return out;
    }
    SStepResult s = run_sstep(split.m_out, d.d_m, params);
    out.reconstruction = reconstruct(d.d_h, s.y);
    out.codes = std::move(s.y);
    out.trace = std::move(s.trace);
    return out;
}

}  // namespace jslol
