// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "jslol/sparsecode.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "jslol/errors.hpp"

namespace jslol {

namespace {

struct Block {
    Eigen::Index begin;
    Eigen::Index cols;
};

std::vector<Block> make_blocks(Eigen::Index n, std::size_t block_size) {
    std::vector<Block> blocks;
    const auto step = static_cast<Eigen::Index>(std::max<std::size_t>(block_size, 1));
    for (Eigen::Index b = 0; b < n; b += step) {
        blocks.push_back({b, std::min(step, n - b)});
    }
    return blocks;
}

// Runs fn(i) for every block index; blocks write disjoint columns.
template <class Fn>
void for_each_block(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::min(std::max<std::size_t>(threads, 1), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += threads) {
                fn(i);
            }
        });
    }
}

Matrix system_matrix(const Matrix& d_m, double rho) {
    Matrix a = d_m.transpose() * d_m;
    a = 0.5 * (a + a.transpose()).eval();
    a.diagonal().array() += rho;
    return a;
}

/// Y-update system solver; wide dictionaries go through the Woodbury form.
class YSolver {
public:
    YSolver(const Matrix& d_m, double rho) {
        if (d_m.rows() < d_m.cols()) {
            low_rank_.emplace(d_m, rho);
        } else {
            dense_.emplace(system_matrix(d_m, rho));
        }
    }

    Matrix solve(const Matrix& b) const { return low_rank_ ? low_rank_->solve(b) : dense_->solve(b); }

private:
    std::optional<numkit::ShiftedGramSumToOneSolver> low_rank_;
    std::optional<numkit::SumToOneSolver> dense_;
};

}  // namespace

void SStepParams::validate() const {
    if (!(eta >= 0.0)) {
        throw ValidationError("eta must be nonnegative");
    }
    if (!(xi > 1.0)) {
        throw ValidationError("penalty growth xi must exceed 1");
    }
    if (!(eps > 0.0)) {
        throw ValidationError("eps must be positive");
    }
    if (!(rho0 > 0.0) || !(rho0 < rho_max) || !std::isfinite(rho_max)) {
        throw ValidationError("need 0 < rho0 < rho_max < inf");
    }
    if (block_size == 0) {
        throw ValidationError("block size must be positive");
    }
}

SStepState init_sstep(Eigen::Index atoms, Eigen::Index pixels, const SStepParams& params) {
    if (atoms <= 0) {
        throw ValidationError("sparse coding needs at least one atom");
    }
    SStepState s;
    s.y = Matrix::Constant(atoms, pixels, 1.0 / static_cast<double>(atoms));
    s.o = Matrix::Zero(atoms, pixels);
    s.delta = Matrix::Zero(atoms, pixels);
    s.rho = params.rho0;
    return s;
}

Matrix update_y(const SStepState& state, const Matrix& d_m, const Matrix& m_out,
                const SStepParams& /*params*/) {
    const YSolver solver(d_m, state.rho);
    Matrix b = d_m.transpose() * m_out;
    b += state.rho * state.o + state.delta;
    return solver.solve(b);
}

Matrix update_o(const SStepState& state, double eta) {
    return numkit::soft_threshold(state.y - state.delta / state.rho, eta / state.rho);
}

void update_delta(SStepState& state, const SStepParams& params) {
    state.delta += state.rho * (state.o - state.y);
    state.rho = std::min(params.xi * state.rho, params.rho_max);
}

SStepResult run_sstep(const Matrix& m_out, const Matrix& d_m, const SStepParams& params) {
    params.validate();
    numkit::require_finite(d_m, "run_sstep: dictionary");
    numkit::require_finite(m_out, "run_sstep: pixels");
    if (d_m.rows() != m_out.rows()) {
        throw ValidationError("run_sstep: dictionary has " + std::to_string(d_m.rows()) +
                              " channels, pixels have " + std::to_string(m_out.rows()));
    }
    if (m_out.cols() == 0) {
        throw ValidationError("run_sstep: no pixels to encode");
    }

    SStepState s = init_sstep(d_m.cols(), m_out.cols(), params);
    const auto blocks = make_blocks(m_out.cols(), params.block_size);
    const Matrix dtm = d_m.transpose();
    std::vector<double> res2(blocks.size());
    std::vector<double> fit2(blocks.size());
    std::vector<double> l1(blocks.size());

    SStepResult out;
    out.trace.records.reserve(params.max_iter);
    for (std::size_t t = 1; t <= params.max_iter; ++t) {
        s.iter = t;
        const YSolver solver(d_m, s.rho);
        const double rho = s.rho;
        const double next_rho = std::min(params.xi * rho, params.rho_max);
        for_each_block(blocks.size(), params.threads, [&](std::size_t i) {
            const auto [c0, nc] = blocks[i];
            auto y = s.y.middleCols(c0, nc);
            auto o = s.o.middleCols(c0, nc);
            auto delta = s.delta.middleCols(c0, nc);
            const auto m = m_out.middleCols(c0, nc);

            Matrix b = dtm * m;
            b += rho * o + delta;
            y = solver.solve(b);
            o = numkit::soft_threshold(y - delta / rho, params.eta / rho);
            delta += rho * (o - y);

            res2[i] = (o - y).squaredNorm();
            fit2[i] = (m - d_m * y).squaredNorm();
            l1[i] = y.cwiseAbs().sum();
        });
        s.rho = next_rho;

        if (!s.y.allFinite() || !s.o.allFinite() || !s.delta.allFinite()) {
            throw DivergenceError("sparse coding diverged: non-finite iterate at iteration " +
                                  std::to_string(t));
        }
        double r = 0.0;
        double f = 0.0;
        double a = 0.0;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            r += res2[i];
            f += fit2[i];
            a += l1[i];
        }
        TraceRecord rec;
        rec.iteration = t;
        rec.residuals = {std::sqrt(r)};
        rec.objective = 0.5 * f + params.eta * a;
        rec.penalty = s.rho;
        const bool done = rec.residuals[0] < params.eps;
        out.trace.records.push_back(std::move(rec));
        if (done) {
            out.trace.converged = true;
            break;
        }
    }
    out.y = std::move(s.y);
    return out;
}

Matrix reconstruct(const Matrix& d_h, const Matrix& y) {
    if (d_h.cols() != y.rows()) {
        throw ValidationError("reconstruct: dictionary has " + std::to_string(d_h.cols()) +
                              " atoms, codes have " + std::to_string(y.rows()));
    }
    return d_h * y;
}

PipelineResult jslol_pipeline(const OverlapSplit& split, const DStepParams& dparams,
                              const SStepParams& sparams) {
    PipelineResult r;
    r.dstep = run_dstep(split, dparams);
    if (split.n_out() == 0) {
        r.h_out = Matrix(split.h_in.rows(), 0);
        r.sstep.y = Matrix(r.dstep.dict.atoms(), 0);
    } else {
        r.sstep = run_sstep(split.m_out, r.dstep.dict.d_m, sparams);
        r.h_out = reconstruct(r.dstep.dict.d_h, r.sstep.y);
    }
    r.estimate = out_region_cube(r.h_out, split.layout);
    return r;
}

}  // namespace jslol
