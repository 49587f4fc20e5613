// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "jslol/dictlearn.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "jslol/errors.hpp"

namespace jslol {

namespace {

void check_split(const OverlapSplit& split) {
    if (split.h_in.cols() == 0) {
        throw ValidationError("dictionary learning needs a nonempty overlap region");
    }
    if (split.h_in.cols() != split.m_in.cols()) {
        throw ValidationError("h_in and m_in have different pixel counts");
    }
}

void check_finite(const Matrix& m, const char* update, std::size_t iter) {
    if (!m.allFinite()) {
        throw DivergenceError(std::string("dictionary learning diverged: ") + update +
                              " produced non-finite values at iteration " + std::to_string(iter));
    }
}

// Right division R * G^-1 for symmetric positive definite G.
Matrix solve_right(const Matrix& r, const Matrix& g) {
    return numkit::solve_spd(g, r.transpose()).transpose();
}

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void DStepParams::validate(std::size_t channels) const {
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) {
        throw ValidationError("alpha, beta and gamma must be nonnegative");
    }
    if (dict_size != 0 && dict_size < channels) {
        throw ValidationError("dictionary size " + std::to_string(dict_size) +
                              " is smaller than the channel count " + std::to_string(channels));
    }
    if (!(xi > 1.0)) {
        throw ValidationError("penalty growth xi must exceed 1");
    }
    if (!(eps > 0.0)) {
        throw ValidationError("eps must be positive");
    }
    if (!(mu0 > 0.0) || !(mu0 < mu_max) || !std::isfinite(mu_max)) {
        throw ValidationError("need 0 < mu0 < mu_max < inf");
    }
}

std::size_t default_dict_size(std::size_t bands, std::size_t channels, std::size_t samples) {
    if (channels == 0) {
        return samples;
    }
    const std::size_t per = (bands + channels - 1) / channels;
    return std::min(4 * channels * per, samples);
}

DStepInit init_dstep(const OverlapSplit& split, const DStepParams& params) {
    check_split(split);
    const auto q = static_cast<std::size_t>(split.m_in.rows());
    params.validate(q);
    const auto n = static_cast<std::size_t>(split.h_in.cols());
    const std::size_t l = params.dict_size != 0
                              ? params.dict_size
                              : default_dict_size(static_cast<std::size_t>(split.h_in.rows()), q, n);
    if (l < q) {
        throw ValidationError("dictionary size " + std::to_string(l) +
                              " is smaller than the channel count " + std::to_string(q) +
                              " (overlap too small)");
    }

    std::mt19937_64 rng(params.seed);
    std::vector<std::size_t> picks(l);
    bool jitter = false;
    if (l <= n) {
        std::vector<std::size_t> pool(n);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < l; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
            std::swap(pool[i], pool[j]);
            picks[i] = pool[i];
        }
    } else {
        jitter = true;
        for (auto& p : picks) {
            p = static_cast<std::size_t>(rng() % n);
        }
    }

    const auto L = static_cast<Eigen::Index>(l);
    const auto N = static_cast<Eigen::Index>(n);
    DStepInit init;
    auto& d = init.dict;
    d.d_h.resize(split.h_in.rows(), L);
    d.d_m.resize(split.m_in.rows(), L);
    for (Eigen::Index a = 0; a < L; ++a) {
        const auto src = static_cast<Eigen::Index>(picks[static_cast<std::size_t>(a)]);
        d.d_h.col(a) = split.h_in.col(src);
        d.d_m.col(a) = split.m_in.col(src);
    }
    if (jitter) {
        for (Eigen::Index a = 0; a < L; ++a) {
            for (Eigen::Index r = 0; r < d.d_h.rows(); ++r) {
                d.d_h(r, a) += 1e-3 * unit_uniform(rng);
            }
            for (Eigen::Index r = 0; r < d.d_m.rows(); ++r) {
                d.d_m(r, a) += 1e-3 * unit_uniform(rng);
            }
        }
    }

    auto& s = init.state;
    s.x = Matrix::Constant(L, N, 1.0 / static_cast<double>(l));
    s.z = Matrix::Zero(L, N);
    s.j = Matrix::Zero(d.d_h.rows(), L);
    s.k = Matrix::Zero(d.d_m.rows(), L);
    s.lambda1 = Matrix::Zero(L, N);
    s.lambda2 = Matrix::Zero(d.d_h.rows(), L);
    s.lambda3 = Matrix::Zero(d.d_m.rows(), L);
    s.mu = params.mu0;
    s.iter = 0;
    return init;
}

Matrix update_x(const DStepState& state, const DictionaryPair& dict, const OverlapSplit& split,
                const DStepParams& params) {
    Matrix a = dict.d_h.transpose() * dict.d_h;
    a.noalias() += params.alpha * (dict.d_m.transpose() * dict.d_m);
    a.diagonal().array() += state.mu;
    Matrix b = dict.d_h.transpose() * split.h_in;
    b.noalias() += params.alpha * (dict.d_m.transpose() * split.m_in);
    b += state.mu * state.z + state.lambda1;
    a = 0.5 * (a + a.transpose()).eval();
    return numkit::sum_to_one_solve(a, b);
}

Matrix update_dh(const DStepState& state, const OverlapSplit& split, const Matrix& x) {
    Matrix g = x * x.transpose();
    g.diagonal().array() += state.mu;
    Matrix r = split.h_in * x.transpose();
    r += state.mu * state.j + state.lambda2;
    return solve_right(r, g);
}

Matrix update_dm(const DStepState& state, const OverlapSplit& split, const Matrix& x,
                 double alpha) {
    Matrix g = alpha * (x * x.transpose());
    g.diagonal().array() += state.mu;
    Matrix r = alpha * (split.m_in * x.transpose());
    r += state.mu * state.k + state.lambda3;
    return solve_right(r, g);
}

std::pair<Matrix, Matrix> update_jk(const DStepState& state, const DictionaryPair& dict,
                                    double weight) {
    const double tau = weight / state.mu;
    Matrix j = numkit::svt(dict.d_h - state.lambda2 / state.mu, tau).cwiseMax(0.0);
    Matrix k = numkit::svt(dict.d_m - state.lambda3 / state.mu, tau).cwiseMax(0.0);
    return {std::move(j), std::move(k)};
}

Matrix update_z(const DStepState& state, const Matrix& x, double weight) {
    return numkit::soft_threshold(x - state.lambda1 / state.mu, weight / state.mu);
}

void update_multipliers(DStepState& state, const DictionaryPair& dict, const DStepParams& params) {
    state.lambda1 += state.mu * (state.z - state.x);
    state.lambda2 += state.mu * (state.j - dict.d_h);
    state.lambda3 += state.mu * (state.k - dict.d_m);
    state.mu = std::min(params.xi * state.mu, params.mu_max);
}

double objective_dstep(const DictionaryPair& dict, const Matrix& x, const OverlapSplit& split,
                       const DStepParams& params) {
    const double fit_h = (split.h_in - dict.d_h * x).squaredNorm();
    const double fit_m = (split.m_in - dict.d_m * x).squaredNorm();
    double value = 0.5 * fit_h + 0.5 * params.alpha * fit_m + params.beta * x.cwiseAbs().sum();
    if (params.gamma != 0.0) {
        value += params.gamma * (numkit::nuclear_norm(dict.d_h) + numkit::nuclear_norm(dict.d_m));
    }
    return value;
}

DStepResult run_dstep(const OverlapSplit& split, const DStepParams& params) {
    DStepInit init = init_dstep(split, params);
    DictionaryPair& dict = init.dict;
    DStepState& s = init.state;

    DStepResult result;
    result.initial_objective = objective_dstep(dict, s.x, split, params);
    result.trace.records.reserve(params.max_iter);

    for (std::size_t t = 1; t <= params.max_iter; ++t) {
        s.iter = t;
        s.x = update_x(s, dict, split, params);
        check_finite(s.x, "X update", t);
        dict.d_h = update_dh(s, split, s.x);
        check_finite(dict.d_h, "Dh update", t);
        dict.d_m = update_dm(s, split, s.x, params.alpha);
        check_finite(dict.d_m, "Dm update", t);
        auto [j, k] = update_jk(s, dict, params.svt_weight());
        s.j = std::move(j);
        s.k = std::move(k);
        check_finite(s.j, "J update", t);
        check_finite(s.k, "K update", t);
        s.z = update_z(s, s.x, params.l1_weight());
        check_finite(s.z, "Z update", t);
        update_multipliers(s, dict, params);
        check_finite(s.lambda1, "multiplier update", t);

        TraceRecord rec;
        rec.iteration = t;
        rec.residuals = {(s.z - s.x).norm(), (s.j - dict.d_h).norm(), (s.k - dict.d_m).norm()};
        rec.objective = objective_dstep(dict, s.x, split, params);
        rec.penalty = s.mu;
        const bool done = rec.residuals[0] < params.eps && rec.residuals[1] < params.eps &&
                          rec.residuals[2] < params.eps;
        result.trace.records.push_back(std::move(rec));
        if (done) {
            result.trace.converged = true;
            break;
        }
    }

    result.dict.d_h = dict.d_h.cwiseMax(0.0);
    result.dict.d_m = dict.d_m.cwiseMax(0.0);
    result.x = std::move(s.x);
    return result;
}

}  // namespace jslol
