// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "jslol/datamodel.hpp"
#include "jslol/numkit.hpp"
#include "jslol/trace.hpp"

namespace jslol {

/// Parameters of the coupled low-rank dictionary learning problem
///
///   min 1/2 |H - Dh X|^2 + alpha/2 |M - Dm X|^2 + beta |X|_1
///       + gamma (|Dh|_* + |Dm|_*)
///   s.t. Dh >= 0, Dm >= 0, 1^T X = 1^T
///
/// and of the ADMM that solves it.
struct DStepParams {
    double alpha = 1.0;
    double beta = 1e-3;
    double gamma = 0.1;
    std::size_t dict_size = 0;  // 0 selects default_dict_size()
    std::size_t max_iter = 500;
    double xi = 1.5;
    double eps = 1e-6;
    double mu0 = 1e-3;
    double mu_max = 1e6;
    std::uint64_t seed = 0;
    /// Use the literal thresholds beta/mu (singular values) and alpha/mu
    /// (entries) instead of gamma/mu and beta/mu.
    bool strict_paper_thresholds = false;

    /// Throws ValidationError; `channels` is Q.
    void validate(std::size_t channels) const;

    double svt_weight() const { return strict_paper_thresholds ? beta : gamma; }
    double l1_weight() const { return strict_paper_thresholds ? alpha : beta; }
};

/// min(4 Q ceil(P / Q), N)
std::size_t default_dict_size(std::size_t bands, std::size_t channels, std::size_t samples);

struct DictionaryPair {
    Matrix d_h;  // P x L
    Matrix d_m;  // Q x L

    Eigen::Index atoms() const { return d_h.cols(); }
};

struct DStepState {
    Matrix x;        // L x N codes
    Matrix z;        // L x N, sparse copy of x
    Matrix j;        // P x L, low-rank nonnegative copy of d_h
    Matrix k;        // Q x L, low-rank nonnegative copy of d_m
    Matrix lambda1;  // L x N
    Matrix lambda2;  // P x L
    Matrix lambda3;  // Q x L
    double mu = 0.0;
    std::size_t iter = 0;
};

struct DStepInit {
    DictionaryPair dict;
    DStepState state;
};

/// Dictionaries from L seeded overlap pixel pairs (without replacement when
/// L <= N; otherwise with replacement plus uniform [0, 1e-3] jitter), X
/// uniform 1/L, auxiliaries and multipliers zero, mu = mu0.
DStepInit init_dstep(const OverlapSplit& split, const DStepParams& params);

/// Closed-form sum-to-one X minimiser of the augmented Lagrangian.
Matrix update_x(const DStepState& state, const DictionaryPair& dict, const OverlapSplit& split,
                const DStepParams& params);

/// (H X^T + mu J + L2)(X X^T + mu I)^-1
Matrix update_dh(const DStepState& state, const OverlapSplit& split, const Matrix& x);

/// (alpha M X^T + mu K + L3)(alpha X X^T + mu I)^-1
Matrix update_dm(const DStepState& state, const OverlapSplit& split, const Matrix& x,
                 double alpha);

/// Nonnegative singular value thresholding of Dh - L2/mu and Dm - L3/mu at
/// weight/mu. Returns (J, K).
std::pair<Matrix, Matrix> update_jk(const DStepState& state, const DictionaryPair& dict,
                                    double weight);

/// soft_threshold(X - L1/mu, weight/mu)
Matrix update_z(const DStepState& state, const Matrix& x, double weight);

/// Multiplier ascent followed by mu <- min(xi mu, mu_max).
void update_multipliers(DStepState& state, const DictionaryPair& dict, const DStepParams& params);

/// Value of the dictionary learning objective (constraints not checked).
double objective_dstep(const DictionaryPair& dict, const Matrix& x, const OverlapSplit& split,
                       const DStepParams& params);

struct DStepResult {
    DictionaryPair dict;
    Matrix x;
    AdmmTrace trace;
    double initial_objective = 0.0;
};

/// Runs the ADMM until |Z-X|, |J-Dh| and |K-Dm| all drop below eps or
/// max_iter iterations complete. The returned dictionaries are clamped at 0.
/// Throws DivergenceError naming the update that produced a non-finite value.
DStepResult run_dstep(const OverlapSplit& split, const DStepParams& params);

}  // namespace jslol
