// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <cstddef>

#include "jslol/datamodel.hpp"
#include "jslol/dictlearn.hpp"
#include "jslol/numkit.hpp"
#include "jslol/trace.hpp"

namespace jslol {

/// Sum-to-one sparse coding of MS pixels on a fixed MS dictionary:
///
///   min 1/2 |M - Dm Y|^2 + eta |Y|_1   s.t. 1^T Y = 1^T
struct SStepParams {
    double eta = 1e-4;
    std::size_t max_iter = 500;
    double xi = 1.5;
    double eps = 1e-6;
    double rho0 = 1e-3;
    double rho_max = 1e6;
    /// Columns per block; blocks are independent and only bound temporaries.
    std::size_t block_size = 4096;
    std::size_t threads = 1;

    void validate() const;
};

struct SStepState {
    Matrix y;      // L x N1
    Matrix o;      // L x N1
    Matrix delta;  // L x N1
    double rho = 0.0;
    std::size_t iter = 0;
};

/// Y uniform 1/L, O = Delta = 0, rho = rho0.
SStepState init_sstep(Eigen::Index atoms, Eigen::Index pixels, const SStepParams& params);

/// Closed-form sum-to-one Y minimiser of the augmented Lagrangian.
Matrix update_y(const SStepState& state, const Matrix& d_m, const Matrix& m_out,
                const SStepParams& params);

/// soft_threshold(Y - Delta/rho, eta/rho)
Matrix update_o(const SStepState& state, double eta);

/// Delta += rho (O - Y), then rho <- min(xi rho, rho_max).
void update_delta(SStepState& state, const SStepParams& params);

struct SStepResult {
    Matrix y;
    AdmmTrace trace;
};

/// Iterates (Y, O, Delta, rho) until |O - Y| < eps or max_iter.
SStepResult run_sstep(const Matrix& m_out, const Matrix& d_m, const SStepParams& params);

/// Dh * Y. Values are left unclamped.
Matrix reconstruct(const Matrix& d_h, const Matrix& y);

struct PipelineResult {
    DStepResult dstep;
    SStepResult sstep;
    Matrix h_out;          // P x N1, unclamped
    SpectralCube estimate; // out-of-overlap region, height x out_width x P
};

/// Dictionary learning on the overlap, sparse coding of the remaining MS
/// pixels, and HS reconstruction laid out as the out-of-overlap image.
PipelineResult jslol_pipeline(const OverlapSplit& split, const DStepParams& dparams,
                              const SStepParams& sparams);

}  // namespace jslol
