// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <cstddef>
#include <cstdint>

#include "jslol/datamodel.hpp"
#include "jslol/numkit.hpp"
#include "jslol/sparsecode.hpp"

namespace jslol {

/// Pixel-wise copy: each out-of-overlap pixel takes the HS spectrum of the
/// overlap pixel nearest in MS space (Euclidean; ties go to the lower index).
Matrix pwc(const OverlapSplit& split, std::size_t threads = 1);

/// Linear HS-from-MS transform fitted on the overlap.
struct RegressionModel {
    Matrix t;  // P x Q
    double ridge = 0.0;
};

/// T = H M^T (M M^T + ridge I)^-1. Throws FactorizationError when ridge is
/// zero and M is row-rank-deficient.
RegressionModel fit_regression(const OverlapSplit& split, double ridge = 1e-6);

/// T * M
Matrix apply_regression(const RegressionModel& model, const Matrix& m_out);

struct MsDictionaryResult {
    Matrix reconstruction;  // P x N1
    Matrix codes;           // atom_budget x N1
    AdmmTrace trace;
};

/// Sparse coding on raw overlap MS pixels: `atom_budget` seeded-sampled
/// columns of M_in form Dm, their HS partners form Dh.
MsDictionaryResult ms_dictionary_baseline(const OverlapSplit& split, const SStepParams& params,
                                          std::size_t atom_budget, std::uint64_t seed);

}  // namespace jslol
