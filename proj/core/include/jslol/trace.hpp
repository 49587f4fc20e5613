// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace jslol {

/// One completed ADMM iteration.
struct TraceRecord {
    std::size_t iteration = 0;
    double objective = 0.0;
    /// Primal residuals in the order the solver defines them:
    /// dictionary learning reports (|Z-X|, |J-Dh|, |K-Dm|), sparse coding (|O-Y|).
    std::vector<double> residuals;
    /// Penalty parameter after this iteration's update.
    double penalty = 0.0;

    double max_residual() const;
};

struct AdmmTrace {
    std::vector<TraceRecord> records;
    bool converged = false;

    std::size_t iterations() const { return records.size(); }
    bool empty() const { return records.empty(); }
    const TraceRecord& back() const { return records.back(); }
};

/// CSV with header iter,residual,objective,penalty; residual is the largest
/// primal residual of the iteration.
void save_trace_csv(const AdmmTrace& trace, const std::filesystem::path& path);

}  // namespace jslol
