// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "jslol/trace.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>

#include "jslol/errors.hpp"

namespace jslol {

double TraceRecord::max_residual() const {
    return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

void save_trace_csv(const AdmmTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << "iter,residual,objective,penalty\n" << std::setprecision(17);
    for (const auto& r : trace.records) {
        out << r.iteration << ',' << r.max_residual() << ',' << r.objective << ',' << r.penalty
            << '\n';
    }
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

}  // namespace jslol
