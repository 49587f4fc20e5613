// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "jslol/datamodel.hpp"
#include "jslol/dictlearn.hpp"
#include "jslol/sparsecode.hpp"

namespace jslol::cli {

struct BaselineToggles {
    bool pwc = true;
    bool regression = true;
    bool ms_dictionary = true;
    bool jslol = true;
    double ridge = 1e-6;
    std::size_t atom_budget = 0;  // 0 uses the J-SLoL dictionary size
};

/// Everything a verb needs. Paths are resolved relative to the working
/// directory; unset optional inputs fall back to artifacts in `out`.
struct RunConfig {
    std::filesystem::path hs;
    std::filesystem::path ms;
    std::filesystem::path srf;
    std::filesystem::path labels;
    std::filesystem::path endmembers;
    std::filesystem::path abundances;
    std::filesystem::path dictionary;
    std::filesystem::path estimate;
    std::filesystem::path out = "ssr_out";
    std::optional<ColumnRange> overlap;
    DStepParams dstep;
    SStepParams sstep;
    BaselineToggles baselines;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::vector<std::size_t> pgm_bands;
    bool csv = false;
};

/// Parses a JSON config document; unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text);

/// Throws ValidationError when a required input is missing or does not exist.
void require_input(const std::filesystem::path& path, const char* what);

}  // namespace jslol::cli
