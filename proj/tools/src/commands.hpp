// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <exception>

#include "config.hpp"

namespace jslol::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitValidation = 2,
    kExitDivergence = 3,
    kExitIo = 4,
};

/// Writes ms.bin and simulate.json (scene size, N and N1 when an overlap is set).
void cmd_simulate(const RunConfig& config);

/// Learns the dictionary pair on the overlap: dict_h.bin, dict_m.bin,
/// dictionary.json and dstep_trace.csv.
void cmd_train(const RunConfig& config);

/// Codes the out-of-overlap MS pixels on the trained dictionary and writes
/// estimate.bin, codes.bin, sstep_trace.csv, reconstruct.json and PGM dumps.
void cmd_reconstruct(const RunConfig& config);

/// Scores estimate.bin against the reference HS out-of-overlap region:
/// report.json (and report.csv with `csv`).
void cmd_evaluate(const RunConfig& config);

/// Runs the enabled methods on one split and writes their cubes plus
/// baselines.json / baselines.csv ranked by RMSE.
void cmd_baselines(const RunConfig& config);

/// Planted synthetic scene through every verb above; `config` supplies seed,
/// out, threads and solver overrides.
void cmd_demo(const RunConfig& config);

/// Maps an exception to the process exit code.
int exit_code_for(const std::exception& e);

/// stderr logger at the level named by SSR_LOG_LEVEL (error, warn, info, debug).
void configure_logging();

/// Full command line entry point; returns the exit code.
int run(int argc, const char* const* argv);

}  // namespace jslol::cli
