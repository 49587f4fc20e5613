// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <cstddef>
#include <cstdint>

#include "jslol/datamodel.hpp"
#include "jslol/dictlearn.hpp"
#include "jslol/numkit.hpp"
#include "jslol/sparsecode.hpp"

namespace jslol {

/// Shape of a planted scene. The defaults give N = 500 overlap pixels and
/// N1 = 300 target pixels.
struct PlantedSpec {
    std::size_t bands = 40;
    std::size_t channels = 4;
    std::size_t atoms = 30;
    std::size_t sparsity = 3;
    std::size_t width = 40;
    std::size_t height = 20;
    ColumnRange overlap{0, 25};
    std::uint64_t seed = 7;
};

/// Noise-free scene H = Dh* X* with M = S H for a box-average SRF S.
///
/// Atoms are smooth nonnegative spectra c + B w_l, B holding one Gaussian bump
/// per MS channel, so the scene spans Q + 1 linear dimensions (more than any
/// Q-channel linear map can produce). Each pixel mixes `sparsity` distinct
/// atoms with random simplex weights.
struct PlantedScene {
    SpectralCube hs;
    SpectralCube ms;
    Srf srf;
    ColumnRange overlap;
    Matrix d_h;    // P x L
    Matrix d_m;    // Q x L, S * d_h
    Matrix codes;  // L x (width * height), pixel order
};

PlantedScene make_planted_scene(const PlantedSpec& spec);

struct PlantedSolverParams {
    DStepParams dstep;
    SStepParams sstep;
};

/// Solver settings used for planted scenes: L = spec.atoms and
/// (alpha, beta, gamma, eta) = (1, 0.01, 0.001, 1e-4).
PlantedSolverParams planted_solver_params(const PlantedSpec& spec, std::uint64_t seed);

}  // namespace jslol
