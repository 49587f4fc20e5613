// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "jslol/synthetic.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "jslol/errors.hpp"

namespace jslol {

namespace {

double uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PlantedScene make_planted_scene(const PlantedSpec& spec) {
    if (spec.sparsity == 0 || spec.sparsity > spec.atoms) {
        throw ValidationError("planted scene: sparsity must be in [1, atoms]");
    }
    Srf srf = box_average_srf(spec.bands, spec.channels);
    std::mt19937_64 rng(spec.seed);

    const auto p = static_cast<Eigen::Index>(spec.bands);
    const auto q = static_cast<Eigen::Index>(spec.channels);
    const auto l = static_cast<Eigen::Index>(spec.atoms);

    // Baseline spectrum and one bump per channel, centred on its box.
    Vector base(p);
    Matrix bumps(p, q);
    const double width = static_cast<double>(spec.bands) / static_cast<double>(spec.channels);
    for (Eigen::Index b = 0; b < p; ++b) {
        const double t = static_cast<double>(b) / static_cast<double>(p - 1);
        base(b) = 0.25 + 0.1 * std::sin(3.0 * t) + ((b % 2 == 0) ? 0.08 : -0.08);
        for (Eigen::Index c = 0; c < q; ++c) {
            const double centre = (static_cast<double>(c) + 0.5) * width;
            const double z = (static_cast<double>(b) + 0.5 - centre) / (0.6 * width);
            bumps(b, c) = std::exp(-0.5 * z * z);
        }
    }
    Matrix weights(q, l);
    for (Eigen::Index a = 0; a < l; ++a) {
        for (Eigen::Index c = 0; c < q; ++c) {
            weights(c, a) = 0.4 * uniform(rng);
        }
    }
    Matrix d_h = bumps * weights;
    d_h.colwise() += base;

    const std::size_t pixels = spec.width * spec.height;
    Matrix codes = Matrix::Zero(l, static_cast<Eigen::Index>(pixels));
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(l));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    for (std::size_t px = 0; px < pixels; ++px) {
        for (std::size_t i = 0; i < spec.sparsity; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (spec.atoms - i));
            std::swap(pool[i], pool[j]);
        }
        double total = 0.0;
        for (std::size_t i = 0; i < spec.sparsity; ++i) {
            const double w = -std::log(1.0 - uniform(rng));
            codes(pool[i], static_cast<Eigen::Index>(px)) = w;
            total += w;
        }
        codes.col(static_cast<Eigen::Index>(px)) /= total;
    }

    const Matrix h = d_h * codes;
    PlantedScene scene{SpectralCube::from_pixels(h, spec.width, spec.height),
                       SpectralCube{},
                       srf,
                       spec.overlap,
                       d_h,
                       srf.matrix() * d_h,
                       codes};
    scene.ms = simulate_ms(scene.hs, srf);
    return scene;
}

PlantedSolverParams planted_solver_params(const PlantedSpec& spec, std::uint64_t seed) {
    PlantedSolverParams p;
    p.dstep.alpha = 1.0;
    p.dstep.beta = 0.01;
    p.dstep.gamma = 0.001;
    p.dstep.dict_size = spec.atoms;
    p.dstep.seed = seed;
    p.sstep.eta = 1e-4;
    return p;
}

}  // namespace jslol
