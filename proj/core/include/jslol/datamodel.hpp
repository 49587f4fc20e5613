// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jslol/numkit.hpp"

namespace jslol {

/// A width x height x bands raster stored band-sequentially:
/// value(b, row, col) lives at b * width * height + row * width + col.
///
/// Pixel index p = row * width + col is used throughout; "pixel matrices"
/// are bands x (width * height) with column p holding the spectrum of p.
class SpectralCube {
public:
    SpectralCube() = default;
    SpectralCube(std::size_t width, std::size_t height, std::size_t bands);
    SpectralCube(std::size_t width, std::size_t height, std::size_t bands,
                 std::vector<double> values);

    /// Builds a cube from a bands x (width * height) pixel matrix.
    static SpectralCube from_pixels(const Matrix& pixels, std::size_t width, std::size_t height);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t bands() const { return bands_; }
    std::size_t pixel_count() const { return width_ * height_; }
    bool empty() const { return values_.empty(); }

    double& at(std::size_t band, std::size_t row, std::size_t col);
    double at(std::size_t band, std::size_t row, std::size_t col) const;

    const std::vector<double>& values() const { return values_; }

    Matrix to_pixels() const;
    Vector pixel(std::size_t row, std::size_t col) const;

    double min_value() const;
    double max_value() const;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t bands_ = 0;
    std::vector<double> values_;
};

/// Q x P spectral response matrix mapping HS bands onto MS channels.
/// Rows are nonnegative and normalised to sum to one.
class Srf {
public:
    /// Validates the shape (Q < P) and nonnegativity, then normalises rows.
    explicit Srf(Matrix response);

    const Matrix& matrix() const { return m_; }
    Eigen::Index channels() const { return m_.rows(); }
    Eigen::Index bands() const { return m_.cols(); }

private:
    Matrix m_;
};

/// Synthetic SRF: `channels` contiguous boxes of (nearly) equal width
/// averaging the HS bands they cover.
Srf box_average_srf(std::size_t bands, std::size_t channels);

/// Half-open column range [begin, end).
struct ColumnRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end > begin ? end - begin : 0; }
};

/// Pixel bookkeeping for a vertical overlap strip. Both index lists are in
/// row-major order, so the out-of-overlap pixels form a
/// height x (width - strip width) image when read back in order.
struct OverlapLayout {
    std::size_t width = 0;
    std::size_t height = 0;
    ColumnRange overlap;
    std::vector<std::size_t> in_pixels;
    std::vector<std::size_t> out_pixels;

    std::size_t out_width() const { return width - overlap.size(); }
};

/// Throws ValidationError for an empty or out-of-bounds strip.
OverlapLayout make_layout(std::size_t width, std::size_t height, ColumnRange overlap);

struct OverlapSplit {
    OverlapLayout layout;
    Matrix h_in;                     // P x N
    Matrix m_in;                     // Q x N
    Matrix m_out;                    // Q x N1
    std::optional<Matrix> h_out_ref; // P x N1, evaluation only

    Eigen::Index n_in() const { return h_in.cols(); }
    Eigen::Index n_out() const { return m_out.cols(); }
};

SpectralCube simulate_ms(const SpectralCube& hs, const Srf& srf);

/// Splits co-registered HS and MS cubes along a vertical overlap strip.
/// A strip covering the full width is legal and leaves m_out empty.
OverlapSplit split_overlap(const SpectralCube& hs, const SpectralCube& ms, ColumnRange overlap);

/// Gathers the listed pixels of a cube into a bands x count matrix.
Matrix gather_pixels(const SpectralCube& cube, const std::vector<std::size_t>& pixels);

/// Lays out-of-overlap spectra (bands x N1) back out as a
/// height x out_width cube.
SpectralCube out_region_cube(const Matrix& spectra, const OverlapLayout& layout);

/// Full-scene cube with the overlap strip taken from `in_spectra` and the
/// rest from `out_spectra`.
SpectralCube reassemble(const Matrix& in_spectra, const Matrix& out_spectra,
                        const OverlapLayout& layout);

// ---------------------------------------------------------------------------
// File I/O
//
// Cube format: raw little-endian float32 payload, band-sequential, plus a JSON
// sidecar next to it (same stem, ".json" extension) holding
// {width, height, bands, data_max}. Loading divides by data_max and clamps
// into [0, 1]. Matrices stored in the same container set "kind": "matrix",
// keep their values unscaled, and map rows to bands and columns to width.

std::filesystem::path sidecar_path(const std::filesystem::path& payload);

SpectralCube load_cube(const std::filesystem::path& path);
void save_cube(const SpectralCube& cube, const std::filesystem::path& path);

Matrix load_matrix_cube(const std::filesystem::path& path);
void save_matrix_cube(const Matrix& m, const std::filesystem::path& path);

/// Rectangular numeric CSV; ragged rows and non-numeric cells are rejected.
Matrix load_matrix_csv(const std::filesystem::path& path);
void save_matrix_csv(const Matrix& m, const std::filesystem::path& path);

enum class SampleSplit { none, train, test };

/// Per-pixel class ids (0 = unlabeled) and train/test tags.
struct LabelField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<int> labels;
    std::vector<SampleSplit> split;

    std::size_t class_count() const;
};

/// Reads a CSV of (row, col, class_id, split) with split in {train, test}.
/// An optional header line is skipped. Class ids must be contiguous from 1.
LabelField load_label_split(const std::filesystem::path& path, std::size_t width,
                            std::size_t height);

}  // namespace jslol
