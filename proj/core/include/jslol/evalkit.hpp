// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "jslol/numkit.hpp"

namespace jslol {

/// Reconstruction quality of an estimate against a reference, both
/// bands x pixels.
///
/// - rmse:  global root-mean-square difference.
/// - psnr:  mean over bands of 10 log10(peak_b^2 / mse_b), peak_b the largest
///          reference value in band b, each band capped at 100 dB.
/// - sad:   mean spectral angle (radians) over pixels.
/// - ssim:  mean over bands of SSIM computed from global band statistics,
///          C1 = 0.01^2, C2 = 0.03^2, dynamic range 1.
/// - ergas: 100 sqrt(mean_b (rmse_b / mean_b)^2) with resolution ratio 1;
///          empty when some reference band has zero mean.
struct ReconReport {
    double rmse = 0.0;
    double psnr = 0.0;
    double sad = 0.0;
    double ssim = 0.0;
    std::optional<double> ergas;

    std::size_t sad_excluded_pixels = 0;  // zero-norm spectra skipped in SAD
    std::size_t psnr_excluded_bands = 0;  // zero-peak bands skipped in PSNR
};

inline constexpr double kPsnrCap = 100.0;

ReconReport recon_metrics(const Matrix& reference, const Matrix& estimate);

/// 1-nearest-neighbour labels (Euclidean; ties go to the lower train index).
/// Samples are columns.
std::vector<int> nn_classify(const Matrix& train_specs, const std::vector<int>& train_labels,
                             const Matrix& test_specs);

struct ClassReport {
    double oa = 0.0;
    double aa = 0.0;
    double kappa = 0.0;
    std::vector<int> classes;        // sorted class ids, index of rows/cols below
    std::vector<double> per_class;   // recall per truth class
    std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
};

/// Scores from a square confusion matrix indexed [truth][predicted].
ClassReport classification_scores(const std::vector<std::vector<std::size_t>>& confusion);

/// Builds the confusion matrix over the union of labels, then scores it.
/// Classes that never occur in `truth` are left out of the average accuracy.
ClassReport classification_scores(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Fully constrained least squares unmixing: per pixel,
/// argmin |h - E a| subject to a >= 0 and 1^T a = 1. Returns K x N.
/// Throws ConvergenceError (with the pixel index) if the active-set solver
/// exceeds its iteration limit.
Matrix fclsu(const Matrix& spectra, const Matrix& endmembers);

/// KKT violation of an abundance vector for the FCLSU problem: stationarity
/// over the support plus dual feasibility off it.
double fclsu_kkt_residual(const Vector& h, const Matrix& endmembers, const Vector& a);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};

/// aRMSE: per-pixel RMS abundance error; rRMSE: per-pixel RMS of h - E a_est;
/// aSAM: per-pixel angle between h and E a_est. Each as mean and std over pixels.
struct UnmixReport {
    MeanStd armse;
    MeanStd rrmse;
    MeanStd asam;
};

UnmixReport unmix_scores(const Matrix& est_abund, const Matrix& true_abund, const Matrix& spectra,
                         const Matrix& endmembers);

}  // namespace jslol
