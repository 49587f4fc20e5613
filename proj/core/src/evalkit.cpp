// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "jslol/evalkit.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "jslol/errors.hpp"

namespace jslol {

namespace {

double spectral_angle(const Vector& a, const Vector& b) {
    const Vector ua = a / a.norm();
    const Vector ub = b / b.norm();
    return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

MeanStd mean_std(const std::vector<double>& v) {
    if (v.empty()) {
        return {};
    }
    double m = 0.0;
    for (double x : v) {
        m += x;
    }
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

}  // namespace

// ---------------------------------------------------------------------------
// Reconstruction metrics

ReconReport recon_metrics(const Matrix& reference, const Matrix& estimate) {
    if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols()) {
        throw ValidationError("recon_metrics: reference and estimate shapes differ");
    }
    if (reference.size() == 0) {
        throw ValidationError("recon_metrics: empty input");
    }
    numkit::require_finite(reference, "recon_metrics: reference");
    numkit::require_finite(estimate, "recon_metrics: estimate");

    const Eigen::Index bands = reference.rows();
    const Eigen::Index pixels = reference.cols();
    const auto np = static_cast<double>(pixels);
    ReconReport r;

    const Matrix diff = estimate - reference;
    r.rmse = std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));

    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    double psnr_sum = 0.0;
    Eigen::Index psnr_bands = 0;
    double ssim_sum = 0.0;
    double ergas_sum = 0.0;
    bool ergas_ok = true;
    for (Eigen::Index b = 0; b < bands; ++b) {
        const auto ref = reference.row(b);
        const auto est = estimate.row(b);
        const double mse = diff.row(b).squaredNorm() / np;
        const double peak = ref.maxCoeff();

        if (mse == 0.0) {
            psnr_sum += kPsnrCap;
            ++psnr_bands;
        } else if (peak > 0.0) {
            psnr_sum += std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
            ++psnr_bands;
        } else {
            ++r.psnr_excluded_bands;
        }

        const double mx = ref.sum() / np;
        const double my = est.sum() / np;
        const double vx = (ref.array() - mx).square().sum() / np;
        const double vy = (est.array() - my).square().sum() / np;
        const double cxy = ((ref.array() - mx) * (est.array() - my)).sum() / np;
        ssim_sum += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
                    ((mx * mx + my * my + c1) * (vx + vy + c2));

        if (mx == 0.0) {
            ergas_ok = false;
        } else {
            ergas_sum += mse / (mx * mx);
        }
    }
    r.psnr = psnr_bands > 0 ? psnr_sum / static_cast<double>(psnr_bands) : kPsnrCap;
    r.ssim = ssim_sum / static_cast<double>(bands);
    if (ergas_ok) {
        r.ergas = 100.0 * std::sqrt(ergas_sum / static_cast<double>(bands));
    }

    double sad_sum = 0.0;
    Eigen::Index sad_pixels = 0;
    for (Eigen::Index p = 0; p < pixels; ++p) {
        const Vector a = reference.col(p);
        const Vector e = estimate.col(p);
        if (a.norm() == 0.0 || e.norm() == 0.0) {
            ++r.sad_excluded_pixels;
            continue;
        }
        sad_sum += spectral_angle(a, e);
        ++sad_pixels;
    }
    r.sad = sad_pixels > 0 ? sad_sum / static_cast<double>(sad_pixels) : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Classification

std::vector<int> nn_classify(const Matrix& train_specs, const std::vector<int>& train_labels,
                             const Matrix& test_specs) {
    if (train_specs.cols() == 0) {
        throw ValidationError("nn_classify: no training samples");
    }
    if (static_cast<std::size_t>(train_specs.cols()) != train_labels.size()) {
        throw ValidationError("nn_classify: label count does not match training samples");
    }
    if (train_specs.rows() != test_specs.rows()) {
        throw ValidationError("nn_classify: train and test spectra differ in length");
    }
    std::vector<int> out(static_cast<std::size_t>(test_specs.cols()));
    for (Eigen::Index j = 0; j < test_specs.cols(); ++j) {
        Eigen::Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < train_specs.cols(); ++i) {
            const double d = (train_specs.col(i) - test_specs.col(j)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        out[static_cast<std::size_t>(j)] = train_labels[static_cast<std::size_t>(best)];
    }
    return out;
}

ClassReport classification_scores(const std::vector<std::vector<std::size_t>>& confusion) {
    const std::size_t k = confusion.size();
    for (const auto& row : confusion) {
        if (row.size() != k) {
            throw ValidationError("classification_scores: confusion matrix must be square");
        }
    }
    ClassReport r;
    r.confusion = confusion;
    std::vector<double> rows(k, 0.0);
    std::vector<double> cols(k, 0.0);
    double total = 0.0;
    double correct = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t p = 0; p < k; ++p) {
            const auto c = static_cast<double>(confusion[t][p]);
            rows[t] += c;
            cols[p] += c;
            total += c;
        }
        correct += static_cast<double>(confusion[t][t]);
    }
    if (total == 0.0) {
        throw ValidationError("classification_scores: empty test set");
    }
    r.oa = correct / total;
    double aa = 0.0;
    std::size_t present = 0;
    r.per_class.assign(k, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
        if (rows[t] > 0.0) {
            r.per_class[t] = static_cast<double>(confusion[t][t]) / rows[t];
            aa += r.per_class[t];
            ++present;
        }
    }
    r.aa = aa / static_cast<double>(present);
    double pe = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        pe += rows[c] * cols[c];
    }
    pe /= total * total;
    r.kappa = pe < 1.0 ? (r.oa - pe) / (1.0 - pe) : 1.0;
    if (r.classes.empty()) {
        for (std::size_t c = 0; c < k; ++c) {
            r.classes.push_back(static_cast<int>(c) + 1);
        }
    }
    return r;
}

ClassReport classification_scores(const std::vector<int>& predicted,
                                  const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw ValidationError("classification_scores: prediction and truth lengths differ");
    }
    if (truth.empty()) {
        throw ValidationError("classification_scores: empty test set");
    }
    std::set<int> ids(truth.begin(), truth.end());
    ids.insert(predicted.begin(), predicted.end());
    const std::vector<int> classes(ids.begin(), ids.end());
    const auto index = [&](int id) {
        return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), id) -
                                        classes.begin());
    };
    std::vector<std::vector<std::size_t>> confusion(classes.size(),
                                                    std::vector<std::size_t>(classes.size(), 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++confusion[index(truth[i])][index(predicted[i])];
    }
    ClassReport r = classification_scores(confusion);
    r.classes = classes;
    return r;
}

// ---------------------------------------------------------------------------
// Unmixing

namespace {

// Primal active-set method for min 1/2 a^T G a - c^T a, a >= 0, 1^T a = 1.
Vector fclsu_pixel(const Matrix& g, const Vector& c, const Matrix& e, const Vector& h,
                   Eigen::Index pixel) {
    const Eigen::Index k = g.rows();
    Vector a = Vector::Zero(k);
    if (k == 1) {
        a(0) = 1.0;
        return a;
    }
    // Start from the nearest endmember, a feasible vertex.
    Eigen::Index start = 0;
    (e.colwise() - h).colwise().squaredNorm().minCoeff(&start);
    a(start) = 1.0;
    std::vector<bool> free(static_cast<std::size_t>(k), false);
    free[static_cast<std::size_t>(start)] = true;

    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff() + c.cwiseAbs().maxCoeff());
    const double tol = 1e-13 * scale;
    const int max_iter = static_cast<int>(50 * k + 100);

    for (int it = 0; it < max_iter; ++it) {
        const Vector grad = g * a - c;
        std::vector<Eigen::Index> fidx;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (free[static_cast<std::size_t>(i)]) {
                fidx.push_back(i);
            }
        }
        const auto nf = static_cast<Eigen::Index>(fidx.size());

        // Step within the free set along sum-zero directions: Newton on the
        // curved subspace, plain descent along flat directions.
        Vector p = Vector::Zero(k);
        bool flat = false;
        if (nf > 1) {
            Matrix gff(nf, nf);
            Vector gf(nf);
            for (Eigen::Index r = 0; r < nf; ++r) {
                for (Eigen::Index s = 0; s < nf; ++s) {
                    gff(r, s) = g(fidx[static_cast<std::size_t>(r)], fidx[static_cast<std::size_t>(s)]);
                }
                gf(r) = grad(fidx[static_cast<std::size_t>(r)]);
            }
            const Eigen::HouseholderQR<Matrix> qr(Matrix::Ones(nf, 1));
            const Matrix q = qr.householderQ();
            const Matrix z = q.rightCols(nf - 1);
            const Eigen::SelfAdjointEigenSolver<Matrix> es(z.transpose() * gff * z);
            const Vector rv = es.eigenvectors().transpose() * (z.transpose() * gf);
            const Vector& lam = es.eigenvalues();
            const double lam_tol = 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff());
            Vector w = Vector::Zero(nf - 1);
            Vector d = Vector::Zero(nf - 1);
            for (Eigen::Index i = 0; i < nf - 1; ++i) {
                if (lam(i) > lam_tol) {
                    w(i) = -rv(i) / lam(i);
                } else if (std::abs(rv(i)) > tol) {
                    d(i) = -rv(i);
                    flat = true;
                }
            }
            const Vector pf = z * (es.eigenvectors() * (flat ? d : w));
            for (Eigen::Index r = 0; r < nf; ++r) {
                p(fidx[static_cast<std::size_t>(r)]) = pf(r);
            }
        }

        if (!flat && p.cwiseAbs().maxCoeff() <= 1e-12) {
            double nu = 0.0;
            for (auto i : fidx) {
                nu += grad(i);
            }
            nu /= static_cast<double>(nf);
            Eigen::Index worst = -1;
            double worst_mult = -tol;
            for (Eigen::Index i = 0; i < k; ++i) {
                if (!free[static_cast<std::size_t>(i)]) {
                    const double mult = grad(i) - nu;
                    if (mult < worst_mult) {
                        worst_mult = mult;
                        worst = i;
                    }
                }
            }
            if (worst < 0) {
                a = a.cwiseMax(0.0);
                return a / a.sum();
            }
            free[static_cast<std::size_t>(worst)] = true;
            continue;
        }

        double step = flat ? std::numeric_limits<double>::infinity() : 1.0;
        Eigen::Index blocking = -1;
        for (auto i : fidx) {
            if (p(i) < 0.0) {
                const double s = -a(i) / p(i);
                if (s < step) {
                    step = s;
                    blocking = i;
                }
            }
        }
        a += step * p;
        if (blocking >= 0) {
            a(blocking) = 0.0;
            free[static_cast<std::size_t>(blocking)] = false;
        }
    }
    throw ConvergenceError("fclsu: active-set solver did not converge at pixel " +
                           std::to_string(pixel));
}

}  // namespace

Matrix fclsu(const Matrix& spectra, const Matrix& endmembers) {
    if (endmembers.cols() == 0) {
        throw ValidationError("fclsu: need at least one endmember");
    }
    if (endmembers.rows() != spectra.rows()) {
        throw ValidationError("fclsu: endmembers have " + std::to_string(endmembers.rows()) +
                              " bands, spectra have " + std::to_string(spectra.rows()));
    }
    numkit::require_finite(spectra, "fclsu: spectra");
    numkit::require_finite(endmembers, "fclsu: endmembers");
    const Matrix g = endmembers.transpose() * endmembers;
    Matrix out(endmembers.cols(), spectra.cols());
    for (Eigen::Index p = 0; p < spectra.cols(); ++p) {
        const Vector h = spectra.col(p);
        const Vector c = endmembers.transpose() * h;
        out.col(p) = fclsu_pixel(g, c, endmembers, h, p);
    }
    return out;
}

double fclsu_kkt_residual(const Vector& h, const Matrix& endmembers, const Vector& a) {
    const Vector grad = endmembers.transpose() * (endmembers * a - h);
    double nu = 0.0;
    int support = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) > 0.0) {
            nu += grad(i);
            ++support;
        }
    }
    if (support == 0) {
        return std::numeric_limits<double>::infinity();
    }
    nu /= support;
    double worst = std::abs(a.sum() - 1.0);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::max(0.0, -a(i)));
        if (a(i) > 0.0) {
            worst = std::max(worst, std::abs(grad(i) - nu));
        } else {
            worst = std::max(worst, std::max(0.0, nu - grad(i)));
        }
    }
    return worst;
}

UnmixReport unmix_scores(const Matrix& est_abund, const Matrix& true_abund, const Matrix& spectra,
                         const Matrix& endmembers) {
    if (est_abund.rows() != true_abund.rows() || est_abund.cols() != true_abund.cols()) {
        throw ValidationError("unmix_scores: abundance shapes differ");
    }
    if (endmembers.cols() != est_abund.rows() || endmembers.rows() != spectra.rows() ||
        spectra.cols() != est_abund.cols()) {
        throw ValidationError("unmix_scores: spectra, endmembers and abundances do not conform");
    }
    const Eigen::Index n = spectra.cols();
    std::vector<double> ar(static_cast<std::size_t>(n));
    std::vector<double> rr(static_cast<std::size_t>(n));
    std::vector<double> sam(static_cast<std::size_t>(n));
    const Matrix recon = endmembers * est_abund;
    for (Eigen::Index p = 0; p < n; ++p) {
        const auto i = static_cast<std::size_t>(p);
        ar[i] = std::sqrt((est_abund.col(p) - true_abund.col(p)).squaredNorm() /
                          static_cast<double>(est_abund.rows()));
        rr[i] = std::sqrt((spectra.col(p) - recon.col(p)).squaredNorm() /
                          static_cast<double>(spectra.rows()));
        const Vector h = spectra.col(p);
        const Vector r = recon.col(p);
        if (h.norm() == 0.0 || r.norm() == 0.0) {
            sam[i] = (h.norm() == 0.0 && r.norm() == 0.0) ? 0.0 : std::numbers::pi / 2.0;
        } else {
            sam[i] = spectral_angle(h, r);
        }
    }
    return {mean_std(ar), mean_std(rr), mean_std(sam)};
}

}  // namespace jslol
