// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "jslol/baselines.hpp"
#include "jslol/errors.hpp"
#include "jslol/evalkit.hpp"
#include "jslol/synthetic.hpp"

namespace jslol::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

void write_json(const fs::path& path, const Json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

Json number(double v) {
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json range_json(const ColumnRange& r) {
    return Json{{"begin", r.begin}, {"end", r.end}};
}

Json dstep_json(const DStepParams& p) {
    return Json{{"alpha", p.alpha},
                {"beta", p.beta},
                {"gamma", p.gamma},
                {"dict_size", p.dict_size},
                {"max_iter", p.max_iter},
                {"xi", p.xi},
                {"eps", p.eps},
                {"mu0", p.mu0},
                {"mu_max", p.mu_max},
                {"seed", p.seed},
                {"strict_paper_thresholds", p.strict_paper_thresholds}};
}

Json sstep_json(const SStepParams& p) {
    return Json{{"eta", p.eta},   {"max_iter", p.max_iter}, {"xi", p.xi},
                {"eps", p.eps},   {"rho0", p.rho0},         {"rho_max", p.rho_max},
                {"block_size", p.block_size}};
}

Json trace_json(const AdmmTrace& t) {
    Json j{{"iterations", t.iterations()}, {"converged", t.converged}};
    if (!t.empty()) {
        Json res = Json::array();
        for (double r : t.back().residuals) {
            res.push_back(number(r));
        }
        j["final_residuals"] = res;
        j["final_objective"] = number(t.back().objective);
        j["final_penalty"] = t.back().penalty;
    }
    return j;
}

Json recon_json(const ReconReport& r) {
    return Json{{"rmse", number(r.rmse)},
                {"psnr", number(r.psnr)},
                {"sad", number(r.sad)},
                {"ssim", number(r.ssim)},
                {"ergas", r.ergas ? number(*r.ergas) : Json(nullptr)},
                {"sad_excluded_pixels", r.sad_excluded_pixels},
                {"psnr_excluded_bands", r.psnr_excluded_bands}};
}

Json class_json(const ClassReport& r) {
    return Json{{"oa", r.oa},
                {"aa", r.aa},
                {"kappa", r.kappa},
                {"classes", r.classes},
                {"per_class", r.per_class},
                {"confusion", r.confusion}};
}

Json mean_std_json(const MeanStd& m) {
    return Json{{"mean", number(m.mean)}, {"std", number(m.std)}};
}

std::string fmt_double(double v) {
    if (!std::isfinite(v)) {
        return "";
    }
    return Json(v).dump();
}

/// Input path as recorded in manifests: relative to the output directory
/// when it lives inside it.
std::string manifest_path(const fs::path& p, const fs::path& out) {
    const fs::path rel = p.lexically_normal().lexically_relative(out.lexically_normal());
    if (!rel.empty() && *rel.begin() != "..") {
        return rel.generic_string();
    }
    return p.generic_string();
}

ColumnRange require_overlap(const RunConfig& c) {
    if (!c.overlap) {
        throw ValidationError("config: 'overlap' column range is required");
    }
    return *c.overlap;
}

SpectralCube load_hs(const RunConfig& c) {
    require_input(c.hs, "hs");
    return load_cube(c.hs);
}

Srf load_srf(const RunConfig& c, std::size_t bands) {
    require_input(c.srf, "srf");
    Srf srf(load_matrix_csv(c.srf));
    if (static_cast<std::size_t>(srf.bands()) != bands) {
        throw ValidationError("srf: " + std::to_string(srf.bands()) + " columns but the HS cube has " +
                              std::to_string(bands) + " bands");
    }
    return srf;
}

/// MS cube from `ms` when set, otherwise simulated from `hs` and `srf`.
SpectralCube resolve_ms(const RunConfig& c, const std::optional<SpectralCube>& hs) {
    if (!c.ms.empty()) {
        require_input(c.ms, "ms");
        SpectralCube ms = load_cube(c.ms);
        if (hs && (ms.width() != hs->width() || ms.height() != hs->height())) {
            throw ValidationError("ms and hs cubes are not co-registered");
        }
        return ms;
    }
    if (!hs) {
        throw ValidationError("missing input: set 'ms', or 'hs' and 'srf'");
    }
    return simulate_ms(*hs, load_srf(c, hs->bands()));
}

OverlapSplit load_split(const RunConfig& c) {
    const ColumnRange overlap = require_overlap(c);
    const SpectralCube hs = load_hs(c);
    const SpectralCube ms = resolve_ms(c, hs);
    return split_overlap(hs, ms, overlap);
}

DStepParams dstep_params(const RunConfig& c) {
    DStepParams p = c.dstep;
    p.seed = c.seed;
    return p;
}

SStepParams sstep_params(const RunConfig& c) {
    SStepParams p = c.sstep;
    p.threads = std::max<std::size_t>(1, c.threads);
    return p;
}

fs::path dictionary_dir(const RunConfig& c) {
    return c.dictionary.empty() ? c.out : c.dictionary;
}

fs::path estimate_path(const RunConfig& c) {
    return c.estimate.empty() ? c.out / "estimate.bin" : c.estimate;
}

void write_pgm(const SpectralCube& cube, std::size_t band, const fs::path& path) {
    std::string s = "P2\n" + std::to_string(cube.width()) + " " + std::to_string(cube.height()) +
                    "\n255\n";
    for (std::size_t r = 0; r < cube.height(); ++r) {
        for (std::size_t col = 0; col < cube.width(); ++col) {
            const double v = std::clamp(cube.at(band, r, col), 0.0, 1.0);
            s += std::to_string(static_cast<int>(std::lround(255.0 * v)));
            s += col + 1 == cube.width() ? '\n' : ' ';
        }
    }
    write_text(path, s);
}

void log_trace(const char* stage, const AdmmTrace& t) {
    std::string res;
    if (!t.empty()) {
        for (double r : t.back().residuals) {
            res += (res.empty() ? "" : ",") + fmt_double(r);
        }
    }
    std::cout << stage << ": iterations=" << t.iterations()
              << " converged=" << (t.converged ? "true" : "false") << " residuals=[" << res << "]"
              << std::endl;
    if (!t.converged && !t.empty()) {
        spdlog::warn("{}: stopped at max_iter before residuals fell below eps", stage);
    }
}

}  // namespace

void cmd_simulate(const RunConfig& c) {
    const SpectralCube hs = load_hs(c);
    const Srf srf = load_srf(c, hs.bands());
    const SpectralCube ms = simulate_ms(hs, srf);
    ensure_dir(c.out);
    save_cube(ms, c.out / "ms.bin");

    Json manifest{{"hs", manifest_path(c.hs, c.out)},
                  {"srf", manifest_path(c.srf, c.out)},
                  {"ms", "ms.bin"},
                  {"width", hs.width()},
                  {"height", hs.height()},
                  {"bands", hs.bands()},
                  {"channels", ms.bands()}};
    if (c.overlap) {
        const OverlapLayout layout = make_layout(hs.width(), hs.height(), *c.overlap);
        manifest["overlap"] = range_json(*c.overlap);
        manifest["n_in"] = layout.in_pixels.size();
        manifest["n_out"] = layout.out_pixels.size();
    }
    write_json(c.out / "simulate.json", manifest);
    spdlog::info("simulated {} channel MS cube ({} x {})", ms.bands(), ms.width(), ms.height());
}

void cmd_train(const RunConfig& c) {
    const OverlapSplit split = load_split(c);
    const DStepParams params = dstep_params(c);
    spdlog::info("training on {} overlap pixels", split.n_in());
    const DStepResult r = run_dstep(split, params);
    ensure_dir(c.out);
    save_matrix_cube(r.dict.d_h, c.out / "dict_h.bin");
    save_matrix_cube(r.dict.d_m, c.out / "dict_m.bin");
    save_trace_csv(r.trace, c.out / "dstep_trace.csv");

    DStepParams resolved = params;
    resolved.dict_size = static_cast<std::size_t>(r.dict.atoms());
    Json trace = trace_json(r.trace);
    trace["initial_objective"] = number(r.initial_objective);
    write_json(c.out / "dictionary.json",
               Json{{"P", r.dict.d_h.rows()},
                    {"Q", r.dict.d_m.rows()},
                    {"L", r.dict.atoms()},
                    {"N", split.n_in()},
                    {"overlap", range_json(split.layout.overlap)},
                    {"params", dstep_json(resolved)},
                    {"trace", trace}});
    log_trace("dstep", r.trace);
}

void cmd_reconstruct(const RunConfig& c) {
    const ColumnRange overlap = require_overlap(c);
    std::optional<SpectralCube> hs;
    if (c.ms.empty()) {
        hs = load_hs(c);
    }
    const SpectralCube ms = resolve_ms(c, hs);
    const OverlapLayout layout = make_layout(ms.width(), ms.height(), overlap);

    const fs::path dir = dictionary_dir(c);
    require_input(dir / "dict_h.bin", "dictionary");
    require_input(dir / "dict_m.bin", "dictionary");
    const Matrix d_h = load_matrix_cube(dir / "dict_h.bin");
    const Matrix d_m = load_matrix_cube(dir / "dict_m.bin");
    if (d_m.rows() != static_cast<Eigen::Index>(ms.bands()) || d_m.cols() != d_h.cols()) {
        throw ValidationError("dictionary shapes do not match the MS cube");
    }
    const SStepParams params = sstep_params(c);
    ensure_dir(c.out);

    const Matrix m_out = gather_pixels(ms, layout.out_pixels);
    SStepResult coded;
    if (m_out.cols() == 0) {
        spdlog::warn("overlap covers the whole image; the estimate is empty");
        coded.y = Matrix(d_h.cols(), 0);
    } else {
        coded = run_sstep(m_out, d_m, params);
    }
    const Matrix h_out = reconstruct(d_h, coded.y);
    const SpectralCube estimate = out_region_cube(h_out, layout);
    save_cube(estimate, c.out / "estimate.bin");
    save_matrix_cube(coded.y, c.out / "codes.bin");
    save_trace_csv(coded.trace, c.out / "sstep_trace.csv");

    std::vector<std::size_t> bands = c.pgm_bands;
    if (bands.empty()) {
        bands.push_back(estimate.bands() / 2);
    }
    if (estimate.pixel_count() > 0) {
        for (std::size_t b : bands) {
            if (b >= estimate.bands()) {
                throw ValidationError("pgm band " + std::to_string(b) + " out of range");
            }
            write_pgm(estimate, b, c.out / ("estimate_band_" + std::to_string(b) + ".pgm"));
        }
    }
    write_json(c.out / "reconstruct.json",
               Json{{"estimate", "estimate.bin"},
                    {"width", estimate.width()},
                    {"height", estimate.height()},
                    {"bands", estimate.bands()},
                    {"n_out", m_out.cols()},
                    {"params", sstep_json(params)},
                    {"trace", trace_json(coded.trace)}});
    log_trace("sstep", coded.trace);
}

void cmd_evaluate(const RunConfig& c) {
    const ColumnRange overlap = require_overlap(c);
    const SpectralCube hs = load_hs(c);
    const OverlapLayout layout = make_layout(hs.width(), hs.height(), overlap);
    const fs::path est_path = estimate_path(c);
    require_input(est_path, "estimate");
    const SpectralCube estimate = load_cube(est_path);
    if (estimate.bands() != hs.bands() || estimate.width() != layout.out_width() ||
        estimate.height() != layout.height) {
        throw ValidationError("estimate shape does not match the out-of-overlap region");
    }
    const Matrix reference = gather_pixels(hs, layout.out_pixels);
    const Matrix est = estimate.to_pixels();
    if (reference.cols() == 0) {
        throw ValidationError("evaluate: the out-of-overlap region is empty");
    }

    const ReconReport recon = recon_metrics(reference, est);
    if (recon.sad_excluded_pixels > 0) {
        spdlog::warn("{} zero-norm pixels excluded from SAD", recon.sad_excluded_pixels);
    }
    if (!recon.ergas) {
        spdlog::warn("ERGAS undefined: a reference band has zero mean");
    }
    Json report{{"n_out", reference.cols()}, {"recon", recon_json(recon)}};
    std::vector<std::pair<std::string, std::string>> row{
        {"rmse", fmt_double(recon.rmse)},
        {"psnr", fmt_double(recon.psnr)},
        {"sad", fmt_double(recon.sad)},
        {"ssim", fmt_double(recon.ssim)},
        {"ergas", recon.ergas ? fmt_double(*recon.ergas) : ""}};

    if (!c.labels.empty() && !fs::exists(c.labels)) {
        spdlog::warn("labels file '{}' not found; skipping classification", c.labels.string());
    } else if (!c.labels.empty()) {
        const LabelField labels = load_label_split(c.labels, hs.width(), hs.height());
        const Matrix in = gather_pixels(hs, layout.in_pixels);
        const SpectralCube product = reassemble(in, est, layout);
        const Matrix full_est = product.to_pixels();
        const Matrix full_ref = hs.to_pixels();
        std::vector<Eigen::Index> train;
        std::vector<Eigen::Index> test;
        std::vector<int> train_labels;
        std::vector<int> truth;
        for (std::size_t p = 0; p < labels.labels.size(); ++p) {
            if (labels.labels[p] <= 0) {
                continue;
            }
            if (labels.split[p] == SampleSplit::train) {
                train.push_back(static_cast<Eigen::Index>(p));
                train_labels.push_back(labels.labels[p]);
            } else if (labels.split[p] == SampleSplit::test) {
                test.push_back(static_cast<Eigen::Index>(p));
                truth.push_back(labels.labels[p]);
            }
        }
        if (train.empty() || test.empty()) {
            throw ValidationError("labels: need at least one train and one test pixel");
        }
        const auto classify = [&](const Matrix& pixels) {
            return classification_scores(
                nn_classify(pixels(Eigen::all, train), train_labels, pixels(Eigen::all, test)), truth);
        };
        const ClassReport cls = classify(full_est);
        report["classification"] = class_json(cls);
        report["classification_reference"] = class_json(classify(full_ref));
        row.emplace_back("oa", fmt_double(cls.oa));
        row.emplace_back("aa", fmt_double(cls.aa));
        row.emplace_back("kappa", fmt_double(cls.kappa));
    }

    if (!c.endmembers.empty() && !fs::exists(c.endmembers)) {
        spdlog::warn("endmembers file '{}' not found; skipping unmixing", c.endmembers.string());
    } else if (!c.endmembers.empty()) {
        const Matrix e = load_matrix_csv(c.endmembers);
        if (e.rows() != reference.rows()) {
            throw ValidationError("endmembers: expected " + std::to_string(reference.rows()) +
                                  " rows (bands), got " + std::to_string(e.rows()));
        }
        Matrix truth_abund;
        if (!c.abundances.empty()) {
            require_input(c.abundances, "abundances");
            const Matrix all = load_matrix_csv(c.abundances);
            if (all.rows() != e.cols() ||
                all.cols() != static_cast<Eigen::Index>(hs.pixel_count())) {
                throw ValidationError("abundances: expected K x (width * height)");
            }
            truth_abund.resize(all.rows(), reference.cols());
            for (std::size_t j = 0; j < layout.out_pixels.size(); ++j) {
                truth_abund.col(static_cast<Eigen::Index>(j)) =
                    all.col(static_cast<Eigen::Index>(layout.out_pixels[j]));
            }
        } else {
            truth_abund = fclsu(reference, e);
        }
        const UnmixReport u = unmix_scores(fclsu(est, e), truth_abund, reference, e);
        report["unmixing"] = Json{{"endmembers", e.cols()},
                                  {"armse", mean_std_json(u.armse)},
                                  {"rrmse", mean_std_json(u.rrmse)},
                                  {"asam", mean_std_json(u.asam)}};
        row.emplace_back("armse_mean", fmt_double(u.armse.mean));
        row.emplace_back("armse_std", fmt_double(u.armse.std));
        row.emplace_back("rrmse_mean", fmt_double(u.rrmse.mean));
        row.emplace_back("rrmse_std", fmt_double(u.rrmse.std));
        row.emplace_back("asam_mean", fmt_double(u.asam.mean));
        row.emplace_back("asam_std", fmt_double(u.asam.std));
    }

    ensure_dir(c.out);
    write_json(c.out / "report.json", report);
    if (c.csv) {
        std::string header;
        std::string values;
        for (const auto& [k, v] : row) {
            header += (header.empty() ? "" : ",") + k;
            values += (values.empty() ? "" : ",") + v;
        }
        write_text(c.out / "report.csv", header + "\n" + values + "\n");
    }
    std::cout << "evaluate: rmse=" << fmt_double(recon.rmse) << " psnr=" << fmt_double(recon.psnr)
              << " sad=" << fmt_double(recon.sad) << std::endl;
}

void cmd_baselines(const RunConfig& c) {
    const OverlapSplit split = load_split(c);
    if (split.n_out() == 0) {
        throw ValidationError("baselines: the out-of-overlap region is empty");
    }
    const DStepParams dparams = dstep_params(c);
    const SStepParams sparams = sstep_params(c);
    ensure_dir(c.out);

    struct Row {
        std::string method;
        ReconReport report;
    };
    std::vector<Row> rows;
    const auto record = [&](const std::string& name, const Matrix& h_out) {
        save_cube(out_region_cube(h_out, split.layout), c.out / ("baseline_" + name + ".bin"));
        rows.push_back({name, recon_metrics(*split.h_out_ref, h_out)});
        spdlog::info("{}: rmse {}", name, rows.back().report.rmse);
    };

    if (c.baselines.jslol) {
        record("jslol", jslol_pipeline(split, dparams, sparams).h_out);
    }
    if (c.baselines.pwc) {
        record("pwc", pwc(split, sparams.threads));
    }
    if (c.baselines.regression) {
        record("regression", apply_regression(fit_regression(split, c.baselines.ridge), split.m_out));
    }
    if (c.baselines.ms_dictionary) {
        std::size_t budget = c.baselines.atom_budget;
        const auto n = static_cast<std::size_t>(split.n_in());
        if (budget == 0) {
            budget = dparams.dict_size != 0
                         ? dparams.dict_size
                         : default_dict_size(static_cast<std::size_t>(split.h_in.rows()),
                                             static_cast<std::size_t>(split.m_in.rows()), n);
            budget = std::min(budget, n);
        }
        record("ms_dictionary", ms_dictionary_baseline(split, sparams, budget, c.seed).reconstruction);
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.report.rmse < b.report.rmse; });
    Json table = Json::array();
    std::string csv = "rank,method,rmse,psnr,sad,ssim,ergas\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ReconReport& r = rows[i].report;
        Json entry{{"rank", i + 1}, {"method", rows[i].method}};
        entry.update(recon_json(r));
        table.push_back(entry);
        csv += std::to_string(i + 1) + "," + rows[i].method + "," + fmt_double(r.rmse) + "," +
               fmt_double(r.psnr) + "," + fmt_double(r.sad) + "," + fmt_double(r.ssim) + "," +
               (r.ergas ? fmt_double(*r.ergas) : "") + "\n";
    }
    write_json(c.out / "baselines.json",
               Json{{"n_in", split.n_in()}, {"n_out", split.n_out()}, {"methods", table}});
    write_text(c.out / "baselines.csv", csv);
    std::cout << csv;
}

void cmd_demo(const RunConfig& config) {
    PlantedSpec spec;
    spec.seed = config.seed;
    const PlantedScene scene = make_planted_scene(spec);
    const PlantedSolverParams pinned = planted_solver_params(spec, config.seed);

    RunConfig c = config;
    c.dstep = pinned.dstep;
    c.dstep.strict_paper_thresholds = config.dstep.strict_paper_thresholds;
    c.sstep = pinned.sstep;
    c.overlap = scene.overlap;
    c.hs = c.out / "hs.bin";
    c.srf = c.out / "srf.csv";
    c.ms.clear();
    c.dictionary.clear();
    c.estimate.clear();
    c.labels = c.out / "labels.csv";
    c.endmembers = c.out / "endmembers.csv";
    c.abundances = c.out / "abundances.csv";
    c.csv = true;

    ensure_dir(c.out);
    save_cube(scene.hs, c.hs);
    save_matrix_csv(scene.srf.matrix(), c.srf);
    save_matrix_csv(scene.d_h, c.endmembers);
    save_matrix_csv(scene.codes, c.abundances);

    // Class = dominant atom modulo 4; every fifth labelled pixel trains.
    std::string labels = "row,col,class,split\n";
    for (std::size_t r = 0; r < spec.height; ++r) {
        for (std::size_t col = 0; col < spec.width; ++col) {
            const std::size_t p = r * spec.width + col;
            Eigen::Index best = 0;
            scene.codes.col(static_cast<Eigen::Index>(p)).maxCoeff(&best);
            labels += std::to_string(r) + "," + std::to_string(col) + "," +
                      std::to_string(1 + best % 4) + "," + (p % 5 == 0 ? "train" : "test") + "\n";
        }
    }
    write_text(c.labels, labels);

    cmd_simulate(c);
    cmd_train(c);
    cmd_reconstruct(c);
    cmd_evaluate(c);
    cmd_baselines(c);
    write_json(c.out / "demo.json",
               Json{{"seed", config.seed},
                    {"scene",
                     Json{{"bands", spec.bands},
                          {"channels", spec.channels},
                          {"atoms", spec.atoms},
                          {"sparsity", spec.sparsity},
                          {"width", spec.width},
                          {"height", spec.height},
                          {"overlap", range_json(spec.overlap)}}},
                    {"artifacts",
                     {"dict_h.bin", "dict_m.bin", "codes.bin", "estimate.bin", "report.json",
                      "baselines.json"}}});
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) != nullptr) {
        return kExitValidation;
    }
    if (dynamic_cast<const IoError*>(&e) != nullptr) {
        return kExitIo;
    }
    if (dynamic_cast<const Error*>(&e) != nullptr) {
        return kExitDivergence;
    }
    return kExitFailure;
}

namespace {

const char* kind_for(int code) {
    switch (code) {
        case kExitValidation:
            return "validation";
        case kExitDivergence:
            return "solver";
        case kExitIo:
            return "io";
        default:
            return "internal";
    }
}

}  // namespace

void configure_logging() {
    spdlog::drop("ssr");
    auto logger = spdlog::stderr_logger_st("ssr");
    logger->set_pattern("[%l] %v");
    const char* env = std::getenv("SSR_LOG_LEVEL");
    const std::string level = env != nullptr ? env : "info";
    if (level == "error") {
        logger->set_level(spdlog::level::err);
    } else if (level == "warn") {
        logger->set_level(spdlog::level::warn);
    } else if (level == "debug") {
        logger->set_level(spdlog::level::debug);
    } else {
        logger->set_level(spdlog::level::info);
    }
    spdlog::set_default_logger(logger);
    if (level != "info" && level != "error" && level != "warn" && level != "debug") {
        spdlog::warn("unknown SSR_LOG_LEVEL '{}', using info", level);
    }
}

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> threads;
    bool strict = false;
    bool csv = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON run configuration");
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--strict-paper-thresholds", f.strict,
                  "Threshold singular values at beta/mu and codes at alpha/mu");
}

RunConfig resolve(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (f.seed) {
        c.seed = *f.seed;
    }
    c.dstep.seed = c.seed;
    if (!f.out.empty()) {
        c.out = f.out;
    }
    if (f.threads) {
        c.threads = *f.threads;
    }
    if (f.strict) {
        c.dstep.strict_paper_thresholds = true;
    }
    if (f.csv) {
        c.csv = true;
    }
    return c;
}

void report_error(int code, const std::string& message) {
    std::cerr << Json{{"error", kind_for(code)}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Spectral super-resolution of multispectral images (J-SLoL)", "ssr"};
    app.require_subcommand(1);
    Flags flags;
    struct Verb {
        const char* name;
        const char* help;
        void (*fn)(const RunConfig&);
    };
    const Verb verbs[] = {
        {"simulate", "Simulate the MS cube from the HS cube and SRF", cmd_simulate},
        {"train", "Learn the coupled dictionaries on the overlap", cmd_train},
        {"reconstruct", "Reconstruct HS spectra outside the overlap", cmd_reconstruct},
        {"evaluate", "Score an estimate against the reference", cmd_evaluate},
        {"baselines", "Compare J-SLoL with the baseline methods", cmd_baselines},
        {"demo", "Run every stage on a planted synthetic scene", cmd_demo},
    };
    std::vector<std::pair<CLI::App*, const Verb*>> subs;
    for (const Verb& v : verbs) {
        CLI::App* sub = app.add_subcommand(v.name, v.help);
        add_common(sub, flags);
        if (std::string(v.name) == "evaluate" || std::string(v.name) == "demo") {
            sub->add_flag("--csv", flags.csv, "Also write the report as one-row CSV");
        }
        subs.emplace_back(sub, &v);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error(kExitValidation, e.what());
        return kExitValidation;
    }

    configure_logging();
    try {
        for (const auto& [sub, verb] : subs) {
            if (sub->parsed()) {
                verb->fn(resolve(flags));
            }
        }
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        report_error(code, e.what());
        return code;
    }
    return kExitOk;
}

}  // namespace jslol::cli
