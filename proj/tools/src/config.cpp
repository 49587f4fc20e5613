// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "jslol/errors.hpp"

namespace jslol::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key)) {
            throw ValidationError("config: unknown key '" + where + key + "'");
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& target, const std::string& where) {
    if (!obj.contains(key)) {
        return;
    }
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!obj.at(key).is_number_unsigned()) {
            throw ValidationError("config: '" + where + key + "' must be a nonnegative integer");
        }
    }
    try {
        target = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: bad value for '" + where + key + "'");
    }
}

void read_path(const json& obj, const char* key, std::filesystem::path& target) {
    std::string s;
    read(obj, key, s, "");
    if (!s.empty()) {
        target = s;
    }
}

void read_dstep(const json& j, DStepParams& p) {
    const std::string w = "dstep.";
    reject_unknown(j,
                   {"alpha", "beta", "gamma", "dict_size", "max_iter", "xi", "eps", "mu0", "mu_max",
                    "strict_paper_thresholds"},
                   w);
    read(j, "alpha", p.alpha, w);
    read(j, "beta", p.beta, w);
    read(j, "gamma", p.gamma, w);
    read(j, "dict_size", p.dict_size, w);
    read(j, "max_iter", p.max_iter, w);
    read(j, "xi", p.xi, w);
    read(j, "eps", p.eps, w);
    read(j, "mu0", p.mu0, w);
    read(j, "mu_max", p.mu_max, w);
    read(j, "strict_paper_thresholds", p.strict_paper_thresholds, w);
}

void read_sstep(const json& j, SStepParams& p) {
    const std::string w = "sstep.";
    reject_unknown(j, {"eta", "max_iter", "xi", "eps", "rho0", "rho_max", "block_size"}, w);
    read(j, "eta", p.eta, w);
    read(j, "max_iter", p.max_iter, w);
    read(j, "xi", p.xi, w);
    read(j, "eps", p.eps, w);
    read(j, "rho0", p.rho0, w);
    read(j, "rho_max", p.rho_max, w);
    read(j, "block_size", p.block_size, w);
}

void read_baselines(const json& j, BaselineToggles& b) {
    const std::string w = "baselines.";
    reject_unknown(j, {"pwc", "regression", "ms_dictionary", "jslol", "ridge", "atom_budget"}, w);
    read(j, "pwc", b.pwc, w);
    read(j, "regression", b.regression, w);
    read(j, "ms_dictionary", b.ms_dictionary, w);
    read(j, "jslol", b.jslol, w);
    read(j, "ridge", b.ridge, w);
    read(j, "atom_budget", b.atom_budget, w);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("config: top level must be an object");
    }
    reject_unknown(doc,
                   {"hs", "ms", "srf", "labels", "endmembers", "abundances", "dictionary",
                    "estimate", "out", "overlap", "dstep", "sstep", "baselines", "seed", "threads",
                    "pgm_bands", "csv"},
                   "");
    RunConfig c;
    read_path(doc, "hs", c.hs);
    read_path(doc, "ms", c.ms);
    read_path(doc, "srf", c.srf);
    read_path(doc, "labels", c.labels);
    read_path(doc, "endmembers", c.endmembers);
    read_path(doc, "abundances", c.abundances);
    read_path(doc, "dictionary", c.dictionary);
    read_path(doc, "estimate", c.estimate);
    read_path(doc, "out", c.out);
    if (doc.contains("overlap")) {
        const json& o = doc.at("overlap");
        if (!o.is_object()) {
            throw ValidationError("config: 'overlap' must be {\"begin\": b, \"end\": e}");
        }
        reject_unknown(o, {"begin", "end"}, "overlap.");
        ColumnRange r;
        read(o, "begin", r.begin, "overlap.");
        read(o, "end", r.end, "overlap.");
        c.overlap = r;
    }
    if (doc.contains("dstep")) {
        read_dstep(doc.at("dstep"), c.dstep);
    }
    if (doc.contains("sstep")) {
        read_sstep(doc.at("sstep"), c.sstep);
    }
    if (doc.contains("baselines")) {
        read_baselines(doc.at("baselines"), c.baselines);
    }
    read(doc, "seed", c.seed, "");
    read(doc, "threads", c.threads, "");
    read(doc, "pgm_bands", c.pgm_bands, "");
    read(doc, "csv", c.csv, "");
    c.dstep.seed = c.seed;
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    require_input(path, "config");
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void require_input(const std::filesystem::path& path, const char* what) {
    if (path.empty()) {
        throw ValidationError(std::string("missing input: ") + what + " path not set");
    }
    if (!std::filesystem::exists(path)) {
        throw ValidationError(std::string("missing input: ") + what + " '" + path.string() +
                              "' does not exist");
    }
}

}  // namespace jslol::cli
