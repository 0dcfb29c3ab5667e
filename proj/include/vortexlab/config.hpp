#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "io.hpp"
#include "solver.hpp"
#include "toml_lite.hpp"

namespace vortexlab {

// Exit-code bearing error for the command-line layer: 1 config, 2 convergence,
// 3 invariant violation.
struct CliError : std::runtime_error {
    int exit_code;
    std::string stage;
    CliError(int code, std::string stage_, const std::string& msg)
        : std::runtime_error(msg), exit_code(code), stage(std::move(stage_)) {}
};

struct RunConfig {
    int nx = 256, ny = 256;
    double lx = 1.0, ly = 1.0;
    VortexSet vortices;
    double n_frak = 1.0;
    std::vector<CouplingParams> schedule;
    BranchTag seed = BranchTag::topological;
    ConcentratingSeedOptions seed_opts;
    double tol = 1e-10;
    int max_iters = 50;
    std::string out_dir;  // empty: runs/<run_id>
    bool plot = false;
    bool text_fields = false;  // CSV dumps instead of binary

    json canonical;  // parsed config with defaults filled, for hashing
    std::string run_id;

    TorusGrid grid() const { return TorusGrid(nx, ny, lx, ly); }
};

namespace detail {

inline double need_number(const json& j, const char* key, const char* stage) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw CliError(1, stage, std::string("missing or non-numeric '") + key + "'");
    return j.at(key).get<double>();
}

inline std::vector<CouplingParams> expand_schedule(const json& s, double n_frak) {
    std::vector<CouplingParams> out;
    try {
        if (s.is_array()) {
            for (const json& e : s) {
                if (e.contains("eps"))
                    out.push_back(CouplingParams::from_eps_sigma(
                        e.at("eps").get<double>(), e.at("sigma").get<double>(), n_frak));
                else
                    out.push_back(CouplingParams::from_couplings(
                        e.at("alpha").get<double>(), e.at("beta_c").get<double>(), n_frak));
            }
        } else if (s.is_object()) {
            const double e0 = need_number(s, "eps_start", "config");
            const double e1 = need_number(s, "eps_end", "config");
            const int steps = static_cast<int>(need_number(s, "steps", "config"));
            const double rule = s.value("sigma_rule", 1.0);
            if (steps < 1) throw CliError(1, "config", "schedule: steps must be >= 1");
            if (!(e0 > 0.0) || !(e1 > 0.0))
                throw CliError(1, "config", "schedule: eps endpoints must be positive");
            for (int k = 0; k < steps; ++k) {
                const double t = steps == 1 ? 0.0 : double(k) / (steps - 1);
                const double eps = e0 * std::pow(e1 / e0, t);
                out.push_back(
                    CouplingParams::from_eps_sigma(eps, rule * n_frak * eps * eps, n_frak));
            }
        } else {
            throw CliError(1, "config", "schedule must be an array or a generator object");
        }
        validate_schedule(out);
    } catch (const std::invalid_argument& e) {
        throw CliError(1, "config", e.what());
    } catch (const json::exception& e) {
        throw CliError(1, "config", std::string("schedule entry: ") + e.what());
    }
    return out;
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
    RunConfig cfg;
    try {
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            cfg.nx = g.value("nx", 256);
            cfg.ny = g.value("ny", cfg.nx);
            cfg.lx = g.value("lx", 1.0);
            cfg.ly = g.value("ly", cfg.lx);
        }
        if (cfg.nx < 8 || cfg.ny < 8 || !(cfg.lx > 0.0) || !(cfg.ly > 0.0))
            throw CliError(1, "config", "grid: need nx,ny >= 8 and positive lx,ly");

        cfg.n_frak = j.value("n_frak", 1.0);
        if (!(cfg.n_frak > 0.0)) throw CliError(1, "config", "n_frak must be positive");

        if (j.contains("vortices"))
            for (const json& v : j.at("vortices")) {
                Vortex p;
                p.x = v.at("x").get<double>();
                p.y = v.at("y").get<double>();
                p.m = v.value("m", 1);
                if (p.m < 1) throw CliError(1, "config", "vortex multiplicity must be >= 1");
                cfg.vortices.points.push_back(p);
            }

        if (!j.contains("schedule")) throw CliError(1, "config", "missing 'schedule'");
        cfg.schedule = detail::expand_schedule(j.at("schedule"), cfg.n_frak);

        const std::string seed = j.value("seed", "topological");
        if (seed == "topological")
            cfg.seed = BranchTag::topological;
        else if (seed == "concentrating")
            cfg.seed = BranchTag::concentrating;
        else
            throw CliError(1, "config", "seed must be 'topological' or 'concentrating'");

        if (j.contains("seed_options")) {
            const json& so = j.at("seed_options");
            cfg.seed_opts.margin = so.value("margin", cfg.seed_opts.margin);
            cfg.seed_opts.cutoff = so.value("cutoff", cfg.seed_opts.cutoff);
            cfg.seed_opts.u2_offset = so.value("u2_offset", cfg.seed_opts.u2_offset);
            if (so.contains("qx") && so.contains("qy")) {
                cfg.seed_opts.qx = so.at("qx").get<double>();
                cfg.seed_opts.qy = so.at("qy").get<double>();
                cfg.seed_opts.have_site = true;
            }
        }

        cfg.tol = j.value("tol", 1e-10);
        cfg.max_iters = j.value("max_iters", 50);
        if (!(cfg.tol > 0.0) || cfg.max_iters < 1)
            throw CliError(1, "config", "tol must be positive and max_iters >= 1");
        cfg.out_dir = j.value("out", std::string());
        cfg.plot = j.value("plot", false);
        cfg.text_fields = j.value("text_fields", false);
    } catch (const json::exception& e) {
        throw CliError(1, "config", e.what());
    }

    json canon;
    canon["grid"] = {{"nx", cfg.nx}, {"ny", cfg.ny}, {"lx", cfg.lx}, {"ly", cfg.ly}};
    canon["n_frak"] = cfg.n_frak;
    canon["vortices"] = json::array();
    for (const Vortex& v : cfg.vortices.points)
        canon["vortices"].push_back({{"x", v.x}, {"y", v.y}, {"m", v.m}});
    canon["schedule"] = json::array();
    for (const CouplingParams& p : cfg.schedule)
        canon["schedule"].push_back({{"eps", p.eps}, {"sigma", p.sigma}});
    canon["seed"] = cfg.seed == BranchTag::topological ? "topological" : "concentrating";
    canon["seed_options"] = {{"margin", cfg.seed_opts.margin},
                             {"cutoff", cfg.seed_opts.cutoff},
                             {"u2_offset", cfg.seed_opts.u2_offset},
                             {"have_site", cfg.seed_opts.have_site},
                             {"qx", cfg.seed_opts.qx},
                             {"qy", cfg.seed_opts.qy}};
    canon["tol"] = cfg.tol;
    canon["max_iters"] = cfg.max_iters;
    canon["text_fields"] = cfg.text_fields;
    cfg.canonical = canon;
    cfg.run_id = config_hash(canon);
    return cfg;
}

inline json load_config_json(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw CliError(1, "config", e.what());
    }
    const bool is_toml = path.size() > 5 && path.substr(path.size() - 5) == ".toml";
    try {
        return is_toml ? toml::parse(text) : json::parse(text);
    } catch (const std::exception& e) {
        throw CliError(1, "config", std::string("parse failure: ") + e.what());
    }
}

inline RunConfig load_config(const std::string& path) { return parse_config(load_config_json(path)); }

}  // namespace vortexlab
