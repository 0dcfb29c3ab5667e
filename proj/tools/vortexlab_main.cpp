#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vortexlab/vortexlab.hpp"

namespace fs = std::filesystem;
using vortexlab::CliError;
using vortexlab::json;

namespace {

int threads_requested() {
    const char* e = std::getenv("VORTEXLAB_THREADS");
    if (!e) return 1;
    const int n = std::atoi(e);
    return n > 0 ? n : 1;
}

void emit_error(int code, const std::string& stage, const std::string& message) {
    json j = {{"code", code}, {"stage", stage}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

json step_json(int index, const vortexlab::SolutionPair& sol, const vortexlab::IntegralIdentity& id,
               const std::string& v1_file, const std::string& u2_file) {
    const char* branch =
        sol.branch_tag == vortexlab::BranchTag::topological ? "topological" : "concentrating";
    const vortexlab::MassIntegrals mi = vortexlab::mass_integrals(sol);
    return json{{"index", index},
                {"eps", sol.params.eps},
                {"sigma", sol.params.sigma},
                {"converged", sol.converged},
                {"spurious", sol.spurious},
                {"branch", branch},
                {"newton_iters", sol.newton_iters},
                {"residual_inf", sol.residual_inf},
                {"effective_tol", sol.effective_tol},
                {"stop_reason", sol.trace.stop_reason},
                {"i1", mi.i1},
                {"i2", mi.i2},
                {"d1", id.d1},
                {"d2", id.d2},
                {"scale1", id.scale1},
                {"scale2", id.scale2},
                {"files", {{"v1", v1_file}, {"u2", u2_file}}}};
}

json report_json(const vortexlab::DiagnosticsReport& rep) {
    json steps = json::array();
    for (const vortexlab::StepRecord& r : rep.steps)
        steps.push_back({{"eps", r.eps},
                         {"sigma", r.sigma},
                         {"i1", r.i1},
                         {"i2", r.i2},
                         {"sup_u1", r.sup_u1},
                         {"sup_u2", r.sup_u2},
                         {"sup_w1", r.sup_w1},
                         {"sup_w2", r.sup_w2},
                         {"grad_v1_scaled", r.grad_v1_scaled},
                         {"grad_u2", r.grad_u2}});
    json sites = json::array();
    for (const vortexlab::BlowupSite& s : rep.blowup_sites)
        sites.push_back({{"x", s.x},
                         {"y", s.y},
                         {"mass", s.mass},
                         {"radius", s.radius},
                         {"peak_w1", s.peak_w1}});
    json poho = json::array();
    for (const vortexlab::PohozaevRecord& p : rep.pohozaev)
        poho.push_back({{"r", p.r},
                        {"c0", p.c0},
                        {"c1", p.c1},
                        {"lhs", p.lhs},
                        {"rhs", p.rhs},
                        {"residual", p.residual},
                        {"scale", p.scale}});
    return json{{"first_class", vortexlab::to_string(rep.first_class)},
                {"second_class", vortexlab::to_string(rep.second_class)},
                {"steps", steps},
                {"blowup_sites", sites},
                {"pohozaev", poho},
                {"gradients",
                 {{"max_grad_v1_scaled", rep.gradients.max_grad_v1_scaled},
                  {"max_grad_u2", rep.gradients.max_grad_u2},
                  {"growth_v1", rep.gradients.growth_v1},
                  {"growth_u2", rep.gradients.growth_u2},
                  {"flagged", rep.gradients.flagged}}},
                {"warnings", rep.warnings}};
}

void write_summary_csv(const vortexlab::DiagnosticsReport& rep, const std::string& path) {
    std::ostringstream out;
    out.precision(17);
    out << "index,eps,sigma,i1,i2,sup_u1,sup_u2,sup_w1,sup_w2,grad_v1_scaled,grad_u2\n";
    for (std::size_t k = 0; k < rep.steps.size(); ++k) {
        const vortexlab::StepRecord& r = rep.steps[k];
        out << k << ',' << r.eps << ',' << r.sigma << ',' << r.i1 << ',' << r.i2 << ','
            << r.sup_u1 << ',' << r.sup_u2 << ',' << r.sup_w1 << ',' << r.sup_w2 << ','
            << r.grad_v1_scaled << ',' << r.grad_u2 << '\n';
    }
    vortexlab::write_text_file(path, out.str());
}

void write_run_plots(const std::vector<vortexlab::SolutionPair>& steps,
                     const vortexlab::DiagnosticsReport& rep, const std::string& dir) {
    if (steps.empty()) return;
    fs::create_directories(dir);
    vortexlab::PlotSeries u2n{"|u2|_inf", {}, {}}, ref{"eps^2", {}, {}};
    for (const vortexlab::StepRecord& r : rep.steps) {
        u2n.x.push_back(r.eps);
        u2n.y.push_back(std::max(std::abs(r.sup_u2), 1e-300));
        ref.x.push_back(r.eps);
        ref.y.push_back(r.eps * r.eps);
    }
    vortexlab::svg_line_plot(dir + "/u2_scaling.svg", "second component scaling", {u2n, ref},
                             true, true);
    vortexlab::svg_heatmap(dir + "/u1_final.svg", "u1, final step", steps.back().u1());
    vortexlab::svg_heatmap(dir + "/u2_final.svg", "u2, final step", steps.back().u2);
}

// Writes every artifact of a run directory; returns the manifest.
json write_run_outputs(const vortexlab::RunConfig& cfg,
                       const std::vector<vortexlab::SolutionPair>& steps, bool completed,
                       int failed_index, const vortexlab::SolutionPair* failure,
                       const std::string& out_dir) {
    fs::create_directories(out_dir);
    json manifest;
    manifest["format"] = "vortexlab-run/1";
    manifest["run_id"] = cfg.run_id;
    manifest["config"] = cfg.canonical;
    manifest["threads"] = {{"requested", threads_requested()}, {"used", 1}};
    manifest["completed"] = completed;
    manifest["failed_index"] = failed_index;

    json jsteps = json::array();
    for (std::size_t k = 0; k < steps.size(); ++k) {
        char v1n[32], u2n[32];
        std::snprintf(v1n, sizeof v1n, "step%02zu_v1.bin", k);
        std::snprintf(u2n, sizeof u2n, "step%02zu_u2.bin", k);
        vortexlab::dump_field_binary(steps[k].v1, "v1", out_dir + "/" + v1n);
        vortexlab::dump_field_binary(steps[k].u2, "u2", out_dir + "/" + u2n);
        if (cfg.text_fields) {
            vortexlab::dump_field_csv(steps[k].u1(),
                                      out_dir + "/step" + std::to_string(k) + "_u1.csv");
            vortexlab::dump_field_csv(steps[k].u2,
                                      out_dir + "/step" + std::to_string(k) + "_u2.csv");
        }
        const vortexlab::IntegralIdentity id = vortexlab::integral_identity_check(steps[k]);
        jsteps.push_back(step_json(int(k), steps[k], id, v1n, u2n));
    }
    manifest["steps"] = jsteps;

    if (failure) {
        json trace = {{"residual_history", failure->trace.residual_history},
                      {"step_lengths", failure->trace.step_lengths},
                      {"krylov_iters", failure->trace.krylov_iters},
                      {"overflow_hit", failure->trace.overflow_hit},
                      {"stop_reason", failure->trace.stop_reason}};
        manifest["failure"] = {{"index", failed_index},
                               {"eps", failure->params.eps},
                               {"sigma", failure->params.sigma},
                               {"residual_inf", failure->residual_inf},
                               {"trace", trace}};
    }

    vortexlab::DiagnosticsReport rep = vortexlab::diagnose_run(steps);
    vortexlab::write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
    vortexlab::write_text_file(out_dir + "/diagnostics.json", report_json(rep).dump(2) + "\n");
    write_summary_csv(rep, out_dir + "/summary.csv");
    if (cfg.plot) write_run_plots(steps, rep, out_dir + "/plots");
    return manifest;
}

// exit-3 gate shared by solve and continue; i1 is reported but not gated here
// because its strict bound carries an O(eps^2) finite-coupling excess.
void check_run_invariants(const vortexlab::RunConfig& cfg,
                          const std::vector<vortexlab::SolutionPair>& steps) {
    const double area = cfg.lx * cfg.ly;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const vortexlab::SolutionPair& s = steps[k];
        if (s.spurious)
            throw CliError(3, "invariant",
                           "step " + std::to_string(k) + ": converged field is not negative");
        const vortexlab::IntegralIdentity id = vortexlab::integral_identity_check(s);
        if (id.d1 > 1e-6 * std::max(id.scale1, 1.0) || id.d2 > 1e-6 * std::max(id.scale2, 1.0))
            throw CliError(3, "invariant",
                           "step " + std::to_string(k) + ": integral identity defect " +
                               std::to_string(std::max(id.d1, id.d2)));
        const vortexlab::MassIntegrals mi = vortexlab::mass_integrals(s);
        if (mi.i2 > 2.0 * cfg.n_frak * area * (1.0 + 1e-6) + 1e-9)
            throw CliError(3, "invariant",
                           "step " + std::to_string(k) + ": i2 exceeds 2 N |T|");
    }
}

std::string resolve_out_dir(const vortexlab::RunConfig& cfg) {
    return cfg.out_dir.empty() ? "runs/" + cfg.run_id : cfg.out_dir;
}

int cmd_solve(const vortexlab::RunConfig& cfg_full) {
    vortexlab::RunConfig cfg = cfg_full;
    cfg.schedule.resize(1);  // single solve: first schedule entry
    const vortexlab::TorusGrid g = cfg.grid();
    const vortexlab::ScalarField u0 = vortexlab::background_u0(g, cfg.vortices);

    auto seed = cfg.seed == vortexlab::BranchTag::topological
                    ? vortexlab::topological_seed(u0)
                    : vortexlab::concentrating_seed(u0, cfg.schedule[0].eps, cfg.vortices,
                                                    cfg.seed_opts);
    vortexlab::NewtonOptions opts;
    opts.tol = cfg.tol;
    opts.max_iters = cfg.max_iters;
    vortexlab::SolutionPair sol = vortexlab::newton_solve(seed.first, seed.second, cfg.schedule[0],
                                                          cfg.vortices, u0, opts, cfg.seed);
    const std::string out = resolve_out_dir(cfg);
    std::vector<vortexlab::SolutionPair> steps;
    if (sol.converged) steps.push_back(sol);
    write_run_outputs(cfg, steps, sol.converged, sol.converged ? -1 : 0,
                      sol.converged ? nullptr : &sol, out);
    std::cout << "run " << cfg.run_id << " -> " << out << '\n';
    if (!sol.converged)
        throw CliError(2, "convergence",
                       "newton did not converge: " + sol.trace.stop_reason +
                           " (residual " + std::to_string(sol.residual_inf) + ")");
    check_run_invariants(cfg, steps);
    return 0;
}

int cmd_continue(const vortexlab::RunConfig& cfg) {
    if (cfg.vortices.empty())
        throw CliError(1, "config", "continue requires at least one vortex");
    const vortexlab::TorusGrid g = cfg.grid();
    vortexlab::NewtonOptions opts;
    opts.tol = cfg.tol;
    opts.max_iters = cfg.max_iters;
    vortexlab::ContinuationResult res;
    try {
        res = vortexlab::continuation(g, cfg.schedule, cfg.seed, cfg.vortices, opts,
                                      cfg.seed_opts);
    } catch (const std::invalid_argument& e) {
        throw CliError(1, "config", e.what());
    }
    const std::string out = resolve_out_dir(cfg);
    write_run_outputs(cfg, res.steps, res.completed, res.failed_index,
                      res.failed_index >= 0 ? &res.failure : nullptr, out);
    std::cout << "run " << cfg.run_id << " -> " << out << " (" << res.steps.size() << '/'
              << cfg.schedule.size() << " steps)\n";
    if (!res.completed)
        throw CliError(2, "convergence",
                       "schedule stopped at step " + std::to_string(res.failed_index) + ": " +
                           res.failure.trace.stop_reason);
    check_run_invariants(cfg, res.steps);
    return 0;
}

std::vector<vortexlab::SolutionPair> load_run(const std::string& dir, json& manifest) {
    const std::string mpath = dir + "/manifest.json";
    if (!fs::exists(mpath)) throw CliError(1, "io", "no manifest.json in " + dir);
    try {
        manifest = json::parse(vortexlab::read_text_file(mpath));
    } catch (const std::exception& e) {
        throw CliError(1, "io", std::string("manifest: ") + e.what());
    }
    std::vector<vortexlab::SolutionPair> steps;
    try {
        const double n_frak = manifest.at("config").value("n_frak", 1.0);
        vortexlab::VortexSet vs;
        for (const json& v : manifest.at("config").at("vortices"))
            vs.points.push_back({v.at("x").get<double>(), v.at("y").get<double>(),
                                 v.at("m").get<int>()});
        for (const json& st : manifest.at("steps")) {
            vortexlab::LoadedField v1 =
                vortexlab::load_field_binary(dir + "/" + st.at("files").at("v1").get<std::string>());
            vortexlab::LoadedField u2 =
                vortexlab::load_field_binary(dir + "/" + st.at("files").at("u2").get<std::string>());
            const vortexlab::CouplingParams p = vortexlab::CouplingParams::from_eps_sigma(
                st.at("eps").get<double>(), st.at("sigma").get<double>(), n_frak);
            vortexlab::ScalarField u0 = vortexlab::background_u0(v1.field.grid(), vs);
            vortexlab::SolutionPair sol{p, vs, std::move(u0), std::move(v1.field),
                                        std::move(u2.field), 0.0, 0.0, 0, {}, false, false, {}};
            sol.converged = st.value("converged", false);
            sol.residual_inf = st.value("residual_inf", 0.0);
            sol.branch_tag = st.value("branch", std::string("topological")) == "concentrating"
                                 ? vortexlab::BranchTag::concentrating
                                 : vortexlab::BranchTag::topological;
            steps.push_back(std::move(sol));
        }
    } catch (const CliError&) {
        throw;
    } catch (const std::exception& e) {
        throw CliError(1, "io", std::string("corrupt run directory: ") + e.what());
    }
    if (steps.empty()) throw CliError(1, "io", "run directory has no usable steps");
    return steps;
}

int cmd_classify(const std::string& dir) {
    json manifest;
    auto steps = load_run(dir, manifest);
    const vortexlab::DiagnosticsReport rep = vortexlab::diagnose_run(steps);
    std::cout << report_json(rep).dump(2) << '\n';
    return 0;
}

int cmd_report(const std::string& dir, bool plot) {
    json manifest;
    auto steps = load_run(dir, manifest);
    const vortexlab::DiagnosticsReport rep = vortexlab::diagnose_run(steps);

    std::cout << "run " << manifest.value("run_id", std::string("?")) << ", "
              << steps.size() << " step(s), completed="
              << (manifest.value("completed", false) ? "yes" : "no") << "\n";
    std::cout << "first component:  " << vortexlab::to_string(rep.first_class) << "\n"
              << "second component: " << vortexlab::to_string(rep.second_class) << "\n";
    std::printf("%-4s %-10s %-12s %-12s %-12s %-12s\n", "k", "eps", "i1", "i2", "sup_u1",
                "sup_u2");
    for (std::size_t k = 0; k < rep.steps.size(); ++k) {
        const vortexlab::StepRecord& r = rep.steps[k];
        std::printf("%-4zu %-10.5f %-12.6f %-12.6f %-12.4e %-12.4e\n", k, r.eps, r.i1, r.i2,
                    r.sup_u1, r.sup_u2);
    }
    for (const vortexlab::BlowupSite& s : rep.blowup_sites)
        std::printf("site (%.4f, %.4f): mass %.6f in ball %.3f, peak w1 %.3f\n", s.x, s.y,
                    s.mass, s.radius, s.peak_w1);
    for (const vortexlab::PohozaevRecord& p : rep.pohozaev)
        std::printf("pohozaev r=%.3f: residual %.3e (scale %.3e)\n", p.r, p.residual, p.scale);
    for (const std::string& w : rep.warnings) std::cout << "warning: " << w << '\n';

    write_summary_csv(rep, dir + "/summary.csv");
    vortexlab::write_text_file(dir + "/diagnostics.json", report_json(rep).dump(2) + "\n");
    if (plot) {
        std::vector<vortexlab::SolutionPair> owned;
        owned.swap(steps);
        vortexlab::RunConfig dummy;
        write_run_plots(owned, rep, dir + "/plots");
    }
    return 0;
}

int cmd_radial(int m, const std::vector<double>& svals, const std::string& out_dir, double tol,
               double r_max, bool plot) {
    if (svals.empty()) throw CliError(1, "usage", "radial: provide at least one value via --s");
    vortexlab::ShootOptions opts;
    if (tol > 0.0) opts.tol = tol;
    if (r_max > 0.0) opts.r_max = r_max;

    fs::create_directories(out_dir);
    std::ostringstream csv;
    csv.precision(17);
    csv << "m,s,beta,boundary_class,partial,r_max,int_ew,int_e2w,flux_rel_ew,flux_rel_e2w\n";
    bool identity_failure = false;
    std::vector<double> xs, ys;
    std::printf("%-4s %-8s %-18s %-14s\n", "m", "s", "beta", "class");
    for (double s : svals) {
        vortexlab::RadialProfile prof;
        try {
            prof = vortexlab::shoot(m, s, opts);
        } catch (const std::invalid_argument& e) {
            throw CliError(1, "usage", e.what());
        }
        const std::string cls = vortexlab::boundary_label(prof);
        std::printf("%-4d %-8.4g %-18.12f %-14s\n", m, s, prof.beta, cls.c_str());
        csv << m << ',' << s << ',' << prof.beta << ',' << cls << ',' << (prof.partial ? 1 : 0)
            << ',' << prof.r_max << ',' << prof.int_ew << ',' << prof.int_e2w << ',';
        if (cls == "log_divergent" && !prof.partial) {
            const vortexlab::FluxIdentities fi = vortexlab::flux_identities(prof);
            csv << fi.rel_ew << ',' << fi.rel_e2w << '\n';
            if (fi.rel_ew > 1e-4 || fi.rel_e2w > 1e-4) identity_failure = true;
            char base[64];
            std::snprintf(base, sizeof base, "profile_m%d_s%g", m, s);
            vortexlab::dump_profile_csv(prof, out_dir + "/" + base + ".csv");
            vortexlab::write_text_file(out_dir + "/" + base + ".json",
                                       vortexlab::profile_metadata(prof).dump(2) + "\n");
        } else {
            csv << ",\n";
        }
        xs.push_back(s);
        ys.push_back(prof.beta);
    }
    vortexlab::write_text_file(out_dir + "/beta_table.csv", csv.str());
    if (plot && xs.size() > 1)
        vortexlab::svg_line_plot(out_dir + "/beta_of_s.svg", "beta(s)",
                                 {vortexlab::PlotSeries{"beta", xs, ys}});
    if (identity_failure)
        throw CliError(3, "invariant", "flux identity defect above 1e-4 in the table");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-component vortex equation toolbox"};
    app.require_subcommand(1);

    // radial
    auto* rad = app.add_subcommand("radial", "shoot radial profiles and tabulate beta(s)");
    int rad_m = 0;
    std::vector<double> rad_s;
    std::string rad_out = ".";
    double rad_tol = 0.0, rad_rmax = 0.0;
    bool rad_plot = false;
    rad->add_option("--m", rad_m, "vortex multiplicity at the origin");
    rad->add_option("--s", rad_s, "shooting parameters, comma separated")
        ->delimiter(',')
        ->required();
    rad->add_option("--out", rad_out, "output directory");
    rad->add_option("--tol", rad_tol, "integrator tolerance");
    rad->add_option("--r-max", rad_rmax, "override integration range");
    rad->add_flag("--plot", rad_plot, "write beta(s) figure");

    // shared config-driven commands
    std::string cfg_path, cfg_out;
    int cfg_grid = 0;
    double cfg_tol = 0.0;
    bool cfg_plot = false;
    auto add_config_opts = [&](CLI::App* c) {
        c->add_option("--config", cfg_path, "run configuration (.json or .toml)")->required();
        c->add_option("--out", cfg_out, "output directory override");
        c->add_option("--grid", cfg_grid, "square grid size override");
        c->add_option("--tol", cfg_tol, "newton tolerance override");
        c->add_flag("--plot", cfg_plot, "write figures");
    };
    auto* solve = app.add_subcommand("solve", "solve at the first schedule entry");
    add_config_opts(solve);
    auto* cont = app.add_subcommand("continue", "run the full continuation schedule");
    add_config_opts(cont);

    auto* cls = app.add_subcommand("classify", "recompute diagnostics from a run directory");
    std::string cls_dir;
    cls->add_option("dir", cls_dir, "run directory")->required();

    auto* rep = app.add_subcommand("report", "summarize a run directory");
    std::string rep_dir;
    bool rep_plot = false;
    rep->add_option("dir", rep_dir, "run directory")->required();
    rep->add_flag("--plot", rep_plot, "write figures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        emit_error(1, "usage", e.what());
        return 1;
    }

    try {
        if (rad->parsed()) return cmd_radial(rad_m, rad_s, rad_out, rad_tol, rad_rmax, rad_plot);

        if (solve->parsed() || cont->parsed()) {
            json j = vortexlab::load_config_json(cfg_path);
            if (cfg_grid > 0) j["grid"] = {{"nx", cfg_grid}, {"ny", cfg_grid},
                                           {"lx", j.contains("grid") ? j["grid"].value("lx", 1.0) : 1.0},
                                           {"ly", j.contains("grid") ? j["grid"].value("ly", 1.0) : 1.0}};
            if (cfg_tol > 0.0) j["tol"] = cfg_tol;
            if (!cfg_out.empty()) j["out"] = cfg_out;
            if (cfg_plot) j["plot"] = true;
            vortexlab::RunConfig cfg = vortexlab::parse_config(j);
            return solve->parsed() ? cmd_solve(cfg) : cmd_continue(cfg);
        }
        if (cls->parsed()) return cmd_classify(cls_dir);
        if (rep->parsed()) return cmd_report(rep_dir, rep_plot);
    } catch (const CliError& e) {
        emit_error(e.exit_code, e.stage, e.what());
        return e.exit_code;
    } catch (const std::exception& e) {
        emit_error(1, "internal", e.what());
        return 1;
    }
    return 0;
}
