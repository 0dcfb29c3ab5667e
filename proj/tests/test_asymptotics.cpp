#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "vortexlab/diagnostics.hpp"
#include "vortexlab/solver.hpp"

using namespace vortexlab;

namespace {

VortexSet one_vortex(double x = 0.5, double y = 0.5, int m = 1) {
    VortexSet vs;
    vs.points.push_back({x, y, m});
    return vs;
}

SolutionPair make_solution(const TorusGrid& g, const VortexSet& vs, double eps, double sigma,
                           const ScalarField& u1, const ScalarField& u2) {
    ScalarField u0 = background_u0(g, vs);
    SolutionPair sol{CouplingParams::from_eps_sigma(eps, sigma, 50.0), vs, u0, u1 - u0, u2,
                     0.0, 0.0, 0, {}, true, false, {}};
    return sol;
}

// bump that falls from `inside` to `outside` across a smooth edge at `radius`
ScalarField plateau(const TorusGrid& g, double cx, double cy, double radius, double inside,
                    double outside, double edge = 0.02) {
    ScalarField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double r = g.dist(g.x(i), g.y(j), cx, cy);
            const double t = 0.5 * (1.0 + std::tanh((radius - r) / edge));
            f[g.idx(i, j)] = outside + (inside - outside) * t;
        }
    return f;
}

// five-step topological sweep used by the classifier tests; solved once
const std::vector<SolutionPair>& reference_sweep() {
    static const std::vector<SolutionPair> run = [] {
        const TorusGrid g(256, 256, 2.0, 2.0);
        const VortexSet vs = one_vortex(1.0, 1.0);
        std::vector<CouplingParams> sched;
        const int steps = 5;
        for (int k = 0; k < steps; ++k) {
            const double eps = 0.1 * std::pow(0.05 / 0.1, double(k) / (steps - 1));
            sched.push_back(CouplingParams::from_eps_sigma(eps, 0.5 * eps * eps));
        }
        ContinuationResult res = continuation(g, sched, BranchTag::topological, vs);
        REQUIRE(res.completed);
        return std::move(res.steps);
    }();
    return run;
}

}  // namespace

TEST_CASE("classifier refuses short or unordered runs") {
    const TorusGrid g(32, 32);
    const VortexSet vs = one_vortex();
    std::vector<SolutionPair> run;
    for (double eps : {0.2, 0.1, 0.05})
        run.push_back(make_solution(g, vs, eps, 0.001, ScalarField(g, -0.1), ScalarField(g, -0.01)));
    CHECK(classify_first(run) == FirstClass::undetermined);
    CHECK(classify_second(run) == SecondClass::undetermined);

    // four steps but eps not strictly decreasing
    run.push_back(make_solution(g, vs, 0.05, 0.001, ScalarField(g, -0.1), ScalarField(g, -0.01)));
    CHECK(classify_first(run) == FirstClass::undetermined);
    CHECK(classify_second(run) == SecondClass::undetermined);
}

TEST_CASE("vanishing far field reads as the topological class") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    std::vector<SolutionPair> run;
    const double amps[] = {0.3, 0.2, 0.1, 0.04};
    const double epss[] = {0.2, 0.15, 0.1, 0.05};
    for (int k = 0; k < 4; ++k)
        run.push_back(make_solution(g, vs, epss[k], 0.001, ScalarField(g, -amps[k]),
                                    ScalarField(g, -0.01)));
    CHECK(classify_first(run) == FirstClass::f1);
}

TEST_CASE("quadratic second-component decay reads as s1") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    std::vector<SolutionPair> run;
    for (double eps : {0.2, 0.15, 0.1, 0.05}) {
        ScalarField u2(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                u2[g.idx(i, j)] = -0.9 * eps * eps * (1.0 + 0.1 * std::cos(2 * M_PI * g.x(i)));
        run.push_back(make_solution(g, vs, eps, 0.5 * eps * eps, ScalarField(g, -0.2), u2));
    }
    CHECK(classify_second(run) == SecondClass::s1);
}

TEST_CASE("monotone drop of the shifted second component reads as s2") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    std::vector<SolutionPair> run;
    int k = 0;
    for (double eps : {0.2, 0.15, 0.1, 0.05}) {
        const double level = 2.0 * std::log(eps) - 1.0 - k;
        run.push_back(make_solution(g, vs, eps, 0.5 * eps * eps, ScalarField(g, -0.2),
                                    ScalarField(g, level)));
        ++k;
    }
    CHECK(classify_second(run) == SecondClass::s2);
}

TEST_CASE("growing peak with quantized mass reads as blow-up") {
    const TorusGrid g(128, 128);
    const VortexSet vs = one_vortex(0.25, 0.25, 1);
    std::vector<SolutionPair> run;
    const double epss[] = {0.08, 0.05, 0.032, 0.02};
    for (int k = 0; k < 3; ++k)
        run.push_back(make_solution(g, vs, epss[k], 1e-4, ScalarField(g, -0.5),
                                    ScalarField(g, -0.2)));
    // final step: first component carries a dense bubble away from the vortex
    const ScalarField bubble = plateau(g, 0.7, 0.6, 0.135, -std::log(2.0), -6.0, 0.01);
    run.push_back(make_solution(g, vs, epss[3], 1e-4, bubble, ScalarField(g, -0.2)));

    const double mass = local_mass(run.back(), 0.7, 0.6, 0.2);
    INFO("planted bubble mass " << mass);
    REQUIRE(mass > 8.0 * M_PI - 0.2);
    CHECK(classify_first(run) == FirstClass::f3);

    const auto sites = detect_blowup_points(run.back());
    REQUIRE(sites.size() == 1);
    CHECK(g.dist(sites[0][0], sites[0][1], 0.7, 0.6) < 0.05);
}

TEST_CASE("peaks without the mass certificate do not count as blow-up") {
    const TorusGrid g(128, 128);
    const VortexSet vs = one_vortex(0.25, 0.25, 1);
    std::vector<SolutionPair> run;
    const double epss[] = {0.08, 0.05, 0.032, 0.02};
    for (int k = 0; k < 3; ++k)
        run.push_back(make_solution(g, vs, epss[k], 1e-4, ScalarField(g, -0.5),
                                    ScalarField(g, -0.2)));
    // narrow spike: prominent but carries far less than 8 pi
    const ScalarField spike = plateau(g, 0.7, 0.6, 0.03, -std::log(2.0), -6.0);
    run.push_back(make_solution(g, vs, epss[3], 1e-4, spike, ScalarField(g, -0.2)));

    REQUIRE(detect_blowup_points(run.back()).size() == 1);
    REQUIRE(local_mass(run.back(), 0.7, 0.6, 0.2) < 8.0 * M_PI - 0.2);
    CHECK(classify_first(run) != FirstClass::f3);
}

TEST_CASE("nearby peaks merge, distant peaks stay separate") {
    const TorusGrid g(128, 128);
    const VortexSet vs = one_vortex(0.1, 0.1, 1);
    auto two_bumps = [&](double x1, double x2) {
        ScalarField a = plateau(g, x1, 0.5, 0.04, -0.7, -7.0);
        const ScalarField b = plateau(g, x2, 0.5, 0.04, -0.7, -7.0);
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::max(a[k], b[k]);
        return a;
    };
    auto far_run = make_solution(g, vs, 0.02, 1e-4, two_bumps(0.3, 0.75), ScalarField(g, -0.2));
    CHECK(detect_blowup_points(far_run).size() == 2);

    auto near_run = make_solution(g, vs, 0.02, 1e-4, two_bumps(0.46, 0.52), ScalarField(g, -0.2));
    CHECK(detect_blowup_points(near_run).size() == 1);
}

TEST_CASE("flat fields produce no blow-up sites") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    auto run = make_solution(g, vs, 0.05, 1e-4, ScalarField(g, -1e-3), ScalarField(g, -0.2));
    CHECK(detect_blowup_points(run).empty());
}

TEST_CASE("local mass rejects oversized balls") {
    const TorusGrid g(64, 64);
    auto run = make_solution(g, one_vortex(), 0.05, 1e-4, ScalarField(g, -0.5),
                             ScalarField(g, -0.2));
    REQUIRE_THROWS_AS(local_mass(run, 0.5, 0.5, 0.25), std::invalid_argument);
    REQUIRE_THROWS_AS(local_mass(run, 0.5, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("reference sweep classifies as the topological pair") {
    const auto& run = reference_sweep();
    ClassifyOptions opts;
    CHECK(classify_first(run, opts) == FirstClass::f1);
    CHECK(classify_second(run) == SecondClass::s1);

    // exponent within the expected window
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const SolutionPair& s : run) {
        const double x = std::log(s.params.eps), y = std::log(norm_inf(s.u2));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double n = double(run.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    INFO("slope " << slope);
    CHECK(slope >= 1.8);
    CHECK(slope <= 2.2);
}

TEST_CASE("reference sweep mass integrals sit at their limits") {
    const auto& run = reference_sweep();
    const MassIntegrals mi = mass_integrals(run.back());
    CHECK(mi.i1 == Catch::Approx(8.0 * M_PI).epsilon(0.02));
    const double area = run.back().u2.grid().area();
    CHECK(mi.i2 <= 2.0 * run.back().params.n_frak * area + 1e-6);
    CHECK(mi.i2 >= 0.0);
}

TEST_CASE("reference sweep has no blow-up sites and bounded gradients") {
    const auto& run = reference_sweep();
    CHECK(detect_blowup_points(run.back()).empty());
    const GradientBounds gb = gradient_bounds(run);
    CHECK_FALSE(gb.flagged);
    CHECK(gb.growth_v1 < 3.0);
    CHECK(gb.growth_u2 < 3.0);
}

TEST_CASE("gradient audit needs three steps and flags synthetic growth") {
    const TorusGrid g(48, 48);
    const VortexSet vs = one_vortex();
    std::vector<SolutionPair> tiny;
    tiny.push_back(make_solution(g, vs, 0.1, 1e-3, ScalarField(g, -0.2), ScalarField(g, -0.1)));
    tiny.push_back(make_solution(g, vs, 0.05, 1e-3, ScalarField(g, -0.2), ScalarField(g, -0.1)));
    REQUIRE_THROWS_AS(gradient_bounds(tiny), std::invalid_argument);

    std::vector<SolutionPair> run;
    int k = 0;
    for (double eps : {0.2, 0.1, 0.05}) {
        ScalarField u2(g);
        const double amp = 0.01 * std::pow(8.0, k++);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                u2[g.idx(i, j)] = -0.1 + amp * std::sin(2 * M_PI * g.x(i));
        run.push_back(make_solution(g, vs, eps, 1e-3, ScalarField(g, -0.2), u2));
    }
    CHECK(gradient_bounds(run).flagged);
}

TEST_CASE("boundary-bulk balance holds on a decoupled solution") {
    const TorusGrid g(128, 128);
    const VortexSet vs = one_vortex();
    const CouplingParams p = CouplingParams::from_eps_sigma(0.08, 0.0);
    const ScalarField u0 = background_u0(g, vs);
    auto seed = topological_seed(u0);
    const SolutionPair sol = newton_solve(seed.first, seed.second, p, vs, u0);
    REQUIRE(sol.converged);

    const PohozaevRecord rec = pohozaev_residual(sol, 0.5, 0.5, 0.2, 0.5, 1.0);
    INFO("lhs " << rec.lhs << " rhs " << rec.rhs);
    REQUIRE(rec.scale > 1.0);
    CHECK(rec.residual / rec.scale < 0.02);
}

TEST_CASE("boundary-bulk balance improves under grid refinement") {
    const VortexSet vs = one_vortex(1.0, 1.0);
    const CouplingParams p = CouplingParams::from_eps_sigma(0.1, 0.004);
    double prev = -1.0;
    for (int n : {128, 256}) {
        const TorusGrid g(n, n, 2.0, 2.0);
        const ScalarField u0 = background_u0(g, vs);
        auto seed = topological_seed(u0);
        const SolutionPair sol = newton_solve(seed.first, seed.second, p, vs, u0);
        REQUIRE(sol.converged);
        const PohozaevRecord rec = pohozaev_residual(sol, 1.0, 1.0, 0.2, SecondClass::s1);
        const double rel = rec.residual / rec.scale;
        if (prev >= 0.0) CHECK(rel < prev);
        prev = rel;
    }
}

TEST_CASE("boundary-bulk balance rejects non-solutions") {
    const TorusGrid g(96, 96);
    const VortexSet vs = one_vortex();
    auto fake = make_solution(g, vs, 0.1, 0.004, ScalarField(g, -0.3), ScalarField(g, -0.2));
    const PohozaevRecord rec = pohozaev_residual(fake, 0.5, 0.5, 0.2, SecondClass::s1);
    CHECK(rec.residual / rec.scale > 0.1);
}

TEST_CASE("balance ball constraints are enforced") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    auto sol = make_solution(g, vs, 0.1, 0.004, ScalarField(g, -0.3), ScalarField(g, -0.2));
    REQUIRE_THROWS_AS(pohozaev_residual(sol, 0.5, 0.5, 0.3, SecondClass::s1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(pohozaev_residual(sol, 0.5, 0.5, 0.05, SecondClass::s1),
                      std::invalid_argument);  // under-resolved at 64^2
    // ball around a non-vortex point that clips the vortex
    REQUIRE_THROWS_AS(pohozaev_residual(sol, 0.62, 0.5, 0.2, SecondClass::s1),
                      std::invalid_argument);
}

TEST_CASE("full diagnostics assemble a coherent report") {
    const auto& run = reference_sweep();
    const DiagnosticsReport rep = diagnose_run(run);
    CHECK(rep.first_class == FirstClass::f1);
    CHECK(rep.second_class == SecondClass::s1);
    CHECK(rep.steps.size() == run.size());
    CHECK(rep.blowup_sites.empty());
    REQUIRE(rep.pohozaev.size() == 1);
    CHECK(rep.pohozaev[0].residual / rep.pohozaev[0].scale < 0.05);
    // every reported site would need the quantized mass; none reported here
    for (const BlowupSite& s : rep.blowup_sites) CHECK(s.mass >= 8.0 * M_PI - 0.2);
}
