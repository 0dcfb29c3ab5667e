#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "vortexlab/diagnostics.hpp"
#include "vortexlab/solver.hpp"

using namespace vortexlab;

namespace {

VortexSet one_vortex(double x = 0.5, double y = 0.5, int m = 1) {
    VortexSet vs;
    vs.points.push_back({x, y, m});
    return vs;
}

ScalarField smooth_noise(const TorusGrid& g, unsigned seed, double amp) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f[g.idx(i, j)] = amp * (u(rng) + std::sin(2 * M_PI * g.x(i)) *
                                                 std::cos(2 * M_PI * g.y(j)));
    return f;
}

}  // namespace

TEST_CASE("coupling parameters map both ways") {
    const CouplingParams p = CouplingParams::from_couplings(2.0, 3.0, 5.0);
    CHECK(p.eps == Catch::Approx(0.2));
    CHECK(p.sigma == Catch::Approx(0.2));
    const CouplingParams q = CouplingParams::from_eps_sigma(p.eps, p.sigma, 5.0);
    CHECK(q.alpha == Catch::Approx(2.0));
    CHECK(q.beta_c == Catch::Approx(3.0));

    // the weak-coupling ceiling is enforced
    REQUIRE_THROWS_AS(CouplingParams::from_eps_sigma(0.1, 0.5), std::invalid_argument);
    REQUIRE_NOTHROW(CouplingParams::from_eps_sigma(0.1, 0.01));
    REQUIRE_THROWS_AS(CouplingParams::from_eps_sigma(0.1, -0.1), std::invalid_argument);
}

TEST_CASE("decoupled residual vanishes identically in the second component") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    const CouplingParams p = CouplingParams::from_eps_sigma(0.1, 0.0);
    const ScalarField u0 = background_u0(g, vs);
    ScalarField v1 = smooth_noise(g, 3, 0.1);
    ScalarField u2(g, 0.0);  // exactly zero
    const ResidualPair r = residual(v1, u2, p, u0, vs.total_multiplicity());
    for (std::size_t k = 0; k < r.r2.size(); ++k) REQUIRE(r.r2[k] == 0.0);
}

TEST_CASE("residual at the vacuum reduces to the source term") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex(0.5, 0.5, 1);
    const CouplingParams p = CouplingParams::from_eps_sigma(0.1, 0.0);
    const ScalarField u0 = background_u0(g, vs);
    // u1 = 0, u2 = 0: nonlinear terms cancel, residual is minus the sources
    const ScalarField v1 = -1.0 * u0;
    const ScalarField u2(g, 0.0);
    const ResidualPair r = residual(v1, u2, p, u0, vs.total_multiplicity());
    const double spike = -8.0 * M_PI / g.cell_area();
    const std::size_t at = g.nearest_node(0.5, 0.5);
    REQUIRE(r.r1[at] == Catch::Approx(spike).epsilon(1e-9));
    // off-node entries are small compared to the spike
    const double off = std::abs(r.r1[g.nearest_node(0.1, 0.9)]);
    REQUIRE(off < 1e-9 * std::abs(spike));
}

TEST_CASE("analytic linearization matches a finite difference") {
    const TorusGrid g(48, 48);
    const VortexSet vs = one_vortex();
    const CouplingParams p = CouplingParams::from_eps_sigma(0.15, 0.01);
    const ScalarField u0 = background_u0(g, vs);
    const ScalarField v1 = smooth_noise(g, 5, 0.2) + (-0.4);
    const ScalarField u2 = smooth_noise(g, 6, 0.1) + (-0.3);
    const ScalarField d1 = smooth_noise(g, 7, 1.0);
    const ScalarField d2 = smooth_noise(g, 8, 1.0);

    detail::NonlinearTerms t = detail::exponentials(v1, u0, u2);
    detail::JacobianFields J = detail::jacobian_fields(t, p);
    ScalarField j1 = laplacian(d1);
    ScalarField j2 = laplacian(d2);
    for (std::size_t k = 0; k < j1.size(); ++k) {
        j1[k] -= J.a11[k] * d1[k] + J.a12[k] * d2[k];
        j2[k] -= J.a21[k] * d1[k] + J.a22[k] * d2[k];
    }

    const double h = 1e-6;
    const ResidualPair rp = residual(v1 + h * d1, u2 + h * d2, p, u0, 1);
    const ResidualPair rm = residual(v1 + (-h) * d1, u2 + (-h) * d2, p, u0, 1);
    double err1 = 0.0, err2 = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < j1.size(); ++k) {
        err1 = std::max(err1, std::abs((rp.r1[k] - rm.r1[k]) / (2 * h) - j1[k]));
        err2 = std::max(err2, std::abs((rp.r2[k] - rm.r2[k]) / (2 * h) - j2[k]));
        scale = std::max(scale, std::abs(j1[k]));
    }
    REQUIRE(err1 < 1e-5 * scale);
    REQUIRE(err2 < 1e-5 * scale);
}

TEST_CASE("newton converges on the decoupled problem and keeps u2 at zero") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    const CouplingParams p = CouplingParams::from_eps_sigma(0.07, 0.0);
    const ScalarField u0 = background_u0(g, vs);
    auto seed = topological_seed(u0);
    const SolutionPair sol = newton_solve(seed.first, seed.second, p, vs, u0);
    REQUIRE(sol.converged);
    CHECK(norm_inf(sol.u2) < 1e-10);
    CHECK(max_value(sol.u1()) < 0.0);
    CHECK_FALSE(sol.spurious);
}

TEST_CASE("newton tail contracts superlinearly") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    const CouplingParams p = CouplingParams::from_eps_sigma(0.08, 0.0064 * 0.5);
    const ScalarField u0 = background_u0(g, vs);
    auto seed = topological_seed(u0);
    NewtonOptions opts;
    opts.tol = 1e-12;
    const SolutionPair sol = newton_solve(seed.first, seed.second, p, vs, u0, opts);
    REQUIRE(sol.converged);
    const auto& h = sol.trace.residual_history;
    REQUIRE(h.size() >= 3);
    // order estimate from the last three useful iterates
    std::size_t n = h.size();
    while (n >= 3 && h[n - 1] <= sol.effective_tol * 1.01) --n;
    n = std::min(n + 1, h.size());
    const double q = std::log(h[n - 1] / h[n - 2]) / std::log(h[n - 2] / h[n - 3]);
    INFO("history tail " << h[n - 3] << " " << h[n - 2] << " " << h[n - 1]);
    REQUIRE(q > 1.4);
}

TEST_CASE("second component stays quadratically small in eps") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    const ScalarField u0 = background_u0(g, vs);
    for (double eps : {0.07, 0.06, 0.05}) {
        const CouplingParams p = CouplingParams::from_eps_sigma(eps, eps * eps);
        auto seed = topological_seed(u0);
        const SolutionPair sol = newton_solve(seed.first, seed.second, p, vs, u0);
        REQUIRE(sol.converged);
        INFO("eps = " << eps);
        CHECK(norm_inf(sol.u2) <= 1.5 * eps * eps);
    }
}

TEST_CASE("coupled solution fields stay negative") {
    const TorusGrid g(96, 96);
    const VortexSet vs = one_vortex();
    const CouplingParams p = CouplingParams::from_eps_sigma(0.07, 0.0049);
    const ScalarField u0 = background_u0(g, vs);
    auto seed = topological_seed(u0);
    const SolutionPair sol = newton_solve(seed.first, seed.second, p, vs, u0);
    REQUIRE(sol.converged);
    CHECK(max_value(sol.u1()) < 0.0);
    CHECK(max_value(sol.u2) < 0.0);
    CHECK_FALSE(sol.spurious);
}

TEST_CASE("integral identity holds on solutions and reacts to perturbations") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    const CouplingParams p = CouplingParams::from_eps_sigma(0.07, 0.002);
    const ScalarField u0 = background_u0(g, vs);
    auto seed = topological_seed(u0);
    SolutionPair sol = newton_solve(seed.first, seed.second, p, vs, u0);
    REQUIRE(sol.converged);
    const IntegralIdentity ok = integral_identity_check(sol);
    CHECK(ok.d1 < 1e-8 * ok.scale1);
    CHECK(ok.d2 < 1e-8 * std::max(ok.scale2, 1.0));

    SolutionPair bent = sol;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            bent.v1[g.idx(i, j)] += 0.01 * std::sin(2 * M_PI * g.x(i));
    const IntegralIdentity off = integral_identity_check(bent);
    CHECK(off.d1 > 10.0 * std::max(ok.d1, 1e-12));
}

TEST_CASE("schedules must march eps downward with positive coupling") {
    std::vector<CouplingParams> sched;
    sched.push_back(CouplingParams::from_eps_sigma(0.1, 0.005));
    sched.push_back(CouplingParams::from_eps_sigma(0.2, 0.01));
    REQUIRE_THROWS_AS(validate_schedule(sched), std::invalid_argument);

    std::vector<CouplingParams> zero;
    zero.push_back(CouplingParams::from_eps_sigma(0.1, 0.0));
    REQUIRE_THROWS_AS(validate_schedule(zero), std::invalid_argument);

    REQUIRE_THROWS_AS(validate_schedule({}), std::invalid_argument);
}

TEST_CASE("warm continuation walks a short schedule") {
    const TorusGrid g(96, 96, 2.0, 2.0);
    const VortexSet vs = one_vortex(1.0, 1.0);
    std::vector<CouplingParams> sched;
    for (double eps : {0.12, 0.1, 0.085})
        sched.push_back(CouplingParams::from_eps_sigma(eps, 0.5 * eps * eps));
    const ContinuationResult res = continuation(g, sched, BranchTag::topological, vs);
    REQUIRE(res.completed);
    REQUIRE(res.steps.size() == 3);
    for (const SolutionPair& s : res.steps) {
        CHECK(s.converged);
        CHECK(s.branch_tag == BranchTag::topological);
        CHECK_FALSE(s.spurious);
    }
}

TEST_CASE("identical inputs give bitwise identical solutions") {
    const TorusGrid g(64, 64);
    const VortexSet vs = one_vortex();
    const CouplingParams p = CouplingParams::from_eps_sigma(0.07, 0.002);
    const ScalarField u0 = background_u0(g, vs);
    auto seed = topological_seed(u0);
    const SolutionPair a = newton_solve(seed.first, seed.second, p, vs, u0);
    const SolutionPair b = newton_solve(seed.first, seed.second, p, vs, u0);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (std::size_t k = 0; k < a.v1.size(); ++k) {
        REQUIRE(a.v1[k] == b.v1[k]);
        REQUIRE(a.u2[k] == b.u2[k]);
    }
}
