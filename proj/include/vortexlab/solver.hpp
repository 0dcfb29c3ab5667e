#pragma once

// Newton continuation solver for the coupled two-component vortex system on
// the torus, written in the smooth variables (v1, u2) with u1 = v1 + u0:
//
//   Delta v1 = F1(v1 + u0, u2) + 8 pi M / |T|
//   Delta u2 = F2(v1 + u0, u2)
//
//   F1(u1,u2) = (1/eps^2) { e^{u1}(e^{u1}-1) + sig^2 e^{u2}(e^{u1}-1)
//                           - sig (e^{u1}+e^{u2})(e^{u2}-1) }
//   F2 = F1 with the roles of u1 and u2 swapped.
//
// Linear solves are restarted GMRES on the analytic linearization, right-
// preconditioned by the screened inverse (Delta - 1/eps^2)^{-1} applied per
// component. Damping is Armijo backtracking on the l2 residual.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vortexlab/green.hpp"
#include "vortexlab/grid.hpp"
#include "vortexlab/radial.hpp"
#include "vortexlab/spectral.hpp"

namespace vortexlab {

struct CouplingParams {
    double alpha = 0.0;   // gauge coupling alpha
    double beta_c = 0.0;  // gauge coupling beta
    double eps = 0.0;     // 1 / (alpha + beta_c)
    double sigma = 0.0;   // (beta_c - alpha) / (alpha + beta_c)
    double n_frak = 1.0;  // weak-coupling ceiling on sigma / eps^2

    static CouplingParams from_couplings(double alpha, double beta_c, double n_frak = 1.0) {
        if (!(alpha > 0.0) || !(beta_c > 0.0))
            throw std::invalid_argument("CouplingParams: couplings must be positive");
        CouplingParams p;
        p.alpha = alpha;
        p.beta_c = beta_c;
        p.eps = 1.0 / (alpha + beta_c);
        p.sigma = (beta_c - alpha) / (alpha + beta_c);
        p.n_frak = n_frak;
        p.validate();
        return p;
    }

    static CouplingParams from_eps_sigma(double eps, double sigma, double n_frak = 1.0) {
        if (!(eps > 0.0)) throw std::invalid_argument("CouplingParams: eps must be positive");
        CouplingParams p;
        p.eps = eps;
        p.sigma = sigma;
        p.alpha = (1.0 - sigma) / (2.0 * eps);
        p.beta_c = (1.0 + sigma) / (2.0 * eps);
        p.n_frak = n_frak;
        p.validate();
        return p;
    }

    // sigma = 0 (equal couplings, exactly decoupled components) is accepted
    // here so scalar fixtures can run; continuation schedules additionally
    // demand sigma > 0, see validate_schedule.
    void validate() const {
        if (!(alpha > 0.0) || !(beta_c > 0.0))
            throw std::invalid_argument("CouplingParams: couplings must be positive");
        if (!(sigma >= 0.0) || !(sigma < 1.0))
            throw std::invalid_argument("CouplingParams: sigma must lie in [0, 1)");
        if (!(n_frak > 0.0))
            throw std::invalid_argument("CouplingParams: n_frak must be positive");
        if (sigma / (eps * eps) > n_frak * (1.0 + 1e-12))
            throw std::invalid_argument("CouplingParams: sigma/eps^2 exceeds n_frak");
    }
};

enum class BranchTag { topological, concentrating };

struct NewtonTrace {
    std::vector<double> residual_history;  // inf norm after each iteration
    std::vector<double> step_lengths;      // accepted Armijo step per iteration
    std::vector<int> krylov_iters;         // GMRES iterations per Newton step
    bool overflow_hit = false;
    std::string stop_reason;
};

struct SolutionPair {
    CouplingParams params;
    VortexSet vortices;
    ScalarField u0;  // background field of the vortex set
    ScalarField v1;  // u1 - u0
    ScalarField u2;
    double residual_inf = std::numeric_limits<double>::infinity();
    double effective_tol = 0.0;  // requested tol, floored by the spectral noise level
    int newton_iters = 0;
    BranchTag branch_tag = BranchTag::topological;
    bool converged = false;
    bool spurious = false;  // converged but u1 or u2 not negative everywhere
    NewtonTrace trace;

    ScalarField u1() const { return v1 + u0; }
};

struct ResidualPair {
    ScalarField r1, r2;
    bool overflow = false;
};

namespace detail {

constexpr double kExpArgMax = 40.0;  // exp clamp; far outside any physical iterate

inline double exp_clamped(double x, bool& clipped) {
    if (x > kExpArgMax) {
        clipped = true;
        return std::exp(kExpArgMax);
    }
    return std::exp(x);
}

struct NonlinearTerms {
    ScalarField e1, e2;  // e^{u1}, e^{u2}
    bool overflow = false;
};

inline NonlinearTerms exponentials(const ScalarField& v1, const ScalarField& u0,
                                   const ScalarField& u2) {
    NonlinearTerms t{ScalarField(v1.grid()), ScalarField(u2.grid()), false};
    for (std::size_t k = 0; k < v1.size(); ++k) {
        t.e1[k] = exp_clamped(v1[k] + u0[k], t.overflow);
        t.e2[k] = exp_clamped(u2[k], t.overflow);
    }
    return t;
}

}  // namespace detail

namespace detail {

inline void residual_finish(ResidualPair& out, const NonlinearTerms& t,
                            const CouplingParams& p, double total_multiplicity,
                            double area) {
    const double inv_eps2 = 1.0 / (p.eps * p.eps);
    const double sig = p.sigma;
    const double mean_source = 8.0 * M_PI * total_multiplicity / area;
    for (std::size_t k = 0; k < out.r1.size(); ++k) {
        const double e1 = t.e1[k], e2 = t.e2[k];
        const double f1 =
            inv_eps2 * (e1 * (e1 - 1.0) + sig * sig * e2 * (e1 - 1.0) -
                        sig * (e1 + e2) * (e2 - 1.0));
        const double f2 =
            inv_eps2 * (e2 * (e2 - 1.0) + sig * sig * e1 * (e2 - 1.0) -
                        sig * (e1 + e2) * (e1 - 1.0));
        out.r1[k] -= f1 + mean_source;
        out.r2[k] -= f2;
    }
}

}  // namespace detail

inline ResidualPair residual(const ScalarField& v1, const ScalarField& u2,
                             const CouplingParams& p, const ScalarField& u0,
                             int total_multiplicity) {
    check_same_grid(v1, u2, "residual");
    check_same_grid(v1, u0, "residual");
    detail::NonlinearTerms t = detail::exponentials(v1, u0, u2);
    ResidualPair out{laplacian(v1), laplacian(u2), t.overflow};
    detail::residual_finish(out, t, p, total_multiplicity, v1.grid().area());
    return out;
}

inline ResidualPair residual(const ScalarField& v1, const ScalarField& u2,
                             const CouplingParams& p, const VortexSet& vortices) {
    const ScalarField u0 = background_u0(v1.grid(), vortices);
    return residual(v1, u2, p, u0, vortices.total_multiplicity());
}

namespace detail {

// Pointwise linearization coefficients d F_i / d u_j at the current iterate.
struct JacobianFields {
    ScalarField a11, a12, a21, a22;
};

inline JacobianFields jacobian_fields(const NonlinearTerms& t, const CouplingParams& p) {
    const double inv_eps2 = 1.0 / (p.eps * p.eps);
    const double sig = p.sigma;
    const TorusGrid& g = t.e1.grid();
    JacobianFields J{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)};
    for (std::size_t k = 0; k < t.e1.size(); ++k) {
        const double e1 = t.e1[k], e2 = t.e2[k];
        J.a11[k] = inv_eps2 *
                   (2.0 * e1 * e1 - e1 + sig * sig * e2 * e1 - sig * e1 * (e2 - 1.0));
        J.a12[k] = inv_eps2 *
                   (sig * sig * e2 * (e1 - 1.0) - sig * e2 * (2.0 * e2 + e1 - 1.0));
        J.a21[k] = inv_eps2 *
                   (sig * sig * e1 * (e2 - 1.0) - sig * e1 * (2.0 * e1 + e2 - 1.0));
        J.a22[k] = inv_eps2 *
                   (2.0 * e2 * e2 - e2 + sig * sig * e1 * e2 - sig * e2 * (e1 - 1.0));
    }
    return J;
}

// Flat vectors hold (component 1, component 2) back to back.
inline void pack(const ScalarField& a, const ScalarField& b, std::vector<double>& out) {
    const std::size_t n = a.size();
    out.resize(2 * n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k];
    for (std::size_t k = 0; k < n; ++k) out[n + k] = b[k];
}

inline void unpack(const std::vector<double>& x, ScalarField& a, ScalarField& b) {
    const std::size_t n = a.size();
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k];
    for (std::size_t k = 0; k < n; ++k) b[k] = x[n + k];
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct GmresResult {
    std::vector<double> x;
    double rel_residual = 1.0;
    int iterations = 0;
    bool converged = false;
};

// Restarted GMRES with modified Gram-Schmidt and Givens rotations. apply()
// must be a fixed deterministic operator.
template <class Apply>
GmresResult gmres(Apply&& apply, const std::vector<double>& b, double rel_tol,
                  int restart, int max_restarts) {
    const std::size_t n = b.size();
    GmresResult res;
    res.x.assign(n, 0.0);
    const double bnorm = nrm2(b);
    if (bnorm == 0.0) {
        res.converged = true;
        res.rel_residual = 0.0;
        return res;
    }

    std::vector<std::vector<double>> V;
    std::vector<double> w(n);
    const int m = restart;
    std::vector<double> H((m + 1) * m, 0.0);  // column-major H[i + j*(m+1)]
    std::vector<double> cs(m), sn(m), g(m + 1);

    for (int cycle = 0; cycle < max_restarts; ++cycle) {
        // r = b - A x
        std::vector<double> r(n);
        if (cycle == 0 && res.iterations == 0) {
            r = b;
        } else {
            apply(res.x, w);
            for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - w[k];
        }
        double rnorm = nrm2(r);
        res.rel_residual = rnorm / bnorm;
        if (res.rel_residual <= rel_tol) {
            res.converged = true;
            return res;
        }

        V.assign(1, r);
        for (std::size_t k = 0; k < n; ++k) V[0][k] /= rnorm;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = rnorm;

        int j_used = 0;
        for (int j = 0; j < m; ++j) {
            apply(V[j], w);
            for (int i = 0; i <= j; ++i) {
                const double h = dot(w, V[i]);
                H[i + j * (m + 1)] = h;
                for (std::size_t k = 0; k < n; ++k) w[k] -= h * V[i][k];
            }
            const double hlast = nrm2(w);
            H[(j + 1) + j * (m + 1)] = hlast;

            // apply accumulated rotations to the new column
            for (int i = 0; i < j; ++i) {
                const double t0 = H[i + j * (m + 1)], t1 = H[(i + 1) + j * (m + 1)];
                H[i + j * (m + 1)] = cs[i] * t0 + sn[i] * t1;
                H[(i + 1) + j * (m + 1)] = -sn[i] * t0 + cs[i] * t1;
            }
            const double t0 = H[j + j * (m + 1)], t1 = H[(j + 1) + j * (m + 1)];
            const double denom = std::hypot(t0, t1);
            cs[j] = denom > 0.0 ? t0 / denom : 1.0;
            sn[j] = denom > 0.0 ? t1 / denom : 0.0;
            H[j + j * (m + 1)] = denom;
            H[(j + 1) + j * (m + 1)] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];

            ++res.iterations;
            j_used = j + 1;
            if (std::abs(g[j + 1]) / bnorm <= rel_tol || hlast == 0.0) break;
            if (j + 1 < m) {
                V.push_back(w);
                for (std::size_t k = 0; k < n; ++k) V.back()[k] /= hlast;
            }
        }

        // back substitution on the j_used x j_used triangle
        std::vector<double> y(j_used, 0.0);
        for (int i = j_used - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < j_used; ++j) s -= H[i + j * (m + 1)] * y[j];
            y[i] = s / H[i + i * (m + 1)];
        }
        for (int j = 0; j < j_used; ++j)
            for (std::size_t k = 0; k < n; ++k) res.x[k] += y[j] * V[j][k];

        apply(res.x, w);
        double tnorm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double d = b[k] - w[k];
            tnorm += d * d;
        }
        res.rel_residual = std::sqrt(tnorm) / bnorm;
        if (res.rel_residual <= rel_tol) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

// Spectral differentiation noise scales like eps_mach * k_nyq^2 * |field|;
// below that level the residual cannot be driven pointwise.  Newton stalls
// between 1x and 8x the eps_mach * k_nyq^2 level on 256^2 test problems; the
// factor 4 keeps the stop above the stall without giving up real accuracy.
inline double residual_floor(const TorusGrid& g, double field_scale) {
    const double kx = M_PI * g.nx / g.lx;
    const double ky = M_PI * g.ny / g.ly;
    const double eps_mach = std::numeric_limits<double>::epsilon();
    return 4.0 * eps_mach * (kx * kx + ky * ky) * std::max(1.0, field_scale);
}

}  // namespace detail

struct NewtonOptions {
    double tol = 1e-10;  // requested inf-norm residual; floored by spectral noise
    int max_iters = 50;
    int gmres_restart = 25;
    int gmres_max_restarts = 40;
    double min_step = 1.0 / 1024.0;  // Armijo floor 2^-10
};

inline SolutionPair newton_solve(const ScalarField& v1_init, const ScalarField& u2_init,
                                 const CouplingParams& params, const VortexSet& vortices,
                                 const ScalarField& u0, NewtonOptions opts = {},
                                 BranchTag branch = BranchTag::topological) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("newton_solve: tol must be positive");
    check_same_grid(v1_init, u2_init, "newton_solve");
    check_same_grid(v1_init, u0, "newton_solve");
    const TorusGrid& g = v1_init.grid();
    const int M_total = vortices.total_multiplicity();

    SolutionPair sol;
    sol.params = params;
    sol.vortices = vortices;
    sol.u0 = u0;
    sol.v1 = v1_init;
    sol.u2 = u2_init;
    sol.branch_tag = branch;

    ResidualPair res = residual(sol.v1, sol.u2, params, u0, M_total);
    double rinf = std::max(norm_inf(res.r1), norm_inf(res.r2));
    double rl2 = std::hypot(norm_l2(res.r1), norm_l2(res.r2));
    sol.trace.residual_history.push_back(rinf);
    if (res.overflow) sol.trace.overflow_hit = true;

    const std::size_t n = sol.v1.size();
    std::vector<double> b, y;
    ScalarField ta(g), tb(g);

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const double field_scale =
            std::max({norm_inf(sol.v1), norm_inf(sol.u2), norm_inf(u0)});
        sol.effective_tol = std::max(opts.tol, detail::residual_floor(g, field_scale));
        if (rinf <= sol.effective_tol) {
            sol.converged = true;
            break;
        }

        detail::NonlinearTerms t = detail::exponentials(sol.v1, u0, sol.u2);
        detail::JacobianFields J = detail::jacobian_fields(t, params);

        const double eps = params.eps;
        auto apply_JMinv = [&](const std::vector<double>& xin, std::vector<double>& xout) {
            detail::unpack(xin, ta, tb);
            ScalarField s1 = solve_screened(ta, eps);
            ScalarField s2 = solve_screened(tb, eps);
            ScalarField l1 = laplacian(s1);
            ScalarField l2 = laplacian(s2);
            for (std::size_t k = 0; k < n; ++k) {
                const double j1 = l1[k] - J.a11[k] * s1[k] - J.a12[k] * s2[k];
                const double j2 = l2[k] - J.a21[k] * s1[k] - J.a22[k] * s2[k];
                l1[k] = j1;
                l2[k] = j2;
            }
            detail::pack(l1, l2, xout);
        };

        ScalarField nr1 = -1.0 * res.r1, nr2 = -1.0 * res.r2;
        detail::pack(nr1, nr2, b);
        const double eta = std::min(1e-4, std::max(0.1 * std::min(1.0, rinf), 1e-12));
        detail::GmresResult lin = detail::gmres(apply_JMinv, b, eta, opts.gmres_restart,
                                                opts.gmres_max_restarts);
        sol.trace.krylov_iters.push_back(lin.iterations);

        // right preconditioning: the Newton direction is M^{-1} y
        detail::unpack(lin.x, ta, tb);
        ScalarField dv1 = solve_screened(ta, eps);
        ScalarField du2 = solve_screened(tb, eps);

        double lambda = 1.0;
        bool accepted = false;
        ScalarField trial_v1(g), trial_u2(g);
        ResidualPair trial_res;
        while (lambda >= opts.min_step) {
            trial_v1 = sol.v1;
            trial_u2 = sol.u2;
            for (std::size_t k = 0; k < n; ++k) {
                trial_v1[k] += lambda * dv1[k];
                trial_u2[k] += lambda * du2[k];
            }
            trial_res = residual(trial_v1, trial_u2, params, u0, M_total);
            if (trial_res.overflow) {
                sol.trace.overflow_hit = true;
                lambda *= 0.5;
                continue;
            }
            const double trial_l2 = std::hypot(norm_l2(trial_res.r1), norm_l2(trial_res.r2));
            if (trial_l2 <= (1.0 - 1e-4 * lambda) * rl2) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            sol.trace.stop_reason = "line search stalled at minimum step";
            break;
        }

        sol.v1 = trial_v1;
        sol.u2 = trial_u2;
        res = trial_res;
        rinf = std::max(norm_inf(res.r1), norm_inf(res.r2));
        rl2 = std::hypot(norm_l2(res.r1), norm_l2(res.r2));
        sol.newton_iters = iter + 1;
        sol.trace.residual_history.push_back(rinf);
        sol.trace.step_lengths.push_back(lambda);
    }

    // the loop may exit by exhausting max_iters with the tolerance just met
    if (!sol.converged) {
        const double field_scale =
            std::max({norm_inf(sol.v1), norm_inf(sol.u2), norm_inf(u0)});
        sol.effective_tol = std::max(opts.tol, detail::residual_floor(g, field_scale));
        if (rinf <= sol.effective_tol) sol.converged = true;
        if (!sol.converged && sol.trace.stop_reason.empty())
            sol.trace.stop_reason = "max_iters reached";
    }
    sol.residual_inf = rinf;

    if (sol.converged) {
        // the strict-negativity property of true solutions; u2 carries it only
        // in the genuinely coupled system (sigma = 0 decouples u2 to the flat
        // vacuum u2 = 0), and u1 only when vortices are present
        const ScalarField u1 = sol.u1();
        if (!vortices.empty() && max_value(u1) >= 0.0) sol.spurious = true;
        if (params.sigma > 0.0 && max_value(sol.u2) >= 0.0) sol.spurious = true;
        sol.trace.stop_reason = "converged";
    }
    return sol;
}

inline SolutionPair newton_solve(const ScalarField& v1_init, const ScalarField& u2_init,
                                 const CouplingParams& params, const VortexSet& vortices,
                                 NewtonOptions opts = {},
                                 BranchTag branch = BranchTag::topological) {
    const ScalarField u0 = background_u0(v1_init.grid(), vortices);
    return newton_solve(v1_init, u2_init, params, vortices, u0, opts, branch);
}

// Seed with u1 = u2 = level (a small negative constant); in the smooth
// variable this is v1 = level - u0.
inline std::pair<ScalarField, ScalarField> topological_seed(const ScalarField& u0,
                                                            double level = -0.5) {
    ScalarField v1 = map_field(u0, [level](double w) { return level - w; });
    ScalarField u2(u0.grid(), level);
    return {std::move(v1), std::move(u2)};
}

struct ConcentratingSeedOptions {
    double qx = 0.0, qy = 0.0;  // bubble site; used when have_site is true
    bool have_site = false;     // otherwise: the grid node farthest from all vortices
    double margin = 0.05;       // bubble flux 4 (1 + margin)
    double cutoff = 0.25;       // transplant radius in physical units
    double u2_offset = -1.0;    // u2 = 2 ln eps + u2_offset
};

inline std::pair<double, double> farthest_node_from(const TorusGrid& g,
                                                    const VortexSet& vortices) {
    double best = -1.0;
    std::pair<double, double> q{0.0, 0.0};
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double dmin = std::numeric_limits<double>::infinity();
            for (const auto& p : vortices.points)
                dmin = std::min(dmin, g.dist(g.x(i), g.y(j), p.x, p.y));
            if (dmin > best) {
                best = dmin;
                q = {g.x(i), g.y(j)};
            }
        }
    }
    return q;
}

// Bubble seed: u1 = 2 ln eps + w(|x-q|/eps; s) inside the cutoff radius,
// continued past it at the cutoff value; s tuned so the bubble carries flux
// 2 pi beta with beta = 4 (1 + margin). u2 sits at the uniform level
// 2 ln eps + offset.
inline std::pair<ScalarField, ScalarField> concentrating_seed(
    const ScalarField& u0, double eps, const VortexSet& vortices,
    ConcentratingSeedOptions cs = {}) {
    const TorusGrid& g = u0.grid();
    if (!cs.have_site) {
        auto q = farthest_node_from(g, vortices);
        cs.qx = q.first;
        cs.qy = q.second;
    }
    const double s = invert_beta(4.0 * (1.0 + cs.margin));
    const RadialProfile prof = shoot(0, s);
    const double two_ln_eps = 2.0 * std::log(eps);
    const double w_edge = sample_w(prof, cs.cutoff / eps);

    ScalarField v1(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double r = g.dist(g.x(i), g.y(j), cs.qx, cs.qy);
            const double w =
                r < cs.cutoff ? sample_w(prof, std::max(r, 1e-12) / eps) : w_edge;
            v1.at(i, j) = two_ln_eps + w - u0.at(i, j);
        }
    }
    ScalarField u2(g, two_ln_eps + cs.u2_offset);
    return {std::move(v1), std::move(u2)};
}

// Weak-coupling constraint for a whole schedule: eps strictly decreasing,
// sigma strictly inside (0, n_frak eps^2].
inline void validate_schedule(const std::vector<CouplingParams>& schedule) {
    if (schedule.empty()) throw std::invalid_argument("schedule: empty");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const auto& p = schedule[k];
        p.validate();
        if (!(p.sigma > 0.0))
            throw std::invalid_argument("schedule: sigma must be strictly positive");
        if (k > 0 && !(schedule[k].eps < schedule[k - 1].eps))
            throw std::invalid_argument("schedule: eps must be strictly decreasing");
    }
}

struct ContinuationResult {
    std::vector<SolutionPair> steps;  // converged prefix, one per schedule entry
    bool completed = false;
    int failed_index = -1;      // schedule position of the first failure
    SolutionPair failure;       // trace-bearing failed solve when failed_index >= 0
};

inline ContinuationResult continuation(const TorusGrid& g,
                                       const std::vector<CouplingParams>& schedule,
                                       BranchTag seed_kind, const VortexSet& vortices,
                                       NewtonOptions opts = {},
                                       ConcentratingSeedOptions seed_opts = {}) {
    validate_schedule(schedule);
    if (vortices.empty()) throw std::invalid_argument("continuation: no vortices");
    const ScalarField u0 = background_u0(g, vortices);

    ContinuationResult out;
    ScalarField v1, u2;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (k == 0) {
            auto seed = seed_kind == BranchTag::topological
                            ? topological_seed(u0)
                            : concentrating_seed(u0, schedule[0].eps, vortices, seed_opts);
            v1 = std::move(seed.first);
            u2 = std::move(seed.second);
        }
        SolutionPair sol = newton_solve(v1, u2, schedule[k], vortices, u0, opts, seed_kind);
        if (!sol.converged) {
            out.failed_index = static_cast<int>(k);
            out.failure = std::move(sol);
            return out;
        }
        v1 = sol.v1;  // warm start for the next entry
        u2 = sol.u2;
        out.steps.push_back(std::move(sol));
    }
    out.completed = true;
    return out;
}

// Both integrated identities of the system: integrating the equations over
// the torus, the Laplacian drops and
//   int (1/eps^2) { e^{u1}(1-e^{u1}) + sig^2 e^{u2}(1-e^{u1}) }
//     = int (sig/eps^2) (e^{u1}+e^{u2})(1-e^{u2}) + 8 pi M        (line 1)
//   int (1/eps^2) { e^{u2}(1-e^{u2}) + sig^2 e^{u1}(1-e^{u2}) }
//     = int (sig/eps^2) (e^{u1}+e^{u2})(1-e^{u1})                 (line 2)
struct IntegralIdentity {
    double d1 = 0.0, d2 = 0.0;        // absolute defects of the two lines
    double scale1 = 0.0, scale2 = 0.0;  // max(|lhs|, |rhs|) per line
};

inline IntegralIdentity integral_identity_check(const SolutionPair& sol) {
    const double inv_eps2 = 1.0 / (sol.params.eps * sol.params.eps);
    const double sig = sol.params.sigma;
    const ScalarField u1 = sol.u1();
    const TorusGrid& g = u1.grid();

    double l1 = 0.0, rr1 = 0.0, l2 = 0.0, rr2 = 0.0;
    for (std::size_t k = 0; k < u1.size(); ++k) {
        const double e1 = std::exp(u1[k]), e2 = std::exp(sol.u2[k]);
        l1 += e1 * (1.0 - e1) + sig * sig * e2 * (1.0 - e1);
        rr1 += sig * (e1 + e2) * (1.0 - e2);
        l2 += e2 * (1.0 - e2) + sig * sig * e1 * (1.0 - e2);
        rr2 += sig * (e1 + e2) * (1.0 - e1);
    }
    const double cell = g.cell_area();
    l1 *= inv_eps2 * cell;
    rr1 *= inv_eps2 * cell;
    l2 *= inv_eps2 * cell;
    rr2 *= inv_eps2 * cell;
    const double source = 8.0 * M_PI * sol.vortices.total_multiplicity();

    IntegralIdentity out;
    out.d1 = std::abs(l1 - rr1 - source);
    out.d2 = std::abs(l2 - rr2);
    out.scale1 = std::max(std::abs(l1), std::abs(rr1 + source));
    out.scale2 = std::max(std::abs(l2), std::abs(rr2));
    return out;
}

}  // namespace vortexlab
