#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "green.hpp"
#include "grid.hpp"
#include "solver.hpp"
#include "spectral.hpp"

namespace vortexlab {

struct MassIntegrals {
    double i1 = 0.0;  // (1/eps^2) int e^{u1} (1 - e^{u1})
    double i2 = 0.0;  // (1/eps^2) int e^{u2} (1 - e^{u2})
};

inline MassIntegrals mass_integrals(const SolutionPair& sol) {
    const double inv_e2 = 1.0 / (sol.params.eps * sol.params.eps);
    auto density = [inv_e2](double u) {
        const double e = std::exp(u);
        return inv_e2 * e * (1.0 - e);
    };
    MassIntegrals mi;
    mi.i1 = integrate(map_field(sol.u1(), density));
    mi.i2 = integrate(map_field(sol.u2, density));
    return mi;
}

struct StepRecord {
    double eps = 0.0;
    double sigma = 0.0;
    double i1 = 0.0;
    double i2 = 0.0;
    double sup_u1 = 0.0;
    double sup_u2 = 0.0;
    double sup_w1 = 0.0;  // sup(u1 - 2 ln eps)
    double sup_w2 = 0.0;
    double grad_v1_scaled = 0.0;  // eps * |grad v1|_inf
    double grad_u2 = 0.0;         // |grad u2|_inf
};

namespace detail {

inline double max_gradient_norm(const ScalarField& f) {
    auto [gx, gy] = gradient(f);
    double m = 0.0;
    for (std::size_t k = 0; k < gx.size(); ++k)
        m = std::max(m, std::hypot(gx[k], gy[k]));
    return m;
}

}  // namespace detail

inline StepRecord step_record(const SolutionPair& sol) {
    StepRecord r;
    r.eps = sol.params.eps;
    r.sigma = sol.params.sigma;
    const MassIntegrals mi = mass_integrals(sol);
    r.i1 = mi.i1;
    r.i2 = mi.i2;
    r.sup_u1 = max_value(sol.u1());
    r.sup_u2 = max_value(sol.u2);
    const double shift = 2.0 * std::log(r.eps);
    r.sup_w1 = r.sup_u1 - shift;
    r.sup_w2 = r.sup_u2 - shift;
    r.grad_v1_scaled = r.eps * detail::max_gradient_norm(sol.v1);
    r.grad_u2 = detail::max_gradient_norm(sol.u2);
    return r;
}

enum class FirstClass { f1, f2, f3, undetermined };
enum class SecondClass { s1, s2, undetermined };

inline const char* to_string(FirstClass c) {
    switch (c) {
        case FirstClass::f1: return "f1";
        case FirstClass::f2: return "f2";
        case FirstClass::f3: return "f3";
        default: return "undetermined";
    }
}

inline const char* to_string(SecondClass c) {
    switch (c) {
        case SecondClass::s1: return "s1";
        case SecondClass::s2: return "s2";
        default: return "undetermined";
    }
}

struct ClassifyOptions {
    double vortex_ball_radius = 0.1;   // exclusion radius around vortices for far-field tests
    double far_field_threshold = 0.05; // |u1| bound defining "tends to zero"
    double stabilize_band = 0.5;       // sup_w1 band for the bounded-profile class
    double cauchy_tol = 0.02;          // successive sampled-norm difference for w1 - u0
    double local_mass_radius = 0.2;    // ball radius for site mass
    double mass_tol = 0.2;             // quantization slack below 8*pi
};

inline std::vector<std::array<double, 2>> detect_blowup_points(const SolutionPair& sol,
                                                               double threshold = 0.0) {
    const TorusGrid& g = sol.v1.grid();
    ScalarField w1 = sol.u1();
    const double shift = 2.0 * std::log(sol.params.eps);
    for (std::size_t k = 0; k < w1.size(); ++k) w1[k] -= shift;
    // A peak has to clear both the caller threshold and the median-relative
    // prominence cut; an absolute cut alone cannot separate concentration
    // from the global -2 ln eps shift.
    const double cut = std::max(threshold, median_value(w1) + 4.0);

    struct Peak {
        double x, y, v;
    };
    std::vector<Peak> peaks;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double v = w1.at(i, j);
            if (v <= cut) continue;
            bool is_max = true;
            for (int dj = -1; dj <= 1 && is_max; ++dj)
                for (int di = -1; di <= 1 && is_max; ++di) {
                    if (di == 0 && dj == 0) continue;
                    const int ii = (i + di + g.nx) % g.nx;
                    const int jj = (j + dj + g.ny) % g.ny;
                    if (w1.at(ii, jj) > v) is_max = false;
                }
            if (is_max) peaks.push_back({g.x(i), g.y(j), v});
        }
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.v > b.v; });
    std::vector<std::array<double, 2>> sites;
    for (const Peak& p : peaks) {
        bool merged = false;
        for (const auto& s : sites)
            if (g.dist(p.x, p.y, s[0], s[1]) < 0.1) {
                merged = true;
                break;
            }
        if (!merged) sites.push_back({p.x, p.y});
    }
    return sites;
}

inline double local_mass(const SolutionPair& sol, double qx, double qy, double d) {
    if (!(d > 0.0 && d < 0.25))
        throw std::invalid_argument("local_mass: ball radius must lie in (0, 0.25)");
    const double inv_e2 = 1.0 / (sol.params.eps * sol.params.eps);
    ScalarField dens = map_field(sol.u1(), [inv_e2](double u) {
        const double e = std::exp(u);
        return inv_e2 * e * (1.0 - e);
    });
    return ball_integral(dens, qx, qy, d);
}

struct BlowupSite {
    double x = 0.0;
    double y = 0.0;
    double mass = 0.0;     // first-component mass in the (possibly shrunk) ball
    double radius = 0.0;   // ball radius actually used
    double peak_w1 = 0.0;  // w1 value at the detected peak node
};

namespace detail {

inline bool run_shape_ok(const std::vector<SolutionPair>& run) {
    if (run.size() < 4) return false;
    for (std::size_t k = 1; k < run.size(); ++k)
        if (!(run[k].params.eps < run[k - 1].params.eps)) return false;
    return true;
}

inline std::vector<BlowupSite> collect_sites(const SolutionPair& sol, const ClassifyOptions& opts,
                                             std::vector<std::string>* warnings) {
    std::vector<BlowupSite> out;
    const TorusGrid& g = sol.v1.grid();
    auto points = detect_blowup_points(sol);
    if (points.empty()) return out;
    double d = opts.local_mass_radius;
    for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t b = a + 1; b < points.size(); ++b) {
            const double sep = g.dist(points[a][0], points[a][1], points[b][0], points[b][1]);
            if (sep < 2.0 * d) {
                d = std::min(d, 0.49 * sep);
                if (warnings)
                    warnings->push_back("blowup sites closer than twice the mass radius; shrunk ball to " +
                                        std::to_string(d));
            }
        }
    ScalarField w1 = sol.u1();
    const double shift = 2.0 * std::log(sol.params.eps);
    for (const auto& p : points) {
        BlowupSite s;
        s.x = p[0];
        s.y = p[1];
        s.radius = d;
        s.mass = d > 0.0 ? local_mass(sol, p[0], p[1], std::min(d, 0.2499)) : 0.0;
        s.peak_w1 = w1[g.nearest_node(p[0], p[1])] - shift;
        out.push_back(s);
    }
    return out;
}

inline double far_field_max(const SolutionPair& sol, double exclusion_radius) {
    const TorusGrid& g = sol.v1.grid();
    ScalarField u1 = sol.u1();
    double m = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double x = g.x(i), y = g.y(j);
            bool excluded = false;
            for (const Vortex& v : sol.vortices.points)
                if (g.dist(x, y, v.x, v.y) < exclusion_radius) {
                    excluded = true;
                    break;
                }
            if (!excluded) m = std::max(m, std::abs(u1.at(i, j)));
        }
    return m;
}

// sup over a coarse sample lattice of |a - b|
inline double sampled_sup_diff(const ScalarField& a, const ScalarField& b) {
    const TorusGrid& g = a.grid();
    const int step_i = std::max(1, g.nx / 32);
    const int step_j = std::max(1, g.ny / 32);
    double m = 0.0;
    for (int j = 0; j < g.ny; j += step_j)
        for (int i = 0; i < g.nx; i += step_i)
            m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
    return m;
}

}  // namespace detail

inline SecondClass classify_second(const std::vector<SolutionPair>& run) {
    if (!detail::run_shape_ok(run)) return SecondClass::undetermined;
    std::vector<double> le, ln, ratio;
    std::vector<double> sup_w2;
    for (const SolutionPair& s : run) {
        const double eps = s.params.eps;
        const double n = std::max(norm_inf(s.u2), 1e-300);
        le.push_back(std::log(eps));
        ln.push_back(std::log(n));
        ratio.push_back(n / (eps * eps));
        sup_w2.push_back(max_value(s.u2) - 2.0 * std::log(eps));
    }
    const double n = static_cast<double>(le.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < le.size(); ++k) {
        sx += le[k];
        sy += ln[k];
        sxx += le[k] * le[k];
        sxy += le[k] * ln[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double rmin = *std::min_element(ratio.begin(), ratio.end());
    const double rmax = *std::max_element(ratio.begin(), ratio.end());
    if (slope >= 1.8 && rmax <= 10.0 * std::max(rmin, 1e-300)) return SecondClass::s1;

    bool monotone = true;
    for (std::size_t k = 1; k < sup_w2.size(); ++k)
        if (sup_w2[k] > sup_w2[k - 1] + 1e-9) monotone = false;
    if (monotone && sup_w2.front() - sup_w2.back() >= 2.0) return SecondClass::s2;
    return SecondClass::undetermined;
}

inline FirstClass classify_first(const std::vector<SolutionPair>& run,
                                 const ClassifyOptions& opts = {}) {
    if (!detail::run_shape_ok(run)) return FirstClass::undetermined;

    // The vortex tail decays like exp(-dist/eps), so the exclusion zone must
    // cover several screening lengths of the sharpest profile in the run.
    double eps_min = run.front().params.eps;
    for (const SolutionPair& s : run) eps_min = std::min(eps_min, s.params.eps);
    const double excl = std::max(opts.vortex_ball_radius, 8.0 * eps_min);

    std::vector<double> far, sup_w1;
    for (const SolutionPair& s : run) {
        far.push_back(detail::far_field_max(s, excl));
        sup_w1.push_back(max_value(s.u1()) - 2.0 * std::log(s.params.eps));
    }

    if (far.back() < opts.far_field_threshold && far.back() <= far.front()) return FirstClass::f1;

    if (sup_w1.back() - sup_w1.front() >= 2.0) {
        auto sites = detail::collect_sites(run.back(), opts, nullptr);
        for (const BlowupSite& s : sites)
            if (s.mass >= 8.0 * M_PI - opts.mass_tol) return FirstClass::f3;
        // peaks without quantized mass do not count as blow-up
    }

    bool stable = true;
    for (double w : sup_w1)
        if (std::abs(w - sup_w1.back()) > opts.stabilize_band) stable = false;
    if (stable) {
        const SolutionPair& a = run[run.size() - 2];
        const SolutionPair& b = run.back();
        ScalarField ha = a.u1();
        ScalarField hb = b.u1();
        const double da = 2.0 * std::log(a.params.eps);
        const double db = 2.0 * std::log(b.params.eps);
        for (std::size_t k = 0; k < ha.size(); ++k) {
            ha[k] -= da + a.u0[k];
            hb[k] -= db + b.u0[k];
        }
        if (detail::sampled_sup_diff(ha, hb) < opts.cauchy_tol) return FirstClass::f2;
    }
    return FirstClass::undetermined;
}

struct PohozaevRecord {
    double r = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // |lhs - rhs|
    double scale = 0.0;     // max(|lhs|, |rhs|)
};

inline PohozaevRecord pohozaev_residual(const SolutionPair& sol, double cx, double cy, double r,
                                        double c0, double c1) {
    const TorusGrid& g = sol.v1.grid();
    const double h = std::max(g.dx(), g.dy());
    if (!(r < 0.25)) throw std::invalid_argument("pohozaev_residual: ball radius must be < 0.25");
    if (!(r >= 8.0 * h))
        throw std::invalid_argument("pohozaev_residual: ball radius under-resolved on this grid");

    const double fd = std::max(3.0 * h, r / 24.0);  // boundary-gradient stencil half-width
    int m = 0;
    for (const Vortex& v : sol.vortices.points) {
        const double d = g.dist(cx, cy, v.x, v.y);
        if (d < 1e-8)
            m = v.m;
        else if (d < r + fd + 2.0 * h)
            throw std::invalid_argument("pohozaev_residual: ball clips a vortex not at its center");
    }

    const double eps = sol.params.eps;
    const double sig = sol.params.sigma;
    const double inv_e2 = 1.0 / (eps * eps);
    const double one_ms2 = 1.0 - sig * sig;

    auto [gv1x, gv1y] = gradient(sol.v1);
    auto [gu2x, gu2y] = gradient(sol.u2);
    ScalarField u1 = sol.u1();

    // grad(phi1) on the circle: the smooth part v1 is sampled from its spectral
    // gradient, while the background piece rho = u0 - 4m ln|x - p| is differenced
    // from point values. Spectral derivatives of u0 ring near the sources; the
    // values do not, and the log subtraction below is exact.
    auto rho = [&](double rr, double th) {
        const double x = cx + rr * std::cos(th);
        const double y = cy + rr * std::sin(th);
        return bilinear_sample(sol.u0, x, y) - 4.0 * m * std::log(rr);
    };

    const int ntheta = std::max(720, 8 * static_cast<int>(std::ceil(2.0 * M_PI * r / h)));
    const double wq = 2.0 * M_PI * r / ntheta;
    const double alpha = fd / r;
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
    for (int k = 0; k < ntheta; ++k) {
        const double th = 2.0 * M_PI * k / ntheta;
        const double ex = std::cos(th), ey = std::sin(th);
        const double x = cx + r * ex;  // bilinear_sample wraps periodically
        const double y = cy + r * ey;

        const double v1x = bilinear_sample(gv1x, x, y);
        const double v1y = bilinear_sample(gv1y, x, y);
        const double pr = (v1x * ex + v1y * ey) + (rho(r + fd, th) - rho(r - fd, th)) / (2.0 * fd);
        const double pt = (v1y * ex - v1x * ey) + (rho(r, th + alpha) - rho(r, th - alpha)) / (2.0 * r * alpha);

        const double qx2 = bilinear_sample(gu2x, x, y);
        const double qy2 = bilinear_sample(gu2y, x, y);
        const double qr = qx2 * ex + qy2 * ey;
        const double qt = qy2 * ex - qx2 * ey;

        t1 += r * (pr * pr - pt * pt + qr * qr - qt * qt) / 2.0 * wq;
        t2 += sig * r * (pr * qr - pt * qt) * wq;

        const double e1 = std::exp(bilinear_sample(u1, x, y));
        const double e2 = std::exp(bilinear_sample(sol.u2, x, y));
        t3 += one_ms2 * inv_e2 * r *
              (e1 * (1.0 - 0.5 * e1) + e2 * (1.0 - 0.5 * e2) - c0 - sig * (e1 + e2 - e1 * e2 - c1)) *
              wq;
    }

    ScalarField bulk(g);
    for (std::size_t k = 0; k < bulk.size(); ++k) {
        const double e1 = std::exp(u1[k]);
        const double e2 = std::exp(sol.u2[k]);
        const double ew1 = e1 * inv_e2;
        const double r1 = one_ms2 * (2.0 * ew1 * (1.0 - 0.5 * e1) + 4.0 * m * ew1 * (1.0 - e1));
        const double r2 = 2.0 * one_ms2 * inv_e2 * (e2 * (1.0 - 0.5 * e2) - c0 - sig * (e2 - c1));
        const double r3 = -one_ms2 * sig * (4.0 * m + 2.0) * ew1 * (1.0 - e2);
        bulk[k] = r1 + r2 + r3;
    }

    PohozaevRecord rec;
    rec.r = r;
    rec.c0 = c0;
    rec.c1 = c1;
    rec.lhs = t1 + t2 + t3;
    rec.rhs = ball_integral(bulk, cx, cy, r);
    rec.residual = std::abs(rec.lhs - rec.rhs);
    rec.scale = std::max(std::abs(rec.lhs), std::abs(rec.rhs));
    return rec;
}

inline PohozaevRecord pohozaev_residual(const SolutionPair& sol, double cx, double cy, double r,
                                        SecondClass second_class) {
    const bool quadratic = second_class == SecondClass::s1;
    return pohozaev_residual(sol, cx, cy, r, quadratic ? 0.5 : 0.0, quadratic ? 1.0 : 0.0);
}

struct GradientBounds {
    double max_grad_v1_scaled = 0.0;
    double max_grad_u2 = 0.0;
    double growth_v1 = 0.0;  // max over run relative to the first step
    double growth_u2 = 0.0;
    bool flagged = false;
};

inline GradientBounds gradient_bounds(const std::vector<SolutionPair>& run) {
    if (run.size() < 3)
        throw std::invalid_argument("gradient_bounds: need at least 3 steps");
    GradientBounds gb;
    double first_v1 = 0.0, first_u2 = 0.0;
    for (std::size_t k = 0; k < run.size(); ++k) {
        const double gv = run[k].params.eps * detail::max_gradient_norm(run[k].v1);
        const double gu = detail::max_gradient_norm(run[k].u2);
        gb.max_grad_v1_scaled = std::max(gb.max_grad_v1_scaled, gv);
        gb.max_grad_u2 = std::max(gb.max_grad_u2, gu);
        if (k == 0) {
            first_v1 = std::max(gv, 1e-300);
            first_u2 = std::max(gu, 1e-300);
        }
    }
    gb.growth_v1 = gb.max_grad_v1_scaled / first_v1;
    gb.growth_u2 = gb.max_grad_u2 / first_u2;
    gb.flagged = gb.growth_v1 > 3.0 || gb.growth_u2 > 3.0;
    return gb;
}

struct DiagnosticsReport {
    std::vector<StepRecord> steps;
    FirstClass first_class = FirstClass::undetermined;
    SecondClass second_class = SecondClass::undetermined;
    std::vector<BlowupSite> blowup_sites;
    std::vector<PohozaevRecord> pohozaev;
    GradientBounds gradients;
    std::vector<std::string> warnings;
};

inline DiagnosticsReport diagnose_run(const std::vector<SolutionPair>& run,
                                      const ClassifyOptions& opts = {}) {
    DiagnosticsReport rep;
    if (run.empty()) return rep;
    const double n_frak = run.back().params.n_frak;
    const double area = run.back().v1.grid().area();
    double total_m = 0.0;
    for (const Vortex& v : run.back().vortices.points) total_m += v.m;

    for (const SolutionPair& s : run) {
        rep.steps.push_back(step_record(s));
        const StepRecord& r = rep.steps.back();
        if (r.i1 > 8.0 * M_PI * total_m * (1.0 + 1e-6) && total_m > 0.0)
            rep.warnings.push_back("i1 exceeds 8*pi*M by " +
                                   std::to_string(r.i1 - 8.0 * M_PI * total_m) +
                                   " at eps=" + std::to_string(r.eps) +
                                   " (finite-sigma excess; the strict bound holds only as eps -> 0)");
        if (r.i2 > 2.0 * n_frak * area * (1.0 + 1e-6))
            rep.warnings.push_back("i2 exceeds 2*N*|T| at eps=" + std::to_string(r.eps));
    }
    rep.first_class = classify_first(run, opts);
    rep.second_class = classify_second(run);
    rep.blowup_sites = detail::collect_sites(run.back(), opts, &rep.warnings);

    const SolutionPair& last = run.back();
    const TorusGrid& g = last.v1.grid();
    for (const Vortex& v : last.vortices.points) {
        const double r = std::min(0.2, 0.24 * std::min(g.lx, g.ly));
        try {
            rep.pohozaev.push_back(pohozaev_residual(last, v.x, v.y, r, rep.second_class));
        } catch (const std::invalid_argument&) {
            rep.warnings.push_back("pohozaev ball skipped at a vortex (geometry constraints)");
        }
    }
    if (run.size() >= 3) rep.gradients = gradient_bounds(run);
    return rep;
}

}  // namespace vortexlab
