#pragma once

// Torus Green's function -Delta G = delta_y - 1/|T|, its regular part, and the
// singular background u0 = -8*pi * sum_i m_i G(., p_i) carrying the vortex data.

#include <cmath>
#include <stdexcept>

#include "vortexlab/grid.hpp"
#include "vortexlab/spectral.hpp"

namespace vortexlab {

// Dirac mass at (px,py): nearest-node point mass of weight 1/cell_area, so the
// discrete integral is exactly 1.
inline ScalarField discrete_delta(const TorusGrid& g, double px, double py) {
    ScalarField d(g);
    d[g.nearest_node(px, py)] = 1.0 / g.cell_area();
    return d;
}

// Mean-zero G(., y) solving -Delta G = delta_y - 1/|T|.
inline ScalarField green_function(const TorusGrid& g, double yx, double yy) {
    ScalarField rhs = discrete_delta(g, yx, yy);
    const double bg = 1.0 / g.area();
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = bg - rhs[k];
    return solve_poisson_meanzero(rhs);  // Delta G = 1/|T| - delta
}

// Regular part gamma(x,y) = G(x,y) + ln|x-y| / (2*pi), |x-y| the nearest-image
// distance. Undefined on the diagonal; see regular_part_at_source.
inline double regular_part(const TorusGrid& g, double yx, double yy, double xx, double xy) {
    const double r = g.dist(xx, xy, yx, yy);
    if (r < 0.25 * std::min(g.dx(), g.dy()))
        throw std::invalid_argument(
            "regular_part: x coincides with y; use regular_part_at_source");
    ScalarField G = green_function(g, yx, yy);
    return bilinear_sample(G, xx, xy) + std::log(r) / (2.0 * M_PI);
}

// Continuous extension gamma(y,y) by Richardson extrapolation from two offsets.
// gamma is even in x-y, so gamma(r) = gamma(0) + O(r^2) and (4*g(r) - g(2r))/3
// cancels the quadratic term.
inline double regular_part_at_source(const TorusGrid& g, double yx, double yy,
                                     double offset = 0.0) {
    if (offset <= 0.0) offset = 8.0 * g.dx();
    ScalarField G = green_function(g, yx, yy);
    auto gamma_at = [&](double r) {
        return bilinear_sample(G, yx + r, yy) + std::log(r) / (2.0 * M_PI);
    };
    const double g1 = gamma_at(offset), g2 = gamma_at(2.0 * offset);
    return (4.0 * g1 - g2) / 3.0;
}

// u0 = -8*pi * sum_i m_i G(., p_i), computed with one mean-zero Poisson solve:
// Delta u0 = 8*pi * sum_i m_i delta_{p_i} - 8*pi*M/|T|.
inline ScalarField background_u0(const TorusGrid& g, const VortexSet& vortices) {
    ScalarField rhs(g);
    const double invh = 1.0 / g.cell_area();
    for (const auto& p : vortices.points)
        rhs[g.nearest_node(p.x, p.y)] += 8.0 * M_PI * p.m * invh;
    const double bg = 8.0 * M_PI * vortices.total_multiplicity() / g.area();
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] -= bg;
    return solve_poisson_meanzero(rhs);
}

}  // namespace vortexlab
