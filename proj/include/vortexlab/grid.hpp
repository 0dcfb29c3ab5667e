#pragma once

// Doubly periodic grid, scalar fields and quadrature on the flat torus.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortexlab {

struct TorusGrid {
    int nx = 0, ny = 0;
    double lx = 1.0, ly = 1.0;

    TorusGrid() = default;
    TorusGrid(int nx_, int ny_, double lx_ = 1.0, double ly_ = 1.0)
        : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
        if (nx < 8 || ny < 8)
            throw std::invalid_argument("TorusGrid: need at least 8 points per direction");
        if (nx % 2 != 0 || ny % 2 != 0)
            throw std::invalid_argument("TorusGrid: point counts must be even");
        if (!(lx > 0.0) || !(ly > 0.0))
            throw std::invalid_argument("TorusGrid: side lengths must be positive");
    }

    std::size_t size() const { return std::size_t(nx) * std::size_t(ny); }
    double dx() const { return lx / nx; }
    double dy() const { return ly / ny; }
    double cell_area() const { return dx() * dy(); }
    double area() const { return lx * ly; }
    double x(int i) const { return i * dx(); }
    double y(int j) const { return j * dy(); }
    std::size_t idx(int i, int j) const { return std::size_t(j) * nx + i; }

    bool operator==(const TorusGrid& o) const {
        return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
    }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }

    // shortest signed displacement a-b on the circle of length L
    static double wrap(double d, double L) {
        d = std::fmod(d, L);
        if (d > 0.5 * L) d -= L;
        if (d < -0.5 * L) d += L;
        return d;
    }
    double dist(double ax, double ay, double bx, double by) const {
        const double ux = wrap(ax - bx, lx);
        const double uy = wrap(ay - by, ly);
        return std::hypot(ux, uy);
    }
    // index of the grid node nearest to (px,py), wrapping periodically
    std::size_t nearest_node(double px, double py) const {
        long i = std::lround(px / dx());
        long j = std::lround(py / dy());
        i %= nx; if (i < 0) i += nx;
        j %= ny; if (j < 0) j += ny;
        return idx(int(i), int(j));
    }
};

class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(const TorusGrid& g, double fill = 0.0)
        : grid_(g), v_(g.size(), fill) {}

    const TorusGrid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    double& operator[](std::size_t k) { return v_[k]; }
    double operator[](std::size_t k) const { return v_[k]; }
    double& at(int i, int j) { return v_[grid_.idx(i, j)]; }
    double at(int i, int j) const { return v_[grid_.idx(i, j)]; }

    template <class F>
    static ScalarField sampled(const TorusGrid& g, F&& f) {
        ScalarField out(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out.at(i, j) = f(g.x(i), g.y(j));
        return out;
    }

  private:
    TorusGrid grid_;
    std::vector<double> v_;
};

inline void check_same_grid(const ScalarField& a, const ScalarField& b, const char* op) {
    if (a.grid() != b.grid())
        throw std::invalid_argument(std::string(op) + ": grid mismatch");
}

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    check_same_grid(a, b, "field+field");
    ScalarField out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += b[k];
    return out;
}
inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    check_same_grid(a, b, "field-field");
    ScalarField out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
    return out;
}
inline ScalarField operator*(double c, const ScalarField& a) {
    ScalarField out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= c;
    return out;
}
inline ScalarField operator+(const ScalarField& a, double c) {
    ScalarField out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c;
    return out;
}

template <class F>
inline ScalarField map_field(const ScalarField& a, F&& f) {
    ScalarField out = a;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(a[k]);
    return out;
}

// trapezoid rule on a uniform periodic grid (= plain node sum times cell area)
inline double integrate(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f[k];
    return s * f.grid().cell_area();
}
inline double mean(const ScalarField& f) { return integrate(f) / f.grid().area(); }

inline double norm_inf(const ScalarField& f) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, std::abs(f[k]));
    return m;
}
inline double norm_l2(const ScalarField& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += f[k] * f[k];
    return std::sqrt(s * f.grid().cell_area());
}
inline double min_value(const ScalarField& f) {
    double m = f[0];
    for (std::size_t k = 1; k < f.size(); ++k) m = std::min(m, f[k]);
    return m;
}
inline double max_value(const ScalarField& f) {
    double m = f[0];
    for (std::size_t k = 1; k < f.size(); ++k) m = std::max(m, f[k]);
    return m;
}
inline double median_value(const ScalarField& f) {
    std::vector<double> tmp(f.values());
    std::size_t mid = tmp.size() / 2;
    std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
    return tmp[mid];
}

inline double bilinear_sample(const ScalarField& f, double px, double py) {
    const TorusGrid& g = f.grid();
    double ui = px / g.dx(), uj = py / g.dy();
    double fi = std::floor(ui), fj = std::floor(uj);
    const double tx = ui - fi, ty = uj - fj;
    long i0 = long(fi) % g.nx; if (i0 < 0) i0 += g.nx;
    long j0 = long(fj) % g.ny; if (j0 < 0) j0 += g.ny;
    const int i1 = int((i0 + 1) % g.nx), j1 = int((j0 + 1) % g.ny);
    return (1 - tx) * (1 - ty) * f.at(int(i0), int(j0)) + tx * (1 - ty) * f.at(i1, int(j0)) +
           (1 - tx) * ty * f.at(int(i0), j1) + tx * ty * f.at(i1, j1);
}

struct Vortex {
    double x = 0.0, y = 0.0;
    int m = 1;
};

struct VortexSet {
    std::vector<Vortex> points;

    VortexSet() = default;
    explicit VortexSet(std::vector<Vortex> pts) : points(std::move(pts)) {
        for (const auto& p : points)
            if (p.m < 1) throw std::invalid_argument("VortexSet: multiplicities must be >= 1");
    }
    int total_multiplicity() const {
        int s = 0;
        for (const auto& p : points) s += p.m;
        return s;
    }
    bool empty() const { return points.empty(); }
};

// Integral of f over the periodic ball B_radius(center). Sharp cutoff; cells that
// straddle the boundary contribute a 16x16 midpoint sum of bilinear samples over
// their covered part, so the rim error stays well below the interior sum's.
inline double ball_integral(const ScalarField& f, double cx, double cy, double radius) {
    const TorusGrid& g = f.grid();
    if (!(radius > 0.0) || radius >= 0.5 * std::min(g.lx, g.ly))
        throw std::invalid_argument("ball_integral: radius must be in (0, min(lx,ly)/2)");
    const double dx = g.dx(), dy = g.dy();
    const double halfdiag = 0.5 * std::hypot(dx, dy);
    constexpr int sub = 16;
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double d = g.dist(g.x(i), g.y(j), cx, cy);
            if (d <= radius - halfdiag) {
                sum += f.at(i, j);
            } else if (d >= radius + halfdiag) {
                continue;
            } else {
                double part = 0.0;
                for (int b = 0; b < sub; ++b) {
                    const double sy = g.y(j) + ((b + 0.5) / sub - 0.5) * dy;
                    for (int a = 0; a < sub; ++a) {
                        const double sx = g.x(i) + ((a + 0.5) / sub - 0.5) * dx;
                        if (g.dist(sx, sy, cx, cy) <= radius)
                            part += bilinear_sample(f, sx, sy);
                    }
                }
                sum += part / (sub * sub);
            }
        }
    }
    return sum * g.cell_area();
}

}  // namespace vortexlab
