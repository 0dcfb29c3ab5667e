#pragma once

// Spectral operators on the torus: Laplacian, mean-zero Poisson inverse,
// screened inverse (Delta - 1/eps^2)^{-1}, gradients. FFTW r2c transforms,
// FFTW_ESTIMATE plans (deterministic), serialized through a mutex so field
// operations may be issued concurrently on distinct fields.

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "vortexlab/grid.hpp"

namespace vortexlab {
namespace detail {

struct FftPlans {
    int nx = 0, ny = 0;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;

    FftPlans(int nx_, int ny_) : nx(nx_), ny(ny_) {
        real = fftw_alloc_real(std::size_t(nx) * ny);
        spec = fftw_alloc_complex(std::size_t(ny) * (nx / 2 + 1));
        // row-major [ny][nx]: slow dimension first
        fwd = fftw_plan_dft_r2c_2d(ny, nx, real, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(ny, nx, spec, real, FFTW_ESTIMATE);
    }
    ~FftPlans() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
};

inline std::mutex& fft_mutex() {
    static std::mutex m;
    return m;
}

inline FftPlans& plans_for(int nx, int ny) {
    static std::map<std::pair<int, int>, std::unique_ptr<FftPlans>> cache;
    auto key = std::make_pair(nx, ny);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<FftPlans>(nx, ny)).first;
    return *it->second;
}

// Applies out(k) = mult(kx, ky, is_nyquist) * in_hat(k) in spectral space.
// mult receives physical wavenumbers 2*pi*f/L.
template <class Mult>
inline ScalarField apply_multiplier(const ScalarField& f, Mult&& mult) {
    const TorusGrid& g = f.grid();
    std::lock_guard<std::mutex> lock(fft_mutex());
    FftPlans& p = plans_for(g.nx, g.ny);
    std::copy(f.data(), f.data() + f.size(), p.real);
    fftw_execute(p.fwd);
    const int nxh = g.nx / 2 + 1;
    const double fx = 2.0 * M_PI / g.lx, fy = 2.0 * M_PI / g.ly;
    for (int j = 0; j < g.ny; ++j) {
        const int jf = (j <= g.ny / 2) ? j : j - g.ny;
        const bool ny_nyq = (j == g.ny / 2);
        for (int i = 0; i < nxh; ++i) {
            const bool nyq = ny_nyq || (i == g.nx / 2);
            const std::complex<double> m = mult(fx * i, fy * jf, nyq);
            auto& c = p.spec[std::size_t(j) * nxh + i];
            const std::complex<double> z = m * std::complex<double>(c[0], c[1]);
            c[0] = z.real();
            c[1] = z.imag();
        }
    }
    fftw_execute(p.bwd);
    ScalarField out(g);
    const double scale = 1.0 / double(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) out[k] = p.real[k] * scale;
    return out;
}

}  // namespace detail

// True spectral Laplacian (multiplier -|k|^2).
inline ScalarField laplacian(const ScalarField& f) {
    return detail::apply_multiplier(f, [](double kx, double ky, bool) {
        return std::complex<double>(-(kx * kx + ky * ky), 0.0);
    });
}

// Solves Delta u = f - mean(f), returns the mean-zero solution.
inline ScalarField solve_poisson_meanzero(const ScalarField& f) {
    return detail::apply_multiplier(f, [](double kx, double ky, bool) {
        const double k2 = kx * kx + ky * ky;
        return std::complex<double>(k2 == 0.0 ? 0.0 : -1.0 / k2, 0.0);
    });
}

// Solves Delta S - S/eps^2 = g. Negative-definite operator, unconditionally
// invertible; the constant mode maps to S0 = -eps^2 g0.
inline ScalarField solve_screened(const ScalarField& g, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("solve_screened: eps must be positive");
    const double inv_eps2 = 1.0 / (eps * eps);
    return detail::apply_multiplier(g, [inv_eps2](double kx, double ky, bool) {
        return std::complex<double>(-1.0 / (kx * kx + ky * ky + inv_eps2), 0.0);
    });
}

struct ScreenedDiagnostics {
    ScalarField field;
    double ratio_l2 = 0.0;   // ||S||_inf / (eps * ||g||_2)
    double ratio_inf = 0.0;  // ||S||_inf / (eps^2 * ||g||_inf)
};

inline ScreenedDiagnostics screened_diagnostics(const ScalarField& g, double eps) {
    ScreenedDiagnostics d{solve_screened(g, eps), 0.0, 0.0};
    const double sinf = norm_inf(d.field);
    const double g2 = norm_l2(g), ginf = norm_inf(g);
    d.ratio_l2 = g2 > 0.0 ? sinf / (eps * g2) : 0.0;
    d.ratio_inf = ginf > 0.0 ? sinf / (eps * eps * ginf) : 0.0;
    return d;
}

// Spectral gradient. The Nyquist modes carry no representable sign information
// for first derivatives and are zeroed.
inline std::pair<ScalarField, ScalarField> gradient(const ScalarField& f) {
    ScalarField gx = detail::apply_multiplier(f, [](double kx, double, bool nyq) {
        return nyq ? std::complex<double>(0.0) : std::complex<double>(0.0, kx);
    });
    ScalarField gy = detail::apply_multiplier(f, [](double, double ky, bool nyq) {
        return nyq ? std::complex<double>(0.0) : std::complex<double>(0.0, ky);
    });
    return {std::move(gx), std::move(gy)};
}

}  // namespace vortexlab
