#pragma once

// Independent reference implementations used as test oracles.

#include "couette/spectral.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace testing_support {

using couette::cplx;
using couette::Grid;
using couette::SpectralField;
using couette::ZeroModeField;

inline constexpr double kPi = std::numbers::pi;

// Hermitian random spectrum restricted to |k| <= kmax, |m| <= mmax.
// k = 0 can be excluded for fields that live on nonzero modes only.
inline SpectralField random_field(const Grid& g, std::mt19937_64& rng, int kmax, int mmax, bool with_k0 = true) {
    std::normal_distribution<double> n(0.0, 1.0);
    SpectralField f(g);
    for (int j = 0; j < g.n_y(); ++j) {
        const int m = g.eta_index(j);
        if (std::abs(m) > mmax || 2 * std::abs(m) == g.n_y()) continue;
        for (int k = with_k0 ? 0 : 1; k <= std::min(kmax, g.n_z() / 2 - 1); ++k) f.at(j, k) = cplx(n(rng), n(rng));
    }
    if (with_k0) {
        for (int m = 1; m < g.n_y() / 2; ++m) f.at(g.row_of(-m), 0) = std::conj(f.at(g.row_of(m), 0));
        f.at(0, 0) = cplx(f.at(0, 0).real(), 0.0);
    }
    return f;
}

inline ZeroModeField random_profile(const Grid& g, std::mt19937_64& rng, int mmax) {
    std::normal_distribution<double> n(0.0, 1.0);
    ZeroModeField z(g);
    for (int m = 1; m <= mmax && 2 * m < g.n_y(); ++m) {
        z.at(g.row_of(m)) = cplx(n(rng), n(rng));
        z.at(g.row_of(-m)) = std::conj(z.at(g.row_of(m)));
    }
    return z;
}

// O(N^2) DFT with the library's normalization: c(k, m) = mean of u e^{-i(kz + m y pi/L)}.
inline std::vector<cplx> direct_forward(const Grid& g, const std::vector<double>& u) {
    const int nz = g.n_z(), ny = g.n_y();
    std::vector<cplx> c(g.spectral_size());
    for (int j = 0; j < ny; ++j) {
        const int m = g.eta_index(j);
        for (int k = 0; k < g.n_k(); ++k) {
            cplx acc = 0.0;
            for (int jj = 0; jj < ny; ++jj)
                for (int i = 0; i < nz; ++i) {
                    const double ph = -2.0 * kPi * (double(k) * i / nz + double(m) * jj / ny);
                    acc += u[static_cast<std::size_t>(jj) * nz + i] * std::polar(1.0, ph);
                }
            c[static_cast<std::size_t>(j) * g.n_k() + k] = acc / double(nz * ny);
        }
    }
    return c;
}

// Full-plane synthesis, real and imaginary parts.
inline std::pair<std::vector<double>, std::vector<double>> direct_inverse(const SpectralField& f) {
    const Grid& g = f.grid();
    const int nz = g.n_z(), ny = g.n_y();
    std::vector<double> re(g.physical_size()), im(g.physical_size());
    for (int jj = 0; jj < ny; ++jj)
        for (int i = 0; i < nz; ++i) {
            cplx acc = 0.0;
            for (int k = -nz / 2 + 1; k <= nz / 2; ++k)
                for (int m = -ny / 2 + 1; m <= ny / 2; ++m) {
                    const double ph = 2.0 * kPi * (double(k) * i / nz + double(m) * jj / ny);
                    acc += f.coeff(k, m) * std::polar(1.0, ph);
                }
            re[static_cast<std::size_t>(jj) * nz + i] = acc.real();
            im[static_cast<std::size_t>(jj) * nz + i] = acc.imag();
        }
    return {re, im};
}

// Full-plane coefficient map over signed (k, m) in the non-Nyquist box.
using Plane = std::map<std::pair<int, int>, cplx>;

inline Plane full_plane(const SpectralField& f) {
    const Grid& g = f.grid();
    Plane p;
    for (int k = -g.n_z() / 2 + 1; k < g.n_z() / 2; ++k)
        for (int m = -g.n_y() / 2 + 1; m < g.n_y() / 2; ++m) {
            const cplx c = f.coeff(k, m);
            if (c != cplx(0.0)) p[{k, m}] = c;
        }
    return p;
}

// Brute-force product of two spectra without wrap-around.
inline Plane convolve(const Plane& a, const Plane& b) {
    Plane out;
    for (const auto& [ka, ca] : a)
        for (const auto& [kb, cb] : b) out[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
    return out;
}

inline cplx plane_at(const Plane& p, int k, int m) {
    auto it = p.find({k, m});
    return it == p.end() ? cplx(0.0) : it->second;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing_support
