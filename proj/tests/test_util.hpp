#pragma once

#include "nmiter/calculus.hpp"
#include "nmiter/grid.hpp"

#include <complex>
#include <random>
#include <vector>

namespace testutil {

using nmiter::fnspace::Grid;
using nmiter::fnspace::GridFunction;

/// Random real function with spectrum supported on modes 1..band.
inline GridFunction random_band_limited(const Grid& g, int band, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    GridFunction f(g, 1);
    for (int m = 1; m <= band; ++m) {
        const double a = gauss(rng), b = gauss(rng);
        const double xi = m / g.domain;
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            f(0, i) += a * std::cos(xi * x) + b * std::sin(xi * x);
        }
    }
    return f;
}

/// Brute-force trigonometric coefficients of a 1-component periodic sample:
/// c_m = (1/n) sum_j f_j e^{-i xi_m x_j}, independent of the FFT path.
inline std::vector<std::complex<double>> brute_coeffs(const GridFunction& f) {
    const Grid& g = f.grid();
    const int n = g.n;
    std::vector<std::complex<double>> c(n / 2 + 1);
    for (int m = 0; m <= n / 2; ++m) {
        std::complex<double> acc = 0.0;
        const double xi = m / g.domain;
        for (int j = 0; j < n; ++j) {
            const double ph = -xi * g.x(j);
            acc += f(0, j) * std::complex<double>(std::cos(ph), std::sin(ph));
        }
        c[m] = acc / static_cast<double>(n);
    }
    return c;
}

/// Sobolev norm assembled by direct summation over the brute coefficients.
inline double brute_fourier_norm(const GridFunction& f, double s, double eps) {
    const Grid& g = f.grid();
    auto c = brute_coeffs(f);
    double acc = 0.0;
    for (int m = 0; m <= g.n / 2; ++m) {
        const double mult = (m == 0 || m == g.n / 2) ? 1.0 : 2.0;
        const double xi = m / g.domain;
        acc += mult * std::pow(1.0 + eps * eps * xi * xi, s) * std::norm(c[m]);
    }
    return std::sqrt(g.period() * acc);
}

}  // namespace testutil
