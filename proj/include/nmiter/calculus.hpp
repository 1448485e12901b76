#pragma once

#include "nmiter/grid.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace nmiter::fnspace {

enum class CutoffShape { smooth_bump, raised_cosine, sharp };

/// Frequency cutoff chi: identically 1 on [0,1], identically 0 on [2,inf),
/// non-increasing in between.
struct CutoffProfile {
    CutoffShape shape = CutoffShape::smooth_bump;

    double operator()(double t) const {
        if (t <= 1.0) return 1.0;
        if (t >= 2.0) return 0.0;
        switch (shape) {
            case CutoffShape::smooth_bump: {
                const double u = t - 1.0;
                return std::exp(1.0 - 1.0 / (1.0 - u * u));
            }
            case CutoffShape::raised_cosine:
                return 0.5 * (1.0 + std::cos(Grid::pi() * (t - 1.0)));
            case CutoffShape::sharp:
                return 0.0;
        }
        return 0.0;
    }
};

/// k-th derivative. Periodic grids differentiate spectrally (exact on the
/// resolved band); line grids iterate a centered 4th-order stencil with
/// one-sided closures. The public contract limits line grids to k <= 4.
GridFunction derivative(const GridFunction& f, int k);

/// Single first-derivative pass usable beyond the public k limit (norms need
/// orders above 4; they iterate this).
std::vector<double> d1_line(const std::vector<double>& f, double h);

/// S_theta: Fourier multiplier by chi(|xi|/theta). Line grids apply the
/// multiplier after even reflection onto the doubled domain.
GridFunction smooth(const GridFunction& f, double theta, const CutoffProfile& chi);

/// f(. + a), zero-extended outside the domain (line grids only); quintic
/// Lagrange interpolation at off-grid points.
GridFunction translate(const GridFunction& f, double a);

/// Frequencies of the r2c transform on a periodic grid: xi_m = m / P.
std::vector<double> r2c_frequencies(const Grid& g);

/// Even reflection of a line-grid component onto 2(n-1) points.
std::vector<double> even_extend(const std::vector<double>& f);

}  // namespace nmiter::fnspace
