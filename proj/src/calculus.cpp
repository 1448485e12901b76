#include "nmiter/calculus.hpp"

#include "nmiter/fft.hpp"

#include <algorithm>
#include <stdexcept>

namespace nmiter::fnspace {

std::vector<double> r2c_frequencies(const Grid& g) {
    std::vector<double> xi(g.n / 2 + 1);
    for (size_t m = 0; m < xi.size(); ++m) xi[m] = static_cast<double>(m) / g.domain;
    return xi;
}

std::vector<double> even_extend(const std::vector<double>& f) {
    const int n = static_cast<int>(f.size());
    std::vector<double> g(2 * (n - 1));
    for (int i = 0; i < n; ++i) g[i] = f[i];
    for (int j = 1; j < n - 1; ++j) g[n - 1 + j] = f[n - 1 - j];
    return g;
}

namespace {

std::vector<double> spectral_derivative_periodic(const std::vector<double>& f, int k,
                                                 double P) {
    const int n = static_cast<int>(f.size());
    auto c = fft::r2c(f);
    for (int m = 0; m <= n / 2; ++m) {
        const std::complex<double> ixi(0.0, m / P);
        std::complex<double> w = std::pow(ixi, k);
        // Nyquist carries no usable phase for odd derivatives.
        if (m == n / 2 && k % 2 == 1) w = 0.0;
        c[m] *= w;
    }
    return fft::c2r(c, n);
}

}  // namespace

std::vector<double> d1_line(const std::vector<double>& f, double h) {
    const int n = static_cast<int>(f.size());
    if (n < 5) throw std::invalid_argument("derivative: line grid too small");
    std::vector<double> d(n);
    const double c = 1.0 / (12.0 * h);
    d[0] = c * (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]);
    d[1] = c * (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]);
    for (int i = 2; i < n - 2; ++i)
        d[i] = c * (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]);
    d[n - 2] = c * (3 * f[n - 1] + 10 * f[n - 2] - 18 * f[n - 3] + 6 * f[n - 4] - f[n - 5]);
    d[n - 1] = c * (25 * f[n - 1] - 48 * f[n - 2] + 36 * f[n - 3] - 16 * f[n - 4] + 3 * f[n - 5]);
    return d;
}

GridFunction derivative(const GridFunction& f, int k) {
    if (k < 0) throw std::invalid_argument("derivative: negative order");
    if (k == 0) return f;
    const Grid& g = f.grid();
    if (g.kind == GridKind::line && k > 4)
        throw std::invalid_argument("derivative: line grids support k <= 4");
    GridFunction out(g, f.comps());
    for (int comp = 0; comp < f.comps(); ++comp) {
        std::vector<double> v = f.component(comp);
        if (g.kind == GridKind::periodic) {
            v = spectral_derivative_periodic(v, k, g.domain);
        } else {
            for (int j = 0; j < k; ++j) v = d1_line(v, g.h);
        }
        out.set_component(comp, v);
    }
    return out;
}

GridFunction smooth(const GridFunction& f, double theta, const CutoffProfile& chi) {
    if (theta <= 0) throw std::invalid_argument("smooth: theta must be positive");
    const Grid& g = f.grid();
    GridFunction out(g, f.comps());
    if (g.kind == GridKind::periodic) {
        auto xi = r2c_frequencies(g);
        for (int comp = 0; comp < f.comps(); ++comp) {
            auto c = fft::r2c(f.component(comp));
            for (size_t m = 0; m < c.size(); ++m) c[m] *= chi(xi[m] / theta);
            out.set_component(comp, fft::c2r(c, g.n));
        }
    } else {
        const int n = g.n;
        const int N = 2 * (n - 1);
        const double Pext = N * g.h / (2.0 * Grid::pi());
        for (int comp = 0; comp < f.comps(); ++comp) {
            auto ext = even_extend(f.component(comp));
            auto c = fft::r2c(ext);
            for (int m = 0; m <= N / 2; ++m) c[m] *= chi((m / Pext) / theta);
            ext = fft::c2r(c, N);
            std::vector<double> v(ext.begin(), ext.begin() + n);
            out.set_component(comp, v);
        }
    }
    return out;
}

GridFunction translate(const GridFunction& f, double a) {
    const Grid& g = f.grid();
    if (g.kind != GridKind::line)
        throw std::invalid_argument("translate: line grids only");
    const int n = g.n;
    const double shift = a / g.h;
    const int base = static_cast<int>(std::floor(shift));
    const double frac = shift - base;
    GridFunction out(g, f.comps());

    // 6-point Lagrange weights at offset frac in [0,1), stencil j-2..j+3.
    double w[6];
    {
        const double t = frac;
        double nodes[6] = {-2, -1, 0, 1, 2, 3};
        for (int a6 = 0; a6 < 6; ++a6) {
            double p = 1.0;
            for (int b = 0; b < 6; ++b)
                if (b != a6) p *= (t - nodes[b]) / (nodes[a6] - nodes[b]);
            w[a6] = p;
        }
    }
    for (int comp = 0; comp < f.comps(); ++comp) {
        for (int i = 0; i < n; ++i) {
            const int j = i + base;
            double s = 0.0;
            for (int a6 = 0; a6 < 6; ++a6) {
                const int idx = std::clamp(j + a6 - 2, 0, n - 1);  // edge-value extension
                s += w[a6] * f(comp, idx);
            }
            out(comp, i) = s;
        }
    }
    return out;
}

}  // namespace nmiter::fnspace
