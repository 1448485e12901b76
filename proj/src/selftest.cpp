#include "nmiter/selftest.hpp"

#include "nmiter/fft.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nmiter::fnspace {

namespace {

// Spectrum-side evaluation: every norm and the multiplier act diagonally on
// the r2c coefficients, so one transform per sample suffices.
struct Spectrum {
    std::vector<double> amp2;  // mult * |c_m/n|^2
    std::vector<double> xi;
    double period;

    double norm_sq(double s, double eps) const {
        double acc = 0.0;
        for (size_t m = 0; m < amp2.size(); ++m)
            acc += std::pow(1.0 + eps * eps * xi[m] * xi[m], s) * amp2[m];
        return period * acc;
    }
    double smoothed_sq(double s, double eps, double theta, const CutoffProfile& chi) const {
        double acc = 0.0;
        for (size_t m = 0; m < amp2.size(); ++m) {
            const double c = chi(xi[m] / theta);
            acc += c * c * std::pow(1.0 + eps * eps * xi[m] * xi[m], s) * amp2[m];
        }
        return period * acc;
    }
    double error_sq(double s, double eps, double theta, const CutoffProfile& chi) const {
        double acc = 0.0;
        for (size_t m = 0; m < amp2.size(); ++m) {
            const double c = 1.0 - chi(xi[m] / theta);
            acc += c * c * std::pow(1.0 + eps * eps * xi[m] * xi[m], s) * amp2[m];
        }
        return period * acc;
    }
};

}  // namespace

SmoothingReport smoothing_selftest(const Grid& grid, const CutoffProfile& chi, int trials,
                                   double eps, std::uint64_t seed) {
    if (trials < 10) throw std::invalid_argument("smoothing_selftest: trials must be >= 10");
    if (grid.kind != GridKind::periodic)
        throw std::invalid_argument("smoothing_selftest: periodic grid required");

    SmoothingReport rep;
    rep.trials = trials;
    for (double t = 4.0; t <= 256.0 && 2.0 * t * grid.domain <= grid.n / 2; t *= 2.0)
        rep.thetas.push_back(t);

    const std::vector<std::pair<double, double>> pairs = {
        {0, 1}, {0, 2}, {1, 3}, {2, 5}, {0, 6}, {3, 6}};

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto xi = r2c_frequencies(grid);
    const int n = grid.n;

    for (int trial = 0; trial < trials; ++trial) {
        std::uniform_int_distribution<int> band_dist(4, n / 3);
        const int band = band_dist(rng);
        Spectrum sp;
        sp.xi = xi;
        sp.period = grid.period();
        sp.amp2.assign(xi.size(), 0.0);
        for (int m = 1; m <= n / 2; ++m) {
            if (xi[m] * grid.domain <= band) {
                const double re = gauss(rng), im = gauss(rng);
                sp.amp2[m] = 2.0 * (re * re + im * im);
            }
        }
        for (double theta : rep.thetas) {
            for (auto [s, sp2] : pairs) {
                const double ns = std::sqrt(sp.norm_sq(s, eps));
                const double nsp = std::sqrt(sp.norm_sq(sp2, eps));
                if (ns == 0 || nsp == 0) continue;
                const double err = std::sqrt(sp.error_sq(s, eps, theta, chi));
                const double gain = std::sqrt(sp.smoothed_sq(sp2, eps, theta, chi));
                rep.max_approx_const =
                    std::max(rep.max_approx_const, err / (std::pow(theta, s - sp2) * nsp));
                rep.max_gain_const =
                    std::max(rep.max_gain_const, gain / (std::pow(theta, sp2 - s) * ns));
            }
        }
    }
    rep.pass = rep.max_approx_const <= 4.0 && rep.max_gain_const <= 4.0;
    std::ostringstream os;
    os << "approx_const=" << rep.max_approx_const << " gain_const=" << rep.max_gain_const
       << " trials=" << rep.trials << " thetas=" << rep.thetas.size();
    rep.detail = os.str();
    return rep;
}

}  // namespace nmiter::fnspace
