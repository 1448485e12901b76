#include "nmiter/norms.hpp"

#include "nmiter/calculus.hpp"
#include "nmiter/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace nmiter::fnspace {

namespace {

void validate(const GridFunction& f, const NormSpec& spec) {
    if (spec.s < 0) throw std::invalid_argument("norm: order must be nonnegative");
    if (spec.eps <= 0 || spec.eps > 1) throw std::invalid_argument("norm: eps must be in (0,1]");
    if (spec.delta < 0) throw std::invalid_argument("norm: delta must be nonnegative");
    if (spec.s > f.grid().n / 4.0)
        throw std::invalid_argument("norm: order exceeds the resolution guard n/4");
    if (spec.flavor == NormFlavor::fourier && f.grid().kind != GridKind::periodic)
        throw std::invalid_argument("norm: fourier flavor needs a periodic grid");
    if (spec.flavor == NormFlavor::derivative_sum &&
        spec.s != std::floor(spec.s))
        throw std::invalid_argument("norm: derivative-sum flavor needs an integer order");
}

double fourier_norm_sq(const GridFunction& f, double s, double eps) {
    const Grid& g = f.grid();
    const int n = g.n;
    const double period = g.period();
    auto xi = r2c_frequencies(g);
    double acc = 0.0;
    for (int comp = 0; comp < f.comps(); ++comp) {
        auto c = fft::r2c(f.component(comp));
        for (int m = 0; m <= n / 2; ++m) {
            const double mult = (m == 0 || m == n / 2) ? 1.0 : 2.0;
            const double w = std::pow(1.0 + eps * eps * xi[m] * xi[m], s);
            const double a = std::abs(c[m]) / n;
            acc += mult * w * a * a;
        }
    }
    return period * acc;
}

double weighted_l2(const GridFunction& f, double eps, double delta) {
    const Grid& g = f.grid();
    double acc = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        const double w = std::exp(delta * eps * std::sqrt(x * x + 1.0));
        double c = 0.0;
        for (int k = 0; k < f.comps(); ++k) c += f(k, i) * f(k, i);
        acc += g.qweight(i) * w * w * c;
    }
    return std::sqrt(acc);
}

}  // namespace

double norm(const GridFunction& f, const NormSpec& spec) {
    validate(f, spec);
    if (spec.flavor == NormFlavor::fourier)
        return std::sqrt(fourier_norm_sq(f, spec.s, spec.eps));

    const int s = static_cast<int>(spec.s);
    const Grid& g = f.grid();
    double total = 0.0;
    GridFunction dk = f;
    for (int k = 0; k <= s; ++k) {
        if (k > 0) {
            if (g.kind == GridKind::periodic) {
                dk = derivative(dk, 1);
            } else {
                for (int comp = 0; comp < dk.comps(); ++comp)
                    dk.set_component(comp, d1_line(dk.component(comp), g.h));
            }
        }
        total += std::sqrt(spec.eps) * std::pow(spec.eps, -k) * weighted_l2(dk, spec.eps, spec.delta);
    }
    return total;
}

double interpolation_defect(const GridFunction& f, const NormSpec& base, double sigma,
                            double sigma_prime) {
    if (!(0 < sigma && sigma < sigma_prime))
        throw std::invalid_argument("interpolation_defect: need 0 < sigma < sigma'");
    NormSpec mid = base, lowest = base, top = base;
    mid.s = base.s + sigma;
    top.s = base.s + sigma_prime;
    const double nl = norm(f, lowest);
    const double nm = norm(f, mid);
    const double nt = norm(f, top);
    if (nl == 0.0 || nt == 0.0)
        throw std::invalid_argument("interpolation_defect: zero input");
    const double a = (sigma_prime - sigma) / sigma_prime;
    const double b = sigma / sigma_prime;
    return nm / (std::pow(nl, a) * std::pow(nt, b));
}

}  // namespace nmiter::fnspace
