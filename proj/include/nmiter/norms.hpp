#pragma once

#include "nmiter/grid.hpp"

namespace nmiter::fnspace {

enum class NormFlavor { fourier, derivative_sum };

/// Parameters of the weighted Sobolev norm H^s_{eps,delta}.
/// The fourier flavor computes || (1+|eps xi|^2)^{s/2} fhat ||_{L2} and is
/// restricted to periodic grids; the derivative-sum flavor computes
/// eps^{1/2} sum_{k<=s} eps^{-k} || e^{delta eps <x>} d^k f ||_{L2}.
struct NormSpec {
    double s = 0.0;
    double eps = 1.0;
    double delta = 0.0;
    NormFlavor flavor = NormFlavor::derivative_sum;

    static NormSpec fourier(double s, double eps = 1.0) {
        return NormSpec{s, eps, 0.0, NormFlavor::fourier};
    }
    static NormSpec dsum(double s, double eps = 1.0, double delta = 0.0) {
        return NormSpec{s, eps, delta, NormFlavor::derivative_sum};
    }
};

double norm(const GridFunction& f, const NormSpec& spec);

/// ||f||_{s+sigma} / (||f||_s^{(sigma'-sigma)/sigma'} ||f||_{s+sigma'}^{sigma/sigma'}).
/// Equals 1 for a single Fourier mode; <= 1 exactly for the fourier flavor.
double interpolation_defect(const GridFunction& f, const NormSpec& base, double sigma,
                            double sigma_prime);

}  // namespace nmiter::fnspace
