#pragma once

#include "nmiter/calculus.hpp"
#include "nmiter/norms.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nmiter::fnspace {

/// Max measured constants in the smoothing error bound ("approx") and the
/// regularity-gain bound ("gain") over random band-limited samples, dyadic
/// theta and order pairs s < s' <= 6.
struct SmoothingReport {
    double max_approx_const = 0.0;  // ||S_theta f - f||_s / (theta^{s-s'} ||f||_{s'})
    double max_gain_const = 0.0;    // ||S_theta f||_{s'} / (theta^{s'-s} ||f||_s)
    int trials = 0;
    std::vector<double> thetas;
    bool pass = false;  // both constants <= 4
    std::string detail;
};

SmoothingReport smoothing_selftest(const Grid& grid, const CutoffProfile& chi, int trials,
                                   double eps = 0.5, std::uint64_t seed = 0);

}  // namespace nmiter::fnspace
