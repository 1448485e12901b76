#pragma once

#include <complex>
#include <vector>

namespace nmiter::fft {

// Forward real-to-complex transform of a length-n sequence; returns the
// n/2+1 nonnegative-frequency coefficients, unnormalized (FFTW convention).
std::vector<std::complex<double>> r2c(const std::vector<double>& in);

// Inverse of r2c. n is the length of the real output; the result is
// normalized so that c2r(r2c(x), n) == x.
std::vector<double> c2r(const std::vector<std::complex<double>>& in, int n);

}  // namespace nmiter::fft
