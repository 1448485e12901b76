#include "nmiter/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace nmiter::fft {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex plan_mutex;

fftw_plan r2c_plan(int n) {
    static std::unordered_map<int, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> in(n);
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(n, in.data(),
                                       reinterpret_cast<fftw_complex*>(out.data()),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache[n] = p;
    return p;
}

fftw_plan c2r_plan(int n) {
    static std::unordered_map<int, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> in(n / 2 + 1);
    std::vector<double> out(n);
    fftw_plan p = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                       out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache[n] = p;
    return p;
}

}  // namespace

std::vector<std::complex<double>> r2c(const std::vector<double>& in) {
    const int n = static_cast<int>(in.size());
    if (n < 2) throw std::invalid_argument("fft: length must be >= 2");
    std::vector<std::complex<double>> out(n / 2 + 1);
    std::vector<double> buf(in);  // FFTW may clobber its input
    fftw_execute_dft_r2c(r2c_plan(n), buf.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

std::vector<double> c2r(const std::vector<std::complex<double>>& in, int n) {
    if (static_cast<int>(in.size()) != n / 2 + 1)
        throw std::invalid_argument("fft: coefficient count does not match output length");
    std::vector<std::complex<double>> buf(in);
    std::vector<double> out(n);
    fftw_execute_dft_c2r(c2r_plan(n), reinterpret_cast<fftw_complex*>(buf.data()),
                         out.data());
    const double scale = 1.0 / n;
    for (double& v : out) v *= scale;
    return out;
}

}  // namespace nmiter::fft
