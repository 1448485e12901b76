#include "nmiter/io.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nmiter::io {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_profile_csv(std::ostream& os, const fnspace::GridFunction& f,
                       const std::vector<std::string>& names) {
    os << "x";
    for (const auto& n : names) os << "," << n;
    os << "\n";
    for (int i = 0; i < f.n(); ++i) {
        os << fmt(f.grid().x(i));
        for (int c = 0; c < f.comps(); ++c) os << "," << fmt(f(c, i));
        os << "\n";
    }
}

void write_spacetime_csv(std::ostream& os, const hyperb::SpaceTimeFn& u) {
    os << "t,x,u\n";
    for (int i = 0; i <= u.nt; ++i)
        for (int j = 0; j < u.xgrid.n; ++j)
            os << fmt(u.t(i)) << "," << fmt(u.xgrid.x(j)) << "," << fmt(u.v(i, j)) << "\n";
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two points");
    double mx = 0, my = 0;
    const int n = static_cast<int>(x.size());
    std::vector<double> lx(n), ly(n);
    for (int i = 0; i < n; ++i) {
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    return sxy / sxx;
}

}  // namespace nmiter::io
