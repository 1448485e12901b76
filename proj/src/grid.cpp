#include "nmiter/grid.hpp"

namespace nmiter::fnspace {

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}

Grid Grid::periodic(int n, double P) {
    if (n < 16) throw std::invalid_argument("Grid: n must be >= 16");
    if (!power_of_two(n)) throw std::invalid_argument("Grid: periodic n must be a power of two");
    if (P <= 0) throw std::invalid_argument("Grid: period scale must be positive");
    Grid g;
    g.kind = GridKind::periodic;
    g.n = n;
    g.domain = P;
    g.h = 2.0 * pi() * P / n;
    return g;
}

Grid Grid::line(int n, double L) {
    if (n < 16) throw std::invalid_argument("Grid: n must be >= 16");
    if (L <= 0) throw std::invalid_argument("Grid: half-length must be positive");
    Grid g;
    g.kind = GridKind::line;
    g.n = n;
    g.domain = L;
    g.h = 2.0 * L / (n - 1);
    return g;
}

std::vector<double> Grid::nodes() const {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = x(i);
    return xs;
}

GridFunction GridFunction::sample(const Grid& g, const std::function<double(double)>& f) {
    GridFunction out(g, 1);
    for (int i = 0; i < g.n; ++i) out(0, i) = f(g.x(i));
    return out;
}

GridFunction GridFunction::sample2(const Grid& g, const std::function<double(double)>& f0,
                                   const std::function<double(double)>& f1) {
    GridFunction out(g, 2);
    for (int i = 0; i < g.n; ++i) {
        out(0, i) = f0(g.x(i));
        out(1, i) = f1(g.x(i));
    }
    return out;
}

std::vector<double> GridFunction::component(int comp) const {
    std::vector<double> out(grid_.n);
    for (int i = 0; i < grid_.n; ++i) out[i] = v_(comp, i);
    return out;
}

void GridFunction::set_component(int comp, const std::vector<double>& vals) {
    if (static_cast<int>(vals.size()) != grid_.n)
        throw std::invalid_argument("GridFunction: component size mismatch");
    for (int i = 0; i < grid_.n; ++i) v_(comp, i) = vals[i];
}

double GridFunction::dot(const GridFunction& o) const {
    if (!(grid_ == o.grid_) || comps() != o.comps())
        throw std::invalid_argument("GridFunction: dot on mismatched functions");
    double s = 0.0;
    for (int i = 0; i < grid_.n; ++i) {
        double c = 0.0;
        for (int k = 0; k < comps(); ++k) c += v_(k, i) * o.v_(k, i);
        s += grid_.qweight(i) * c;
    }
    return s;
}

}  // namespace nmiter::fnspace
