#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace nmiter::fnspace {

enum class GridKind { periodic, line };

/// Uniform 1D grid. Periodic grids cover [-pi*P, pi*P) with n points (n a
/// power of two); line grids cover [-L, L] inclusive with n points.
struct Grid {
    GridKind kind = GridKind::periodic;
    int n = 0;
    double domain = 0.0;  // P for periodic (period 2*pi*P), L for line
    double h = 0.0;

    static Grid periodic(int n, double P = 1.0);
    static Grid line(int n, double L);

    double x(int i) const {
        return kind == GridKind::periodic ? -pi() * domain + i * h : -domain + i * h;
    }
    std::vector<double> nodes() const;
    double period() const { return 2.0 * pi() * domain; }
    /// Quadrature weight of node i (rectangle rule on periodic, trapezoid on line).
    double qweight(int i) const {
        if (kind == GridKind::periodic) return h;
        return (i == 0 || i == n - 1) ? 0.5 * h : h;
    }
    bool operator==(const Grid& o) const {
        return kind == o.kind && n == o.n && domain == o.domain;
    }
    static constexpr double pi() { return 3.141592653589793238462643383279502884; }
};

/// Sampled function on a grid with c >= 1 real components.
/// Component k lives in row k of the value array.
class GridFunction {
  public:
    GridFunction() = default;
    GridFunction(const Grid& g, int comps)
        : grid_(g), v_(Eigen::ArrayXXd::Zero(comps, g.n)) {}
    GridFunction(const Grid& g, Eigen::ArrayXXd values)
        : grid_(g), v_(std::move(values)) {
        if (v_.cols() != grid_.n) throw std::invalid_argument("GridFunction: size mismatch");
    }

    static GridFunction sample(const Grid& g, const std::function<double(double)>& f);
    static GridFunction sample2(const Grid& g, const std::function<double(double)>& f0,
                                const std::function<double(double)>& f1);

    const Grid& grid() const { return grid_; }
    int comps() const { return static_cast<int>(v_.rows()); }
    int n() const { return grid_.n; }
    const Eigen::ArrayXXd& values() const { return v_; }
    Eigen::ArrayXXd& values() { return v_; }
    double operator()(int comp, int i) const { return v_(comp, i); }
    double& operator()(int comp, int i) { return v_(comp, i); }

    /// Row `comp` as a plain vector.
    std::vector<double> component(int comp) const;
    void set_component(int comp, const std::vector<double>& vals);

    bool all_finite() const { return v_.isFinite().all(); }
    double linf() const { return v_.abs().maxCoeff(); }
    /// Pointwise euclidean magnitude over components.
    Eigen::ArrayXd magnitude() const { return v_.square().colwise().sum().sqrt(); }

    GridFunction& operator+=(const GridFunction& o) { v_ += o.v_; return *this; }
    GridFunction& operator-=(const GridFunction& o) { v_ -= o.v_; return *this; }
    GridFunction& operator*=(double a) { v_ *= a; return *this; }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { a += b; return a; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { a -= b; return a; }
    friend GridFunction operator*(double a, GridFunction f) { f *= a; return f; }

    /// Discrete L2 inner product (quadrature-weighted, summed over components).
    double dot(const GridFunction& o) const;
    double l2() const { return std::sqrt(dot(*this)); }

  private:
    Grid grid_;
    Eigen::ArrayXXd v_;
};

}  // namespace nmiter::fnspace
