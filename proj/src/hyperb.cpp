#include "nmiter/hyperb.hpp"

#include "nmiter/fft.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace nmiter::hyperb {

namespace {

// 2/3-rule dealiasing of a periodic slice.
Eigen::VectorXd dealias(const Grid& g, const Eigen::VectorXd& v) {
    std::vector<double> buf(v.data(), v.data() + v.size());
    auto c = fft::r2c(buf);
    const int cut = g.n / 3;
    for (int m = cut + 1; m <= g.n / 2; ++m) c[m] = 0.0;
    auto out = fft::c2r(c, g.n);
    return Eigen::Map<Eigen::VectorXd>(out.data(), g.n);
}

Eigen::VectorXd ddx(const Grid& g, const Eigen::VectorXd& v) {
    std::vector<double> buf(v.data(), v.data() + v.size());
    auto c = fft::r2c(buf);
    for (int m = 0; m <= g.n / 2; ++m) {
        const double xi = m / g.domain;
        c[m] *= std::complex<double>(0.0, xi);
        if (m == g.n / 2) c[m] = 0.0;
    }
    auto out = fft::c2r(c, g.n);
    return Eigen::Map<Eigen::VectorXd>(out.data(), g.n);
}

Eigen::VectorXd rhs_interior(const HypProblem& p, double t, const Eigen::VectorXd& w) {
    const Grid& g = p.xgrid;
    Eigen::VectorXd f(g.n);
    for (int j = 0; j < g.n; ++j) f[j] = p.source(t, g.x(j));
    if (p.form == HypProblem::Form::nonconservative) {
        Eigen::VectorXd wx = ddx(g, w);
        Eigen::VectorXd nl(g.n);
        for (int j = 0; j < g.n; ++j) nl[j] = p.A(w[j]) * wx[j];
        return (f / p.eps) - dealias(g, nl);
    }
    Eigen::VectorXd flux(g.n);
    for (int j = 0; j < g.n; ++j) flux[j] = p.A(w[j]) * w[j];
    return (f / p.eps) - ddx(g, dealias(g, flux));
}

Eigen::VectorXd rhs_tangent(const HypProblem& p, const Eigen::VectorXd& w,
                            const Eigen::VectorXd& U) {
    const Grid& g = p.xgrid;
    if (p.form == HypProblem::Form::nonconservative) {
        Eigen::VectorXd wx = ddx(g, w);
        Eigen::VectorXd Ux = ddx(g, U);
        Eigen::VectorXd nl(g.n);
        for (int j = 0; j < g.n; ++j) nl[j] = p.dA(w[j]) * U[j] * wx[j] + p.A(w[j]) * Ux[j];
        return -dealias(g, nl);
    }
    Eigen::VectorXd coef(g.n);
    for (int j = 0; j < g.n; ++j) coef[j] = (p.dA(w[j]) * w[j] + p.A(w[j])) * U[j];
    return -ddx(g, dealias(g, coef));
}

}  // namespace

double HypProblem::source(double t, double x) const {
    const double ue = u_exact(t, x);
    const double ut = du_exact_dt(t, x);
    const double ux = du_exact_dx(t, x);
    if (form == Form::nonconservative) return eps * (ut + A(ue) * ux);
    return eps * (ut + (dA(ue) * ue + A(ue)) * ux);
}

HypProblem manufacture(TimeSpaceFn u_exact, TimeSpaceFn du_dt, TimeSpaceFn du_dx,
                       TimeSpaceFn w_pert, int k_order, double eps, HypProblem::Form form,
                       int nx, int nt) {
    HypProblem p;
    p.form = form;
    p.xgrid = Grid::periodic(nx, 1.0);
    p.nt = nt;
    p.eps = eps;
    p.k_order = k_order;
    p.u_exact = std::move(u_exact);
    p.du_exact_dt = std::move(du_dt);
    p.du_exact_dx = std::move(du_dx);
    p.w_pert = std::move(w_pert);

    const double epsk = std::pow(eps, k_order);
    p.u_approx = SpaceTimeFn(p.xgrid, nt);
    for (int i = 0; i <= nt; ++i)
        for (int j = 0; j < nx; ++j) {
            const double t = p.u_approx.t(i), x = p.xgrid.x(j);
            p.u_approx.v(i, j) = p.u_exact(t, x) + epsk * p.w_pert(t, x);
        }
    p.u0 = p.u_approx.v.row(0).transpose();

    // CFL guard for the explicit integrator.
    double amax = 0.0;
    for (int j = 0; j < nx; ++j) amax = std::max(amax, std::abs(p.A(p.u0[j])));
    const double dt = 1.0 / nt;
    if (dt > 0.5 * p.xgrid.h / std::max(amax, 1e-3))
        throw std::invalid_argument("manufacture: time step violates the CFL bound");
    return p;
}

void roughen_initial_data(HypProblem& prob, double amplitude, std::uint64_t seed,
                          double decay) {
    const Grid& g = prob.xgrid;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::complex<double>> c(g.n / 2 + 1, 0.0);
    for (int m = 1; m <= g.n / 3; ++m)
        c[m] = amplitude * std::complex<double>(gauss(rng), gauss(rng)) /
               std::pow(static_cast<double>(m), decay);
    // coefficients are relative to unit modes; scale to FFTW convention
    for (auto& cm : c) cm *= 0.5 * g.n;
    auto noise = fft::c2r(c, g.n);
    for (int j = 0; j < g.n; ++j) prob.u0[j] += noise[j];
}

Eigen::VectorXd rk4_step(const HypProblem& p, double t, const Eigen::VectorXd& w) {
    const double dt = 1.0 / p.nt;
    Eigen::VectorXd k1 = rhs_interior(p, t, w);
    Eigen::VectorXd k2 = rhs_interior(p, t + 0.5 * dt, w + 0.5 * dt * k1);
    Eigen::VectorXd k3 = rhs_interior(p, t + 0.5 * dt, w + 0.5 * dt * k2);
    Eigen::VectorXd k4 = rhs_interior(p, t + dt, w + dt * k3);
    return w + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

Eigen::VectorXd rk4_step_tangent(const HypProblem& p, double t, const Eigen::VectorXd& w,
                                 const Eigen::VectorXd& U) {
    const double dt = 1.0 / p.nt;
    Eigen::VectorXd k1 = rhs_interior(p, t, w);
    Eigen::VectorXd k2 = rhs_interior(p, t + 0.5 * dt, w + 0.5 * dt * k1);
    Eigen::VectorXd k3 = rhs_interior(p, t + 0.5 * dt, w + 0.5 * dt * k2);
    Eigen::VectorXd l1 = rhs_tangent(p, w, U);
    Eigen::VectorXd l2 = rhs_tangent(p, w + 0.5 * dt * k1, U + 0.5 * dt * l1);
    Eigen::VectorXd l3 = rhs_tangent(p, w + 0.5 * dt * k2, U + 0.5 * dt * l2);
    Eigen::VectorXd l4 = rhs_tangent(p, w + dt * k3, U + dt * l3);
    return U + dt / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4);
}

HypResidual residual(const HypProblem& prob, const SpaceTimeFn& u) {
    HypResidual F;
    F.interior = SpaceTimeFn(prob.xgrid, prob.nt);
    const double dt = F.interior.dt;
    for (int i = 0; i < prob.nt; ++i) {
        const Eigen::VectorXd w = prob.u_approx.v.row(i).transpose() + u.v.row(i).transpose();
        const Eigen::VectorXd wnext =
            prob.u_approx.v.row(i + 1).transpose() + u.v.row(i + 1).transpose();
        F.interior.v.row(i) =
            (prob.eps / dt) * (wnext - rk4_step(prob, u.t(i), w)).transpose();
    }
    F.trace = prob.u_approx.v.row(0).transpose() + u.v.row(0).transpose() - prob.u0;
    return F;
}

SpaceTimeFn solve_linearized_ivp(const HypProblem& prob, const SpaceTimeFn& ut,
                                 const HypResidual& F) {
    SpaceTimeFn U(prob.xgrid, prob.nt);
    const double dt = U.dt;
    U.v.row(0) = F.trace.transpose();
    for (int i = 0; i < prob.nt; ++i) {
        const Eigen::VectorXd w = prob.u_approx.v.row(i).transpose() + ut.v.row(i).transpose();
        const Eigen::VectorXd Ui = U.v.row(i).transpose();
        const Eigen::VectorXd gi = F.interior.v.row(i).transpose();
        U.v.row(i + 1) =
            (rk4_step_tangent(prob, U.t(i), w, Ui) + (dt / prob.eps) * gi).transpose();
        if (!U.v.row(i + 1).allFinite())
            throw engine::SingularSolveError("solve_linearized_ivp: blow-up during integration");
    }
    return U;
}

HypInstance::HypInstance(HypProblem prob, NmParams params)
    : prob_(std::move(prob)), params_(params) {
    chi_.shape = fnspace::CutoffShape::smooth_bump;
}

HypInstance::FElem HypInstance::apply_derivative(const EElem& u, const EElem& V) {
    HypResidual F;
    F.interior = SpaceTimeFn(prob_.xgrid, prob_.nt);
    const double dt = F.interior.dt;
    for (int i = 0; i < prob_.nt; ++i) {
        const Eigen::VectorXd w = prob_.u_approx.v.row(i).transpose() + u.v.row(i).transpose();
        const Eigen::VectorXd Vi = V.v.row(i).transpose();
        const Eigen::VectorXd Vnext = V.v.row(i + 1).transpose();
        F.interior.v.row(i) =
            (prob_.eps / dt) *
            (Vnext - rk4_step_tangent(prob_, u.t(i), w, Vi)).transpose();
    }
    F.trace = V.v.row(0).transpose();
    return F;
}

HypInstance::FElem HypInstance::second_derivative(const EElem& u, const EElem& V,
                                                  const EElem& W) {
    // Central difference of the tangent map; adequate for symmetry and Taylor
    // diagnostics.
    const double scale = std::max(1.0, W.v.cwiseAbs().maxCoeff());
    const double h = 1e-5 / scale;
    auto up = u; up.v += h * W.v;
    auto um = u; um.v -= h * W.v;
    FElem a = apply_derivative(up, V);
    FElem b = apply_derivative(um, V);
    FElem out;
    out.interior = SpaceTimeFn(prob_.xgrid, prob_.nt);
    out.interior.v = (a.interior.v - b.interior.v) / (2.0 * h);
    out.trace = Eigen::VectorXd::Zero(prob_.xgrid.n);
    return out;
}

HypInstance::EElem HypInstance::smooth(const EElem& u, double theta) const {
    EElem out = u;
    for (int i = 0; i <= prob_.nt; ++i) {
        std::vector<double> slice(prob_.xgrid.n);
        for (int j = 0; j < prob_.xgrid.n; ++j) slice[j] = u.v(i, j);
        auto c = fft::r2c(slice);
        for (int m = 0; m <= prob_.xgrid.n / 2; ++m) {
            const double xi = m / prob_.xgrid.domain;
            c[m] *= chi_(xi / theta);
        }
        auto sm = fft::c2r(c, prob_.xgrid.n);
        for (int j = 0; j < prob_.xgrid.n; ++j) out.v(i, j) = sm[j];
    }
    return out;
}

namespace {
double slice_fourier_norm(const Grid& g, const Eigen::VectorXd& slice, double s, double eps) {
    fnspace::GridFunction f(g, 1);
    for (int j = 0; j < g.n; ++j) f(0, j) = slice[j];
    return fnspace::norm(f, fnspace::NormSpec::fourier(s, eps));
}
}  // namespace

double HypInstance::e_norm(const EElem& u, double s) const {
    const double cap = std::min(s, params_.sbar);
    double m = 0.0;
    for (int i = 0; i <= prob_.nt; ++i)
        m = std::max(m, slice_fourier_norm(prob_.xgrid, u.v.row(i).transpose(), cap, prob_.eps));
    return m;
}

double HypInstance::f_norm(const FElem& F, double s) const {
    const double cap = std::min(s, params_.sbar);
    double m = 0.0;
    for (int i = 0; i < prob_.nt; ++i)
        m = std::max(m, slice_fourier_norm(prob_.xgrid, F.interior.v.row(i).transpose(), cap,
                                           prob_.eps));
    return m + slice_fourier_norm(prob_.xgrid, F.trace, cap, prob_.eps);
}

NmParams default_params(double eps, int k_order) {
    NmParams p;
    p.k = k_order;
    p.kappa = 1.0; p.gamma0 = 0.0; p.gamma = 1.0;
    p.m = 1.0; p.r = 1.0; p.rprime = 0.0;
    p.s0 = 1.0; p.sbar = 12.0; p.s = 3.0;
    p.alpha = 0.70; p.N = 8.0; p.p = 700.0; p.zeta = 1.3;
    p.eps = eps;
    return p;
}

HypProblem rough_problem(double eps, double amplitude, std::uint64_t seed, double decay) {
    auto prob = default_problem(eps, 4, HypProblem::Form::conservative, 128, 150);
    roughen_initial_data(prob, amplitude, seed, decay);
    return prob;
}

NmParams rough_params(double eps) {
    NmParams p = default_params(eps, 4);
    p.theta0 = 2.0;
    p.zeta = 1.15;
    return p;
}

HypProblem default_problem(double eps, int k_order, HypProblem::Form form, int nx, int nt) {
    auto ue = [](double t, double x) { return 0.1 * std::sin(x - 0.7 * t); };
    auto ut = [](double t, double x) { return -0.07 * std::cos(x - 0.7 * t); };
    auto ux = [](double t, double x) { return 0.1 * std::cos(x - 0.7 * t); };
    auto w = [](double, double x) { return std::cos(x); };
    return manufacture(ue, ut, ux, w, k_order, eps, form, nx, nt);
}

}  // namespace nmiter::hyperb
