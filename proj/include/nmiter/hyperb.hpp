#pragma once

#include "nmiter/calculus.hpp"
#include "nmiter/engine.hpp"
#include "nmiter/grid.hpp"
#include "nmiter/norms.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace nmiter::hyperb {

using fnspace::CutoffProfile;
using fnspace::Grid;
using scheduler::NmParams;

using TimeSpaceFn = std::function<double(double, double)>;  // (t, x)

/// Values on an (n_t+1) x n_x space-time grid; row i is the slice at t_i.
struct SpaceTimeFn {
    Grid xgrid;
    int nt = 0;
    double dt = 0.0;
    Eigen::MatrixXd v;  // (nt+1) x n_x

    SpaceTimeFn() = default;
    SpaceTimeFn(const Grid& g, int nt_, double T = 1.0)
        : xgrid(g), nt(nt_), dt(T / nt_), v(Eigen::MatrixXd::Zero(nt_ + 1, g.n)) {}

    double t(int i) const { return i * dt; }
    bool all_finite() const { return v.allFinite(); }

    SpaceTimeFn& operator+=(const SpaceTimeFn& o) { v += o.v; return *this; }
    SpaceTimeFn& operator*=(double a) { v *= a; return *this; }
    friend SpaceTimeFn operator+(SpaceTimeFn a, const SpaceTimeFn& b) { a += b; return a; }
    friend SpaceTimeFn operator*(double a, SpaceTimeFn f) { f *= a; return f; }
};

/// Residual pair: interior defect over each time interval plus the
/// initial-trace mismatch.
struct HypResidual {
    SpaceTimeFn interior;        // rows 0..nt-1 used
    Eigen::VectorXd trace;       // slice at t = 0
};

/// Scaled quasilinear transport problem eps u_t + eps A(u) u_x = f (or the
/// conservative variant eps u_t + eps (A(u) u)_x = f) on the periodic line,
/// with a manufactured source and an approximate solution of order k.
struct HypProblem {
    enum class Form { nonconservative, conservative };
    Form form = Form::nonconservative;
    Grid xgrid;
    int nt = 100;
    double eps = 0.1;
    int k_order = 4;
    std::function<double(double)> A = [](double u) { return u; };
    std::function<double(double)> dA = [](double) { return 1.0; };
    TimeSpaceFn u_exact, du_exact_dt, du_exact_dx;
    TimeSpaceFn w_pert;  // perturbation shaping the approximate solution
    Eigen::VectorXd u0;  // initial data of the problem being solved
    SpaceTimeFn u_approx;

    double source(double t, double x) const;  // manufactured f
};

/// Builds the manufactured problem: f makes u_exact an exact solution and
/// u_a = u_exact + eps^k w, with the initial data taken from u_a so the
/// shifted residual is interior-only.
HypProblem manufacture(TimeSpaceFn u_exact, TimeSpaceFn du_dt, TimeSpaceFn du_dx,
                       TimeSpaceFn w_pert, int k_order, double eps,
                       HypProblem::Form form = HypProblem::Form::nonconservative,
                       int nx = 128, int nt = 100);

/// Adds band-limited rough content to the initial data (derivative-loss
/// experiments). Energy extends to the dealiasing boundary with coefficient
/// magnitudes ~ amplitude / m^decay.
void roughen_initial_data(HypProblem& prob, double amplitude, std::uint64_t seed,
                          double decay = 0.6);

/// One explicit 4th-order step of the quasilinear equation from slice w at
/// time t; pseudo-spectral in x with 2/3-rule dealiasing.
Eigen::VectorXd rk4_step(const HypProblem& prob, double t, const Eigen::VectorXd& w);

/// Exact tangent-linear of rk4_step at base slice w.
Eigen::VectorXd rk4_step_tangent(const HypProblem& prob, double t, const Eigen::VectorXd& w,
                                 const Eigen::VectorXd& U);

/// Residual of the shifted map at perturbation u: interior rows are the
/// one-step defects of u_a + u under the integrator, the trace row is
/// (u_a + u - u0)|_{t=0}.
HypResidual residual(const HypProblem& prob, const SpaceTimeFn& u);

/// Right inverse of the linearized residual: forward substitution with the
/// tangent-linear step. Defect is at rounding level by construction.
SpaceTimeFn solve_linearized_ivp(const HypProblem& prob, const SpaceTimeFn& ut,
                                 const HypResidual& F);

/// Problem-contract adapter.
class HypInstance {
  public:
    using EElem = SpaceTimeFn;
    using FElem = HypResidual;

    HypInstance(HypProblem prob, NmParams params);

    EElem zero() const { return SpaceTimeFn(prob_.xgrid, prob_.nt); }
    FElem residual(const EElem& u) { return hyperb::residual(prob_, u); }
    FElem apply_derivative(const EElem& u, const EElem& V);
    EElem right_inverse(const EElem& u, const FElem& F) {
        return solve_linearized_ivp(prob_, u, F);
    }
    FElem second_derivative(const EElem& u, const EElem& V, const EElem& W);
    EElem smooth(const EElem& u, double theta) const;
    double e_norm(const EElem& u, double s) const;
    double f_norm(const FElem& F, double s) const;
    const NmParams& params() const { return params_; }
    const HypProblem& problem() const { return prob_; }
    double default_floor() const { return 30.0 * std::pow(1.0 / prob_.nt, 4); }

  private:
    HypProblem prob_;
    NmParams params_;
    CutoffProfile chi_;
};

NmParams default_params(double eps, int k_order);

/// The standard smooth manufactured instance.
HypProblem default_problem(double eps, int k_order,
                           HypProblem::Form form = HypProblem::Form::nonconservative,
                           int nx = 128, int nt = 100);

/// The rough-data conservative variant driving the derivative-loss
/// comparison: initial data carries band-wide content, plain Newton ingests
/// the full corrector and pays quadratically, while the slow schedule below
/// corrects one band at a time.
HypProblem rough_problem(double eps = 0.5, double amplitude = 0.25,
                         std::uint64_t seed = 1, double decay = 3.2);

/// Hand-set slow schedule for the rough experiment (run with the
/// feasibility override; this is a designed demonstration).
NmParams rough_params(double eps = 0.5);

}  // namespace nmiter::hyperb
