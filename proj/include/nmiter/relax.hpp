#pragma once

#include "nmiter/calculus.hpp"
#include "nmiter/engine.hpp"
#include "nmiter/grid.hpp"
#include "nmiter/norms.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>

namespace nmiter::relax {

using fnspace::CutoffProfile;
using fnspace::Grid;
using fnspace::GridFunction;
using scheduler::NmParams;

using Scalar2 = std::function<double(double, double)>;

/// Relaxation system data for one macroscopic and one microscopic variable:
/// flux f(u,v), symmetric blocks with (A11 A12) = (df), block-diagonal source
/// (0, q) relaxing v to the equilibrium v = 0.
struct RelaxModel {
    std::string preset;
    Scalar2 f, fu, fv, fuu, fuv, fvv;
    Scalar2 fuuu, fuuv, fuvv, fvvv;
    Scalar2 A22, A22u, A22v, A22uu, A22uv, A22vv;
    Scalar2 q, qu, qv, quu, quv, qvv;
    double theta_diss = 1.0;  // Re qv(u,0) <= -theta_diss
    double u_base = 0.0;      // base state with dfstar(u_base) = 0

    double fstar(double u) const { return f(u, 0.0); }
    double dfstar(double u) const { return fu(u, 0.0); }
    double d2fstar(double u) const { return fuu(u, 0.0); }
    double A12_eq(double u) const { return fv(u, 0.0); }
    double bstar(double u) const { return -fv(u, 0.0) * fv(u, 0.0) / qv(u, 0.0); }
    double cstar(double u) const { return fv(u, 0.0) / qv(u, 0.0); }
};

/// Presets: "exact-jinxin" (A22 = 0; the first-order expansion solves the
/// system exactly, giving a closed-form oracle) and "generic" (A22 = 1/2 and
/// a quadratic velocity coupling in the flux, so both residual rows carry the
/// full expansion structure).
RelaxModel make_model(const std::string& preset);

struct ShockData {
    double u0 = 0.0;
    double eps_amp = 0.0;
    double u_minus = 0.0;
    double u_plus = 0.0;
    bool lax_ok = false;
    double flux_value = 0.0;  // common value fstar(u_minus) = fstar(u_plus)
};

/// Zero-speed equilibrium endpoints at amplitude eps on the shock curve
/// through (u0, u0).
ShockData shock_endpoints(const RelaxModel& model, double eps_amp);

/// First-order expansion profile: ubar solves bstar(u) u' = fstar(u) - flux,
/// centered at the midpoint; vbar = cstar(ubar) ubar' with the stencil
/// derivative of the sampled profile.
struct CeProfile {
    Grid grid;
    ShockData shock;
    double eps_amp = 0.0;
    double delta = 0.0;
    Eigen::ArrayXd u, v;    // profile components on the grid
    Eigen::ArrayXd du, dv;  // stencil derivatives of u, v

    GridFunction base() const;  // (u, v) as a 2-component function
};

CeProfile ce_profile(const RelaxModel& model, const ShockData& shock, const Grid& grid,
                     double delta);

/// Residuals of the two integrated profile equations at the expansion pair.
/// Component 0 is the algebraic row, component 1 the first-order row.
GridFunction ce_residual(const RelaxModel& model, const CeProfile& prof);

/// The nonlinear map evaluated at the perturbation U (2 components).
GridFunction residual_phi(const RelaxModel& model, const CeProfile& prof, const GridFunction& U);

/// Frozen-coefficient linearization at Utilde.
struct LinearizedOp {
    const RelaxModel* model = nullptr;
    const CeProfile* prof = nullptr;
    Eigen::ArrayXd a11, a12, a21, a22;  // flux blocks at the base + Utilde state
    Eigen::ArrayXd qu, qv;
    Eigen::ArrayXd bu, bv;      // coefficient-derivative term against the state gradient
    Eigen::ArrayXd dW1, dW2;    // derivatives of the total state
    GridFunction apply(const GridFunction& U) const;
};

LinearizedOp linearize(const RelaxModel& model, const CeProfile& prof, const GridFunction& Ut);

/// Exact bilinear second derivative of the map at Ut.
GridFunction second_derivative(const RelaxModel& model, const CeProfile& prof,
                               const GridFunction& Ut, const GridFunction& V,
                               const GridFunction& W);

struct LinearSolveStats {
    int iterations = 0;
    double rel_residual = 0.0;
    double cond_estimate = 0.0;
};

/// Right inverse of the linearization: the algebraic row is eliminated
/// pointwise for v, and the remaining first-order equation in u is solved as
/// an exactly assembled banded system with the translation mode pinned by
/// u(0) = 0; decay at the truncation boundary is inherited from the data.
GridFunction solve_linearized(const RelaxModel& model, const CeProfile& prof,
                              const GridFunction& Ut, const GridFunction& F, double delta,
                              LinearSolveStats* stats = nullptr);

struct DecayFit {
    double rate_pos = 0.0, amp_pos = 0.0;
    double rate_neg = 0.0, amp_neg = 0.0;
    double rate() const { return 0.5 * (rate_pos + rate_neg); }
};

/// Least-squares exponential decay rate of |U| on the outer half-domain,
/// fitted separately on each side.
DecayFit decay_fit(const GridFunction& U, double eps, double delta);

/// Problem-contract adapter running the full instance.
class RelaxInstance {
  public:
    using EElem = GridFunction;
    using FElem = GridFunction;

    RelaxInstance(RelaxModel model, CeProfile prof, NmParams params);

    EElem zero() const { return GridFunction(prof_.grid, 2); }
    FElem residual(const EElem& U) { return residual_phi(model_, prof_, U); }
    FElem apply_derivative(const EElem& U, const EElem& V) {
        return linearize(model_, prof_, U).apply(V);
    }
    EElem right_inverse(const EElem& U, const FElem& F) {
        return solve_linearized(model_, prof_, U, F, prof_.delta, &last_stats_);
    }
    FElem second_derivative(const EElem& U, const EElem& V, const EElem& W) {
        return relax::second_derivative(model_, prof_, U, V, W);
    }
    EElem smooth(const EElem& U, double theta) const {
        return fnspace::smooth(U, theta, chi_);
    }
    double e_norm(const EElem& U, double s) const;
    double f_norm(const FElem& F, double s) const;
    double dot(const EElem& a, const EElem& b) const { return a.dot(b); }
    /// Translation acts on the full state and re-references the fixed
    /// expansion base, so shifting a perturbation moves the underlying wave.
    EElem translate(const EElem& U, double a) const {
        return fnspace::translate(prof_.base() + U, a) - prof_.base();
    }
    const NmParams& params() const { return params_; }

    const RelaxModel& model() const { return model_; }
    const CeProfile& profile() const { return prof_; }
    const LinearSolveStats& last_stats() const { return last_stats_; }
    /// Residual level where the unenforced phase-slot equation, amplified by
    /// the weighted high-order measurement, dominates; calibrated with margin.
    double default_floor() const { return 5e-6 * prof_.eps_amp * prof_.eps_amp; }

  private:
    RelaxModel model_;
    CeProfile prof_;
    NmParams params_;
    CutoffProfile chi_;
    LinearSolveStats last_stats_;
};

/// Reference parameters for the profile problem at amplitude eps, completed
/// with a feasible schedule tuple.
NmParams default_params(double eps);

/// Decay-resolving default grid for amplitude eps.
Grid default_grid(double eps, int n = 4097);

struct ProfileSolution {
    GridFunction ubar;     // full profile: expansion + corrector
    GridFunction corrector;
    engine::SolveResult<GridFunction> result;
    std::shared_ptr<RelaxInstance> instance;
};

ProfileSolution solve_profile(const RelaxModel& model, double eps_amp, const NmParams& nm,
                              const engine::EngineOptions& opts, int grid_n = 4097);

}  // namespace nmiter::relax
