#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nmiter::scheduler {

/// Full parameter tuple of one Nash-Moser run.
struct NmParams {
    double k = 3.0;       // approximate-solution accuracy exponent
    double kappa = 1.0;   // eps loss of the right inverse
    double gamma0 = 0.0;  // smallness exponent in the C^2 bounds
    double gamma = 1.0;   // smallness exponent in the right-inverse condition
    double m = 1.0;       // derivative loss of the map
    double r = 1.0;       // right-inverse tame index
    double rprime = 0.0;  // right-inverse tame index on the data side
    double s0 = 3.0;      // base regularity
    double sbar = 8.0;    // top regularity
    double s = 4.0;       // working index
    double alpha = 0.654;
    double N = 11.0;      // high-norm growth exponent (integer-valued)
    double p = 4000.0;    // high-norm offset
    double zeta = 1.2;    // schedule exponent
    double theta0 = 0.0;  // 0 means eps^{-k}
    double eps = 0.1;
    double margin = 1.0;  // multiplier applied to the step-condition inequalities

    double m_prime() const { return std::max(m + rprime, r); }
    double r_dprime() const { return std::max(r, rprime); }
    double q() const { return m + alpha; }
    double theta_start() const;
    void validate() const;
};

struct PbarResult {
    double pbar = 0.0;
    int n_star = 0;
    double pbar_real = 0.0;   // infimum over real N, for comparison
    double n_star_real = 0.0;
};

struct AlphaWindow {
    double lo = 0.0;  // exclusive
    double hi = 0.0;  // inclusive
    bool empty() const { return !(lo < hi); }
    bool contains(double a) const { return lo < a && a <= hi; }
};

struct ThetaSchedule {
    std::vector<double> thetas;
    bool cond10_ok = false;    // theta0^{-alpha} <= eps^{max(gamma,gamma0)}
    bool summable_ok = false;  // sum theta_j^{-alpha} <= 2 theta0^{-alpha}
    bool truncated = false;    // hit the overflow cap before jmax entries
    double sum_ratio = 0.0;    // sum theta_j^{-alpha} / theta0^{-alpha}
};

struct StepVerdicts {
    bool con2 = false;
    bool con3 = false;
    bool con4 = false;
    bool all() const { return con2 && con3 && con4; }
};

struct FeasibilityReport {
    bool ass_k_ok = false;
    AlphaWindow window;
    bool alpha_in_window = false;
    bool zeta_ok = false;  // 1 < zeta <= 2 alpha
    std::optional<PbarResult> pbar;
    // derived quantities at the params' (alpha, N, p)
    double m_prime = 0.0, r_dprime = 0.0, p0 = 0.0, M = 0.0, N0 = 0.0, beta = 0.0;
    bool feasible() const { return ass_k_ok && !window.empty() && alpha_in_window && zeta_ok; }
    std::string to_json() const;
};

/// max(2 kappa, kappa + gamma0, kappa + gamma) < k, strictly.
bool check_ass_k(const NmParams& p);

/// Minimal high-norm offset, scanned over integer N in (N0, n_max].
PbarResult pbar(const NmParams& p, int n_max = 10000);

/// Admissible alpha interval at the params' (N, p).
AlphaWindow alpha_window(const NmParams& p);

/// beta of the interpolation step, at the params' (alpha, N, p).
double beta_exponent(const NmParams& p);

/// theta0^{-alpha} <= eps^{max(gamma, gamma0)}.
bool start_condition(const NmParams& p);

ThetaSchedule theta_schedule(const NmParams& p, int jmax);

/// The three per-step inequalities at consecutive schedule values.
StepVerdicts step_conditions(const NmParams& p, double theta_j, double theta_j1);

FeasibilityReport feasibility_report(const NmParams& p, int n_max = 10000);

}  // namespace nmiter::scheduler
