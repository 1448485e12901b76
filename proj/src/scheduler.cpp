#include "nmiter/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nmiter::scheduler {

namespace {
constexpr double kThetaCap = 1e300;
constexpr double kTol = 1e-12;

// Inner objective of the pbar infimum at growth exponent N.
double pbar_objective(const NmParams& p, double N) {
    const double mp = p.m_prime();
    const double N0 = p.k * mp / (p.k - 2.0 * p.kappa);
    if (!(N > N0)) return std::numeric_limits<double>::infinity();
    const double M = std::max({p.gamma0 / p.k, p.gamma / p.k, 0.5 * (1.0 + mp / N)});
    const double den = p.k - p.kappa - p.k * M;
    if (den <= 0) return std::numeric_limits<double>::infinity();
    return p.k * (N + 1.0) * (M + p.m + p.r_dprime()) / den;
}
}  // namespace

double NmParams::theta_start() const {
    return theta0 > 0.0 ? theta0 : std::pow(eps, -k);
}

void NmParams::validate() const {
    if (k < 0 || kappa < 0 || gamma0 < 0 || gamma < 0 || m < 0 || r < 0 || rprime < 0)
        throw std::invalid_argument("NmParams: exponents must be nonnegative");
    if (!(zeta > 1.0)) throw std::invalid_argument("NmParams: zeta must exceed 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("NmParams: eps must be in (0,1)");
    if (!(theta_start() > 1.0)) throw std::invalid_argument("NmParams: theta0 must exceed 1");
    if (!(s0 <= s && s <= sbar)) throw std::invalid_argument("NmParams: need s0 <= s <= sbar");
}

bool check_ass_k(const NmParams& p) {
    return std::max({2.0 * p.kappa, p.kappa + p.gamma0, p.kappa + p.gamma}) < p.k;
}

PbarResult pbar(const NmParams& p, int n_max) {
    if (!check_ass_k(p))
        throw std::invalid_argument("pbar: accuracy condition on k fails; no finite offset");
    const double N0 = p.k * p.m_prime() / (p.k - 2.0 * p.kappa);

    double best = std::numeric_limits<double>::infinity();
    int best_n = 0;
    int rising = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (int N = std::max(1, static_cast<int>(std::floor(N0)) + 1); N <= n_max; ++N) {
        const double v = pbar_objective(p, N);
        if (v < best) { best = v; best_n = N; }
        rising = (v > prev) ? rising + 1 : 0;
        prev = v;
        if (rising > 200) break;  // objective grows linearly for large N
    }
    if (!std::isfinite(best)) throw std::invalid_argument("pbar: no admissible N in range");

    // Real-N refinement by golden section around the integer minimizer.
    double lo = std::max(N0 * (1 + 1e-9), best_n - 2.0), hi = best_n + 2.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = pbar_objective(p, x1), f2 = pbar_objective(p, x2);
    for (int it = 0; it < 200 && (b - a) > 1e-10; ++it) {
        if (f1 < f2) { b = x2; x2 = x1; f2 = f1; x1 = b - phi * (b - a); f1 = pbar_objective(p, x1); }
        else { a = x1; x1 = x2; f1 = f2; x2 = a + phi * (b - a); f2 = pbar_objective(p, x2); }
    }
    const double nr = 0.5 * (a + b);
    const double prefix = p.rprime - std::max(p.r, p.rprime);
    PbarResult res;
    res.pbar = prefix + best;
    res.n_star = best_n;
    res.pbar_real = prefix + std::min(best, pbar_objective(p, nr));
    res.n_star_real = nr;
    return res;
}

AlphaWindow alpha_window(const NmParams& p) {
    const double mp = p.m_prime();
    const double rpp = p.r_dprime();
    const double pp = p.p - mp;
    const double p0 = (pp + rpp) / (p.N + 1.0);
    AlphaWindow w;
    w.lo = std::max({p.gamma0 / p.k, p.gamma / p.k, 0.5 * (1.0 + mp / p.N)});
    w.hi = (p0 > 0)
               ? (1.0 - p.kappa / p.k - (p.m + rpp) / p0) / (1.0 + 1.0 / p0)
               : -std::numeric_limits<double>::infinity();
    return w;
}

double beta_exponent(const NmParams& p) {
    const double mp = p.m_prime();
    const double rpp = p.r_dprime();
    const double pp = p.p - mp;
    const double q = p.q();
    return ((pp - q) - p.N * (q + rpp)) / (pp + rpp);
}

bool start_condition(const NmParams& p) {
    const double g = std::max(p.gamma, p.gamma0);
    return -p.alpha * std::log(p.theta_start()) <= g * std::log(p.eps) + kTol;
}

ThetaSchedule theta_schedule(const NmParams& p, int jmax) {
    p.validate();
    if (jmax < 1) throw std::invalid_argument("theta_schedule: jmax must be >= 1");
    if (!(p.zeta <= 2.0 * p.alpha))
        throw std::invalid_argument("theta_schedule: zeta must lie in (1, 2 alpha]");
    ThetaSchedule sch;
    const double lt0 = std::log(p.theta_start());
    for (int j = 0; j < jmax; ++j) {
        const double lt = lt0 * std::pow(p.zeta, j);
        if (lt > std::log(kThetaCap)) { sch.truncated = true; break; }
        sch.thetas.push_back(std::exp(lt));
    }
    sch.cond10_ok = start_condition(p);
    double sum = 0.0;
    for (double t : sch.thetas) sum += std::pow(t, -p.alpha);
    sch.sum_ratio = sum / std::pow(p.theta_start(), -p.alpha);
    sch.summable_ok = sch.sum_ratio <= 2.0 + kTol;
    return sch;
}

StepVerdicts step_conditions(const NmParams& p, double theta_j, double theta_j1) {
    const double q = p.q();
    const double lj = std::log(theta_j), lj1 = std::log(theta_j1);
    const double lm = std::log(p.margin);
    StepVerdicts v;
    {
        const double lhs = std::exp((p.m - q - p.alpha) * lj) + std::exp(-2.0 * p.alpha * lj);
        v.con2 = std::log(lhs) <= lm - lj1 + kTol;
    }
    {
        const double lhs = -p.k * std::log(p.eps) + (p.m_prime() + p.N) * lj;
        v.con3 = lhs <= lm + p.N * lj1 + kTol;
    }
    {
        const double beta = beta_exponent(p);
        const double lhs = -p.kappa * std::log(p.eps) - beta * lj;
        v.con4 = lhs <= lm - p.alpha * lj + kTol;
    }
    return v;
}

FeasibilityReport feasibility_report(const NmParams& p, int n_max) {
    p.validate();
    FeasibilityReport rep;
    rep.ass_k_ok = check_ass_k(p);
    rep.window = alpha_window(p);
    rep.alpha_in_window = !rep.window.empty() && rep.window.contains(p.alpha);
    rep.zeta_ok = p.zeta > 1.0 && p.zeta <= 2.0 * p.alpha;
    rep.m_prime = p.m_prime();
    rep.r_dprime = p.r_dprime();
    rep.p0 = (p.p - rep.m_prime + rep.r_dprime) / (p.N + 1.0);
    rep.M = std::max({p.gamma0 / p.k, p.gamma / p.k, 0.5 * (1.0 + rep.m_prime / p.N)});
    rep.N0 = rep.ass_k_ok ? p.k * rep.m_prime / (p.k - 2.0 * p.kappa)
                          : std::numeric_limits<double>::infinity();
    rep.beta = beta_exponent(p);
    if (rep.ass_k_ok) rep.pbar = pbar(p, n_max);
    return rep;
}

std::string FeasibilityReport::to_json() const {
    std::ostringstream os;
    os.precision(15);
    os << "{\"ass_k_ok\":" << (ass_k_ok ? "true" : "false");
    os << ",\"alpha_window\":";
    if (window.empty()) os << "null";
    else os << "[" << window.lo << "," << window.hi << "]";
    os << ",\"alpha_in_window\":" << (alpha_in_window ? "true" : "false");
    os << ",\"zeta_ok\":" << (zeta_ok ? "true" : "false");
    os << ",\"feasible\":" << (feasible() ? "true" : "false");
    if (pbar) {
        os << ",\"pbar\":" << pbar->pbar << ",\"n_star\":" << pbar->n_star
           << ",\"pbar_real\":" << pbar->pbar_real << ",\"n_star_real\":" << pbar->n_star_real;
    }
    auto num = [](double v) {
        if (!std::isfinite(v)) return std::string("null");
        std::ostringstream o;
        o.precision(15);
        o << v;
        return o.str();
    };
    os << ",\"m_prime\":" << num(m_prime) << ",\"r_dprime\":" << num(r_dprime)
       << ",\"p0\":" << num(p0) << ",\"M\":" << num(M) << ",\"N0\":" << num(N0)
       << ",\"beta\":" << num(beta) << "}";
    return os.str();
}

}  // namespace nmiter::scheduler
