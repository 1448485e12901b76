#pragma once

#include "nmiter/scheduler.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmiter::engine {

using scheduler::NmParams;

/// Thrown by instances when the linearized solve cannot be completed.
struct SingularSolveError : std::runtime_error {
    explicit SingularSolveError(const std::string& what) : std::runtime_error(what) {}
};

/// Contract a concrete problem fulfills: the residual map, its right
/// inverse, second derivative, the scale norms and the smoothing family.
template <class P>
concept Problem = requires(P& p, const typename P::EElem& u, const typename P::EElem& v,
                           const typename P::FElem& phi, double s, double theta) {
    { p.zero() } -> std::same_as<typename P::EElem>;
    { p.residual(u) } -> std::same_as<typename P::FElem>;
    { p.apply_derivative(u, v) } -> std::same_as<typename P::FElem>;
    { p.right_inverse(u, phi) } -> std::same_as<typename P::EElem>;
    { p.second_derivative(u, v, v) } -> std::same_as<typename P::FElem>;
    { p.smooth(u, theta) } -> std::same_as<typename P::EElem>;
    { p.e_norm(u, s) } -> std::convertible_to<double>;
    { p.f_norm(phi, s) } -> std::convertible_to<double>;
    { p.params() } -> std::convertible_to<NmParams>;
    { u + v } -> std::same_as<typename P::EElem>;
    { 2.0 * u } -> std::same_as<typename P::EElem>;
};

enum class SolveStatus { converged, stalled, diverged, budget };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::stalled: return "stalled";
        case SolveStatus::diverged: return "diverged";
        case SolveStatus::budget: return "budget";
    }
    return "?";
}

struct StepRecord {
    int j = 0;
    double theta = 0.0;
    double res_s = 0.0;
    double v_sq = 0.0;
    double u_sq = 0.0;
    double u_sp = 0.0;
    bool c1 = false, c2i = false, c2ii = false, c2iii = false;
    double ms = 0.0;
    double e1 = 0.0, e2 = 0.0;  // smoothing / scheme error split, when enabled
};

struct IterationTrace {
    std::vector<StepRecord> steps;
    double q_index = 0.0;       // norm index used for |v|_{s+q}
    double p_index = 0.0;       // norm index used for |u|_{s+p} (capped at sbar)
    bool p_index_capped = false;

    void to_csv(std::ostream& os) const {
        os << "j,theta,res_s,v_sq,u_sq,u_sp,c1,c2i,c2ii,c2iii,ms\n";
        char buf[256];
        for (const auto& r : steps) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d,%.3f\n",
                          r.j, r.theta, r.res_s, r.v_sq, r.u_sq, r.u_sp, int(r.c1), int(r.c2i),
                          int(r.c2ii), int(r.c2iii), r.ms);
            os << buf;
        }
    }
};

template <class E>
struct SolveResult {
    E u;
    SolveStatus status = SolveStatus::budget;
    IterationTrace trace;
    double final_res = 0.0;
    std::string message;
};

struct EngineOptions {
    int jmax = 30;
    double floor = 1e-10;
    double margin = 4.0;       // hidden-constant margin in the C1/C2 predicates
    double diverge_factor = 10.0;
    bool override_feasibility = false;
    bool record_error_split = false;
};

/// C1 at step j: |v_j|_{s+q} <= margin * theta_j^{-alpha}.
inline bool check_c1(const IterationTrace& t, int j, const NmParams& p, double margin = 4.0) {
    const auto& r = t.steps.at(j);
    return r.v_sq <= margin * std::pow(r.theta, -p.alpha);
}

/// C2 at step j: the low-norm, residual-decay and high-norm-growth bounds.
inline std::array<bool, 3> check_c2(const IterationTrace& t, int j, const NmParams& p,
                                    double margin = 4.0) {
    const auto& r = t.steps.at(j);
    const bool i = r.u_sq <= margin * std::pow(p.theta_start(), -p.alpha);
    const bool ii = r.res_s <= margin / r.theta;
    const bool iii = r.u_sp <= margin * std::pow(r.theta, p.N);
    return {i, ii, iii};
}

namespace detail {

inline std::array<bool, 3> check_c2_record(const StepRecord& r, const NmParams& p,
                                           double margin) {
    return {r.u_sq <= margin * std::pow(p.theta_start(), -p.alpha),
            r.res_s <= margin / r.theta,
            r.u_sp <= margin * std::pow(r.theta, p.N)};
}

template <Problem P>
SolveResult<typename P::EElem> run_impl(P& prob, const EngineOptions& opt, bool smoothing) {
    const NmParams par = prob.params();
    auto feas = scheduler::feasibility_report(par);
    if (!feas.feasible() && !opt.override_feasibility)
        throw std::invalid_argument(std::string("engine: infeasible parameters: ") +
                                    feas.to_json());
    auto sch = scheduler::theta_schedule(par, opt.jmax + 1);

    SolveResult<typename P::EElem> out{prob.zero(), SolveStatus::budget, {}, 0.0, ""};
    auto& tr = out.trace;
    tr.q_index = par.s + par.q();
    tr.p_index = std::min(par.s + par.p, par.sbar);
    tr.p_index_capped = tr.p_index < par.s + par.p;

    auto u = prob.zero();
    double resmin = std::numeric_limits<double>::infinity();
    const auto t_start = std::chrono::steady_clock::now();

    for (int j = 0; j <= opt.jmax; ++j) {
        const double theta =
            j < static_cast<int>(sch.thetas.size()) ? sch.thetas[j] : 1e300;
        StepRecord rec;
        rec.j = j;
        rec.theta = theta;

        typename P::FElem F = prob.residual(u);
        rec.res_s = prob.f_norm(F, par.s);
        rec.u_sq = prob.e_norm(u, tr.q_index);
        rec.u_sp = prob.e_norm(u, tr.p_index);
        out.final_res = rec.res_s;

        if (!std::isfinite(rec.res_s)) {
            out.status = SolveStatus::diverged;
            out.message = "non-finite residual";
            tr.steps.push_back(rec);
            break;
        }
        if (rec.res_s <= opt.floor) {
            rec.c1 = true;
            auto c2 = check_c2_record(rec, par, opt.margin);
            rec.c2i = c2[0]; rec.c2ii = c2[1]; rec.c2iii = c2[2];
            tr.steps.push_back(rec);
            out.status = SolveStatus::converged;
            break;
        }
        if (rec.res_s > opt.diverge_factor * resmin) {
            tr.steps.push_back(rec);
            out.status = SolveStatus::diverged;
            out.message = "residual grew above ten times its running minimum";
            break;
        }
        resmin = std::min(resmin, rec.res_s);

        typename P::EElem v = prob.zero();
        try {
            v = -1.0 * prob.right_inverse(u, F);
        } catch (const SingularSolveError& e) {
            tr.steps.push_back(rec);
            out.status = SolveStatus::stalled;
            out.message = e.what();
            break;
        }
        rec.v_sq = prob.e_norm(v, tr.q_index);
        rec.c1 = rec.v_sq <= opt.margin * std::pow(theta, -par.alpha);
        auto c2 = check_c2_record(rec, par, opt.margin);
        rec.c2i = c2[0]; rec.c2ii = c2[1]; rec.c2iii = c2[2];

        typename P::EElem sv = smoothing ? prob.smooth(v, theta) : v;
        if (opt.record_error_split) {
            rec.e1 = std::pow(theta, par.m - par.q()) * rec.v_sq;
            const double sv_low = prob.e_norm(sv, par.s0 + par.m);
            const double sv_high = prob.e_norm(sv, std::min(par.s + par.m, par.sbar));
            const double u_high = prob.e_norm(u, std::min(par.s + par.m, par.sbar));
            rec.e2 = sv_low * (sv_high + sv_low * u_high);
        }
        u = u + sv;

        rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                           t_start)
                     .count();
        tr.steps.push_back(rec);
    }
    out.u = u;
    return out;
}

}  // namespace detail

/// The smoothed iteration u_{j+1} = u_j + S_{theta_j} v_j with
/// v_j = -Psi(u_j) Phi(u_j), starting from u_0 = 0.
template <Problem P>
SolveResult<typename P::EElem> run_nash_moser(P& prob, const EngineOptions& opt = {}) {
    return detail::run_impl(prob, opt, true);
}

/// Plain Newton baseline: same loop, no smoothing.
template <Problem P>
SolveResult<typename P::EElem> run_newton(P& prob, const EngineOptions& opt = {}) {
    return detail::run_impl(prob, opt, false);
}

/// Instances that expose an inner product (and translation, for the phase
/// tools) on their E-elements.
template <class P>
concept HilbertProblem = Problem<P> && requires(P& p, const typename P::EElem& u) {
    { p.dot(u, u) } -> std::convertible_to<double>;
};

template <class P>
concept TranslatableProblem = HilbertProblem<P> && requires(P& p, const typename P::EElem& u,
                                                            double a) {
    { p.translate(u, a) } -> std::same_as<typename P::EElem>;
};

struct KernelCandidateResult {
    bool accepted = false;
    double defect = 0.0;  // ||Phi'(u) b||_{s0} / ||b||_{s0+m}
};

/// Gram-Schmidt in the discrete L2 inner product; keeps candidates whose
/// image under the linearization is small relative to their own size.
template <HilbertProblem P>
std::vector<typename P::EElem> kernel_basis(P& prob, const typename P::EElem& u,
                                            const std::vector<typename P::EElem>& candidates,
                                            double tol_kernel = 1e-5,
                                            std::vector<KernelCandidateResult>* results = nullptr) {
    const NmParams par = prob.params();
    std::vector<typename P::EElem> basis;
    for (const auto& cand : candidates) {
        auto b = cand;
        for (const auto& e : basis) b = b + (-prob.dot(b, e)) * e;
        const double nb = std::sqrt(prob.dot(b, b));
        KernelCandidateResult r;
        if (nb > 0) {
            b = (1.0 / nb) * b;
            const double img = prob.f_norm(prob.apply_derivative(u, b), par.s0);
            const double ref = prob.e_norm(b, par.s0 + par.m);
            r.defect = ref > 0 ? img / ref : img;
            r.accepted = r.defect <= tol_kernel;
            if (r.accepted) basis.push_back(b);
        }
        if (results) results->push_back(r);
    }
    return basis;
}

/// dist_{s0}(uhat - u, span basis) / |uhat - u|_{s0}, with the span projected
/// out in the L2 inner product.
template <HilbertProblem P>
double tangency_defect(P& prob, const typename P::EElem& u, const typename P::EElem& uhat,
                       const std::vector<typename P::EElem>& basis) {
    const NmParams par = prob.params();
    auto w = uhat + (-1.0) * u;
    const double nw = prob.e_norm(w, par.s0);
    if (nw == 0.0) return 0.0;
    for (const auto& b : basis) w = w + (-prob.dot(w, b)) * b;
    return prob.e_norm(w, par.s0) / nw;
}

struct PhaseAlignResult {
    bool found = false;
    double a = 0.0;
    std::vector<std::pair<double, double>> scan;  // (a, h(a)) samples when bracketing fails
};

/// Root-find the shift a with <phi, uhat(.+a) - u> = 0, phi the (single)
/// kernel direction. Scans for a sign change, then bisects.
template <TranslatableProblem P>
PhaseAlignResult phase_align(P& prob, const typename P::EElem& u, const typename P::EElem& uhat,
                             const typename P::EElem& phi, double a_max, int scan_points = 41) {
    auto h = [&](double a) {
        auto shifted = prob.translate(uhat, a);
        return prob.dot(phi, shifted + (-1.0) * u);
    };
    PhaseAlignResult res;
    double prev_a = -a_max, prev_h = h(prev_a);
    res.scan.emplace_back(prev_a, prev_h);
    double lo = 0, hi = 0, flo = 0;
    bool bracketed = false;
    for (int i = 1; i < scan_points; ++i) {
        const double a = -a_max + 2.0 * a_max * i / (scan_points - 1);
        const double ha = h(a);
        res.scan.emplace_back(a, ha);
        if (!bracketed && prev_h * ha <= 0.0 && (prev_h != 0.0 || ha != 0.0)) {
            lo = prev_a; hi = a; flo = prev_h;
            bracketed = true;
        }
        prev_a = a; prev_h = ha;
    }
    if (!bracketed) return res;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = h(mid);
        if (flo * fm <= 0.0) hi = mid;
        else { lo = mid; flo = fm; }
    }
    res.found = true;
    res.a = 0.5 * (lo + hi);
    return res;
}

}  // namespace nmiter::engine
