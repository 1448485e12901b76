#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nmiter/io.hpp"
#include "nmiter/scheduler.hpp"

#include <cmath>
#include <random>

using namespace nmiter::scheduler;

namespace {
NmParams relax_defaults() {
    NmParams p;
    p.k = 3; p.kappa = 1; p.gamma0 = 0; p.gamma = 1;
    p.m = 1; p.r = 1; p.rprime = 0;
    p.s0 = 3; p.sbar = 8; p.s = 4;
    p.alpha = 0.654; p.N = 11; p.p = 4000; p.zeta = 1.2;
    p.eps = 0.1;
    return p;
}
}  // namespace

TEST_CASE("accuracy threshold on k") {
    NmParams p = relax_defaults();
    CHECK(check_ass_k(p));  // max(2,1,2) = 2 < 3

    p.k = 2; p.gamma = 0;
    CHECK_FALSE(check_ass_k(p));  // boundary 2 < 2 fails

    p.k = 4.5; p.kappa = 2; p.gamma0 = 0.5; p.gamma = 0;
    CHECK(check_ass_k(p));  // max(4, 2.5, 2) = 4 < 4.5
}

TEST_CASE("minimal high-norm offset for the profile parameters") {
    NmParams p = relax_defaults();
    auto res = pbar(p);
    CHECK(res.pbar == doctest::Approx(215.0).epsilon(1e-9));
    CHECK(res.n_star == 7);
    CHECK(res.pbar_real <= res.pbar + 1e-9);

    SUBCASE("monotone decrease toward larger k") {
        NmParams q = p;
        q.k = 2.2;
        CHECK(pbar(q).pbar > res.pbar);
    }
    SUBCASE("no prefix when the tame indices coincide") {
        NmParams q = p;
        q.rprime = q.r;  // prefix r' - max(r,r') = 0
        auto r2 = pbar(q);
        CHECK(r2.pbar >= 0.0);
    }
    SUBCASE("scan ceiling is not active") {
        auto wide = pbar(p, 20000);
        CHECK(wide.pbar == doctest::Approx(res.pbar));
        CHECK(wide.n_star == res.n_star);
    }
    SUBCASE("infeasible parameters are rejected") {
        NmParams q = p;
        q.k = 1.5;
        CHECK_THROWS(pbar(q));
    }
}

TEST_CASE("offset blow-up rates near the threshold") {
    // gamma0 = gamma = 0: quadratic blow-up in 1/(k - 2 kappa)
    std::vector<double> gaps, vals;
    for (double k : {2.1, 2.05, 2.025, 2.0125}) {
        NmParams p = relax_defaults();
        p.gamma = 0; p.gamma0 = 0; p.k = k;
        gaps.push_back(k - 2.0);
        vals.push_back(pbar(p).pbar);
    }
    double slope = nmiter::io::loglog_slope(gaps, vals);
    CHECK(slope == doctest::Approx(-2.0).epsilon(0.15));

    // gamma = 3 kappa: simple blow-up in 1/(k - kappa - gamma)
    gaps.clear(); vals.clear();
    for (double k : {4.4, 4.2, 4.1, 4.05}) {
        NmParams p = relax_defaults();
        p.gamma = 3.0; p.k = k;
        gaps.push_back(k - 4.0);
        vals.push_back(pbar(p).pbar);
    }
    slope = nmiter::io::loglog_slope(gaps, vals);
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.3));
}

TEST_CASE("alpha window") {
    NmParams p = relax_defaults();
    p.N = 7; p.p = 300;
    auto w = alpha_window(p);
    CHECK(w.lo == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(w.hi == doctest::Approx((37.5 / 38.5) * (1.0 - 1.0 / 3.0 - 2.0 / 37.5)).epsilon(1e-12));
    CHECK_FALSE(w.empty());

    SUBCASE("upper bound tends to 1 - kappa/k for large p") {
        NmParams q = p;
        q.p = 1e9;
        CHECK(alpha_window(q).hi == doctest::Approx(1.0 - 1.0 / 3.0).epsilon(1e-6));
    }
    SUBCASE("tiny p empties the window") {
        NmParams q = p;
        q.p = 4;
        CHECK(alpha_window(q).empty());
    }
}

TEST_CASE("window consistency over random tuples") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int nonempty = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        NmParams p;
        p.k = 0.1 + 9.9 * U(rng);
        p.kappa = 2.0 * U(rng);
        p.gamma0 = 2.0 * U(rng);
        p.gamma = 2.0 * U(rng);
        p.m = 2.0 * U(rng);
        p.r = 2.0 * U(rng);
        p.rprime = 2.0 * U(rng);
        p.N = 1 + std::floor(30 * U(rng));
        p.p = 10 + std::floor(1e4 * U(rng));
        auto w = alpha_window(p);
        if (!w.empty()) {
            ++nonempty;
            CHECK(check_ass_k(p));
        }
    }
    CHECK(nonempty > 10);  // the sweep hits genuinely feasible tuples
}

TEST_CASE("theta schedule") {
    NmParams p = relax_defaults();
    auto sch = theta_schedule(p, 4);
    REQUIRE(sch.thetas.size() == 4);
    CHECK(sch.thetas[0] == doctest::Approx(1000.0).epsilon(1e-12));

    NmParams q = p;
    q.zeta = 1.1;
    auto sch2 = theta_schedule(q, 2);
    CHECK(sch2.thetas[1] == doctest::Approx(std::pow(1000.0, 1.1)).epsilon(1e-12));
    CHECK(sch2.thetas[1] == doctest::Approx(1995.262).epsilon(1e-4));

    SUBCASE("start condition") {
        // theta0^{-alpha} = 1000^{-0.4} ~ 0.0631 <= eps^{max(gamma,gamma0)} = 0.1
        NmParams r = p;
        r.alpha = 0.4;
        CHECK(start_condition(r));
        CHECK(std::pow(r.theta_start(), -r.alpha) == doctest::Approx(0.0631).epsilon(1e-3));
        r.zeta = 0.9;
        CHECK_THROWS(theta_schedule(r, 3));  // zeta must exceed 1
    }
    SUBCASE("summability of the feasible default") {
        auto s = theta_schedule(p, 21);
        CHECK(s.summable_ok);
        CHECK(s.sum_ratio <= 2.0);
    }
    SUBCASE("overflow truncates with a flag") {
        auto s = theta_schedule(p, 60);
        CHECK(s.truncated);
        CHECK(s.thetas.size() < 60);
        for (double t : s.thetas) CHECK(std::isfinite(t));
    }
}

TEST_CASE("per-step conditions") {
    NmParams p = relax_defaults();
    auto rep = feasibility_report(p);
    REQUIRE(rep.feasible());

    SUBCASE("feasible pick satisfies all three along the schedule") {
        auto sch = theta_schedule(p, 22);
        for (size_t j = 0; j + 1 < sch.thetas.size(); ++j) {
            auto v = step_conditions(p, sch.thetas[j], sch.thetas[j + 1]);
            CHECK(v.con2);
            CHECK(v.con3);
            CHECK(v.con4);
        }
    }
    SUBCASE("degenerate schedule exponent breaks the growth condition") {
        auto sch = theta_schedule(p, 8);
        NmParams q = p;
        // zeta = 1 collapses theta_{j+1} to theta_j
        for (size_t j = 0; j + 1 < sch.thetas.size(); ++j) {
            auto v = step_conditions(q, sch.thetas[j], sch.thetas[j]);
            CHECK_FALSE(v.con3);
        }
    }
    SUBCASE("alpha above the window breaks the interpolation condition") {
        NmParams q = p;
        q.alpha = rep.window.hi + 0.05;
        auto sch = theta_schedule(p, 2);
        auto v = step_conditions(q, sch.thetas[0], sch.thetas[1]);
        CHECK_FALSE(v.con4);
    }
}

TEST_CASE("feasibility report serializes") {
    NmParams p = relax_defaults();
    auto rep = feasibility_report(p);
    auto s = rep.to_json();
    CHECK(s.find("\"feasible\":true") != std::string::npos);
    CHECK(s.find("\"n_star\":7") != std::string::npos);
    CHECK(rep.beta == doctest::Approx(1.0 - 12.0 * (2.0 + p.alpha) / 4000.0).epsilon(1e-9));
}
