#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nmiter/calculus.hpp"
#include "nmiter/norms.hpp"
#include "nmiter/selftest.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace nmiter::fnspace;
using testutil::brute_fourier_norm;
using testutil::random_band_limited;

TEST_CASE("grid invariants") {
    CHECK_THROWS(Grid::periodic(8));
    CHECK_THROWS(Grid::periodic(100));  // not a power of two
    CHECK_THROWS(Grid::line(32, -1.0));
    auto g = Grid::line(33, 10.0);
    CHECK(g.h == doctest::Approx(20.0 / 32));
    CHECK(g.x(0) == doctest::Approx(-10.0));
    CHECK(g.x(32) == doctest::Approx(10.0));
}

TEST_CASE("norm: zero function") {
    auto g = Grid::periodic(64);
    GridFunction f(g, 1);
    CHECK(norm(f, NormSpec::fourier(3, 0.5)) == 0.0);
    CHECK(norm(f, NormSpec::dsum(2, 0.5, 0.1)) == 0.0);
}

TEST_CASE("norm: constant on a line grid") {
    // eps^{1/2} * sqrt(int_{-10}^{10} 1 dx) = sqrt(0.1) * sqrt(20) = sqrt(2)
    auto g = Grid::line(2049, 10.0);
    auto f = GridFunction::sample(g, [](double) { return 1.0; });
    const double v = norm(f, NormSpec::dsum(0, 0.1, 0.0));
    CHECK(v == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("norm: single fourier mode matches the closed form") {
    auto g = Grid::periodic(256, 1.0);
    const double xi0 = 7.0, eps = 0.3, s = 2.5;
    auto f = GridFunction::sample2(
        g, [&](double x) { return std::cos(xi0 * x); },
        [&](double x) { return std::sin(xi0 * x); });
    const double expect = std::pow(1.0 + eps * eps * xi0 * xi0, s / 2.0) * std::sqrt(g.period());
    CHECK(norm(f, NormSpec::fourier(s, eps)) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("norm: flavor and resolution guards") {
    auto gl = Grid::line(65, 5.0);
    auto f = GridFunction::sample(gl, [](double x) { return std::exp(-x * x); });
    CHECK_THROWS(norm(f, NormSpec::fourier(1, 0.5)));
    CHECK_THROWS(norm(f, NormSpec::dsum(30, 0.5)));  // 30 > 65/4
    auto gp = Grid::periodic(64);
    GridFunction fp(gp, 1);
    CHECK_NOTHROW(norm(fp, NormSpec::fourier(3.5, 0.5)));
}

TEST_CASE("scale monotonicity in s") {
    std::mt19937_64 rng(7);
    auto gp = Grid::periodic(256);
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_band_limited(gp, 40, rng);
        double prev = norm(f, NormSpec::fourier(0, 0.4));
        for (double s : {0.5, 1.0, 2.0, 3.0, 5.0}) {
            const double cur = norm(f, NormSpec::fourier(s, 0.4));
            CHECK(prev <= cur + 1e-12);
            prev = cur;
        }
    }
    auto gl = Grid::line(257, 20.0);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
        const double a = gauss(rng), b = gauss(rng);
        auto f = GridFunction::sample(gl, [&](double x) {
            return (a + b * std::sin(x)) * std::exp(-0.1 * x * x);
        });
        double prev = norm(f, NormSpec::dsum(0, 0.3, 0.1));
        for (int s = 1; s <= 4; ++s) {
            const double cur = norm(f, NormSpec::dsum(s, 0.3, 0.1));
            CHECK(prev <= cur + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("derivative: constants, eigenfunctions, tanh") {
    auto gp = Grid::periodic(128);
    auto c = GridFunction::sample(gp, [](double) { return 4.2; });
    CHECK(derivative(c, 1).linf() <= 1e-12);

    auto s = GridFunction::sample(gp, [](double x) { return std::sin(x); });
    auto d2 = derivative(s, 2);
    for (int i = 0; i < gp.n; ++i)
        CHECK(d2(0, i) == doctest::Approx(-std::sin(gp.x(i))).epsilon(1e-10));

    auto gl = Grid::line(4097, 40.0);
    auto t = GridFunction::sample(gl, [](double x) { return std::tanh(x / 4.0); });
    const int mid = (gl.n - 1) / 2;
    CHECK(derivative(t, 1)(0, mid) == doctest::Approx(0.25).epsilon(1e-6));
    CHECK_THROWS(derivative(t, 5));
}

TEST_CASE("spectral derivative is exact on modes") {
    auto gp = Grid::periodic(128, 2.0);
    const double xi0 = 5.0 / 2.0;  // integer mode over P=2
    auto f = GridFunction::sample2(
        gp, [&](double x) { return std::cos(xi0 * x); },
        [&](double x) { return std::sin(xi0 * x); });
    auto d = derivative(f, 1);
    for (int i = 0; i < gp.n; ++i) {
        CHECK(d(0, i) == doctest::Approx(-xi0 * std::sin(xi0 * gp.x(i))).epsilon(1e-10));
        CHECK(d(1, i) == doctest::Approx(xi0 * std::cos(xi0 * gp.x(i))).epsilon(1e-10));
    }
}

TEST_CASE("smooth: plateau behavior on modes") {
    auto gp = Grid::periodic(256);
    CutoffProfile chi;
    auto low = GridFunction::sample(gp, [](double x) { return std::cos(5.0 * x); });
    auto s1 = smooth(low, 8.0, chi);
    CHECK((s1 - low).linf() <= 1e-12);

    auto high = GridFunction::sample(gp, [](double x) { return std::cos(40.0 * x); });
    auto s2 = smooth(high, 8.0, chi);  // 40 >= 2 * 8 * 2
    CHECK(s2.linf() <= 1e-12);
    CHECK_THROWS(smooth(low, 0.0, chi));
}

TEST_CASE("smoothing error bound on white noise, brute-force oracle") {
    // || S_theta f - f ||_1 <= C theta^{-2} || f ||_3 with C <= 2
    std::mt19937_64 rng(11);
    auto gp = Grid::periodic(512);
    CutoffProfile chi;
    std::normal_distribution<double> gauss;
    GridFunction f(gp, 1);
    for (int i = 0; i < gp.n; ++i) f(0, i) = gauss(rng);
    const double eps = 1.0;
    for (double theta : {4.0, 8.0, 16.0, 32.0}) {
        auto sf = smooth(f, theta, chi);
        const double err = brute_fourier_norm(sf - f, 1, eps);
        const double ref = brute_fourier_norm(f, 3, eps);
        CHECK(err <= 2.0 * std::pow(theta, -2.0) * ref);
    }
}

TEST_CASE("interpolation defect") {
    auto gp = Grid::periodic(256);
    const auto base = NormSpec::fourier(1, 0.5);

    auto mode = GridFunction::sample(gp, [](double x) { return std::cos(9.0 * x); });
    CHECK(interpolation_defect(mode, base, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));

    auto two = GridFunction::sample(
        gp, [](double x) { return std::cos(3.0 * x) + 0.5 * std::cos(21.0 * x); });
    const double d2 = interpolation_defect(two, base, 1.0, 2.0);
    CHECK(d2 > 0.0);
    CHECK(d2 <= 1.0 + 1e-12);

    GridFunction z(gp, 1);
    CHECK_THROWS(interpolation_defect(z, base, 1.0, 2.0));
}

TEST_CASE("interpolation defect: fourier flavor is log-convex exactly") {
    std::mt19937_64 rng(3);
    auto gp = Grid::periodic(512);
    for (int trial = 0; trial < 50; ++trial) {
        auto f = random_band_limited(gp, 60, rng);
        for (auto [s, sig, sigp] : {std::tuple<double, double, double>{0, 1, 2},
                                    {1, 1, 3}, {0, 0.5, 4}, {2, 2, 4}}) {
            auto base = NormSpec::fourier(s, 0.25);
            CHECK(interpolation_defect(f, base, sig, sigp) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("interpolation defect: derivative-sum flavor stays near one") {
    std::mt19937_64 rng(5);
    auto gp = Grid::periodic(256);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto f = random_band_limited(gp, 30, rng);
        auto base = NormSpec::dsum(0, 0.5);
        worst = std::max(worst, interpolation_defect(f, base, 1.0, 2.0));
    }
    CHECK(worst <= 1.05);
}

TEST_CASE("smoothing selftest") {
    auto gp = Grid::periodic(2048);
    CutoffProfile chi;

    SUBCASE("pure low mode never sees the cutoff") {
        auto f = GridFunction::sample(gp, [](double x) { return std::cos(3.0 * x); });
        for (double theta : {4.0, 16.0, 64.0}) {
            auto sf = smooth(f, theta, chi);
            CHECK((sf - f).linf() <= 1e-12);
        }
    }

    SUBCASE("sharp cutoff gain constant is at most one") {
        CutoffProfile sharp{CutoffShape::sharp};
        std::mt19937_64 rng(23);
        const double eps = 0.5;
        for (int trial = 0; trial < 20; ++trial) {
            auto f = random_band_limited(gp, 700, rng);
            for (double theta : {4.0, 32.0, 256.0}) {
                auto sf = smooth(f, theta, sharp);
                for (auto [s, sp] : {std::pair<double, double>{0, 6}, {1, 3}}) {
                    const double gain = brute_fourier_norm(sf, sp, eps);
                    const double ref = brute_fourier_norm(f, s, eps);
                    CHECK(gain <= std::pow(theta, sp - s) * ref * (1.0 + 1e-12));
                }
            }
        }
    }

    SUBCASE("full report passes with the smooth bump") {
        auto rep = smoothing_selftest(gp, chi, 100);
        CHECK(rep.pass);
        CHECK(rep.max_approx_const <= 4.0);
        CHECK(rep.max_gain_const <= 4.0);
        CHECK_THROWS(smoothing_selftest(gp, chi, 5));
    }
}

TEST_CASE("cutoff profiles satisfy the plateau invariants") {
    for (auto shape : {CutoffShape::smooth_bump, CutoffShape::raised_cosine, CutoffShape::sharp}) {
        CutoffProfile chi{shape};
        CHECK(chi(0.3) == 1.0);
        CHECK(chi(1.0) == 1.0);
        CHECK(chi(2.0) == 0.0);
        CHECK(chi(5.0) == 0.0);
        double prev = 1.0;
        for (double t = 1.0; t <= 2.0; t += 0.01) {
            CHECK(chi(t) <= prev + 1e-15);
            prev = chi(t);
        }
    }
}

TEST_CASE("values stay finite through the public operations") {
    std::mt19937_64 rng(9);
    auto gp = Grid::periodic(128);
    auto f = random_band_limited(gp, 20, rng);
    CHECK(f.all_finite());
    CHECK(derivative(f, 3).all_finite());
    CHECK(smooth(f, 8.0, CutoffProfile{}).all_finite());
}
