#include <doctest.h>

#include <cmath>
#include <vector>

#include "mdm/critical.hpp"
#include "mdm/errors.hpp"
#include "mdm/variational.hpp"

using namespace mdm;

TEST_CASE("x_alpha and y_alpha") {
    CHECK(x_alpha(0.3, 0.3) == 0.0);
    CHECK(x_alpha(0, 0.5) == doctest::Approx((std::sqrt(3.0) - 1) / 2).epsilon(1e-15));
    CHECK(y_alpha(0, 0.5) == doctest::Approx(x_alpha(0, 0.5)).epsilon(1e-15));
    for (double a : {1e-3, 0.2, 0.7}) {
        for (double t : {0.0, 0.1, 0.5, 0.999}) {
            const double d = t * std::min(a, 1 - a);
            const double x = x_alpha(d, a), y = y_alpha(d, a);
            CHECK(std::fabs(x * x + x - (a - d)) < 1e-14);
            CHECK(std::fabs(y * y + y - (1 - a - d)) < 1e-14);
        }
    }
    CHECK_THROWS_AS(x_alpha(0.6, 0.5), ValidationError);
    CHECK_THROWS_AS(x_alpha(-0.1, 0.5), ValidationError);
    CHECK_THROWS_AS(y_alpha(0.8, 0.5), ValidationError);
}

TEST_CASE("psi1 is psi on the reduced curve") {
    const ReducedParams rp{0.3, -0.5, 2.0};
    for (double d : {0.0, 0.05, 0.2}) {
        CHECK(psi1(d, rp) == doctest::Approx(psi(reduced_densities(d, 0.3), rp.to_model())));
    }
    CHECK(psi1(0.0, {0.5, 0.0, 1e-300}) > 0.0);
}

TEST_CASE("f_alpha limits and derivatives") {
    CHECK(f_alpha(1e-12, 0.5) < -20);
    CHECK(f_alpha(0.5 - 1e-12, 0.5) > 10);
    CHECK_THROWS_AS(f_alpha(0.0, 0.5), ValidationError);
    CHECK_THROWS_AS(f_alpha(0.5, 0.5), ValidationError);
    for (double a : {0.5, 0.1, 1e-3}) {
        for (int i = 1; i < 1000; ++i) {
            const double d = a * i / 1000.0;
            CHECK(f_alpha_derivatives(d, a).d1 > 0.0);
        }
        for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double d = t * a;
            const double step = 1e-5 * a;
            const FAlpha c = f_alpha_derivatives(d, a);
            const FAlpha lo = f_alpha_derivatives(d - step, a);
            const FAlpha hi = f_alpha_derivatives(d + step, a);
            const double fd1 = (hi.f - lo.f) / (2 * step);
            const double fd2 = (hi.d1 - lo.d1) / (2 * step);
            const double fd3 = (hi.d2 - lo.d2) / (2 * step);
            CHECK(fd1 == doctest::Approx(c.d1).epsilon(1e-6));
            CHECK(std::fabs(fd2 - c.d2) <= 1e-6 * std::max(std::fabs(c.d2), std::fabs(c.d1) / a));
            CHECK(fd3 == doctest::Approx(c.d3).epsilon(1e-6));
        }
    }
}

TEST_CASE("critical_point") {
    for (double a : {1e-3, 1e-2, 0.1, 0.5}) {
        const CriticalPoint cp = critical_point(a);
        CHECK(cp.d_c > 0.0);
        CHECK(cp.d_c < a);
        CHECK(cp.J_c > 0.0);
        const FAlpha f = f_alpha_derivatives(cp.d_c, a);
        CHECK(std::fabs(f.d2) * cp.d_c * cp.d_c < 1e-9);
        CHECK(std::fabs(f.d1 - cp.J_c) < 1e-9 * cp.J_c);
        CHECK(std::fabs(f.f - cp.h_c - cp.J_c * cp.d_c) < 1e-9);
    }
    const CriticalPoint cp = critical_point(1e-3);
    CHECK(std::fabs(cp.d_c - 5e-4) < 5 * 1e-9);
    CHECK(cp.h_c == doctest::Approx(-1.518788).epsilon(0.005));
    CHECK(cp.J_c == doctest::Approx(4000).epsilon(1e-3));
    CHECK_THROWS_AS(critical_point(1.0), ValidationError);
}

TEST_CASE("psi1 derivatives at the critical point") {
    for (double a : {1e-3, 1e-2, 0.2}) {
        const CriticalPoint cp = critical_point(a);
        const Psi1Derivatives p = psi1_derivatives(cp.d_c, {a, cp.h_c, cp.J_c});
        CHECK(std::fabs(p.d1) < 1e-6);
        CHECK(std::fabs(p.d2) < 1e-6 * cp.J_c);
        CHECK(std::fabs(p.d3) * cp.d_c < 1e-6 * cp.J_c);
        CHECK(p.d4 < 0.0);
    }
    const ReducedParams rp{0.2, -0.3, 7.0};
    const double d = 0.07, step = 1e-6;
    const Psi1Derivatives p = psi1_derivatives(d, rp);
    CHECK((psi1(d + step, rp) - psi1(d - step, rp)) / (2 * step) == doctest::Approx(p.d1).epsilon(1e-6));
}

TEST_CASE("solve_branches examples") {
    const double a = 1e-3;
    const CriticalPoint cp = critical_point(a);
    for (double h : {-3.0, cp.h_c, 0.0, 2.0}) {
        CHECK(solve_branches({a, h, cp.J_c / 2}).size() == 1);
    }
    const auto coex = solve_branches({a, cp.h_c - cp.d_c * 1e3, cp.J_c + 1e3});
    REQUIRE(coex.size() == 3);
    CHECK(coex[0].stability == Stability::GlobalMax);
    CHECK(coex[1].stability == Stability::Unstable);
    CHECK(coex[2].stability == Stability::GlobalMax);
    CHECK(std::fabs(coex[0].psi1_value - coex[2].psi1_value) < 1e-8);
    for (const auto& b : coex) {
        CHECK(b.d > 0.0);
        CHECK(b.d < a);
        CHECK(std::fabs(f_alpha(b.d, a) - (cp.h_c - cp.d_c * 1e3) - (cp.J_c + 1e3) * b.d) < 1e-10);
    }
    CHECK(upper_branch(coex).d == coex[2].d);

    const auto off = solve_branches({a, cp.h_c - cp.d_c * 1e3 + 0.05, cp.J_c + 1e3});
    REQUIRE(off.size() == 3);
    CHECK(off[0].stability == Stability::LocalMax);
    CHECK(off[2].stability == Stability::GlobalMax);

    const auto sat = solve_branches({a, 20.0, 1.0});
    REQUIRE(sat.size() == 1);
    CHECK(sat[0].d > 0.99 * a);
    CHECK_THROWS_AS(solve_branches({a, 0.0, -1.0}), ValidationError);
}

TEST_CASE("fit_power_law recovers exact laws") {
    std::vector<double> x, y;
    for (double v : {1.0, 2.0, 5.0, 10.0}) {
        x.push_back(v);
        y.push_back(3.0 * std::pow(v, 0.5));
    }
    const PowerLawFit f = fit_power_law(x, y);
    CHECK(f.exponent == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-12));
    y[0] = -1.0;
    CHECK_THROWS_AS(fit_power_law(x, y), NumericalError);
}

TEST_CASE("exponent_scan") {
    const double a = 1e-2;
    const double jc = critical_point(a).J_c;
    const auto offsets = log_spaced(2.5e-3 * jc, 0.05 * jc, 9);
    const ExponentScan s = exponent_scan(a, offsets);
    CHECK(std::fabs(s.fit.exponent - 0.5) < 0.02);
    CHECK(std::fabs(s.fit.prefactor / s.reference_prefactor - 1) < 0.15);
    for (const auto& sm : s.samples) CHECK(sm.deviation > 0.0);
    const std::vector<double> too_big{0.2 * jc};
    CHECK_THROWS_AS(exponent_scan(a, too_big), ValidationError);
    const std::vector<double> negative{-1.0};
    CHECK_THROWS_AS(exponent_scan(a, negative), ValidationError);
}

TEST_CASE("log_spaced") {
    const auto v = log_spaced(1.0, 100.0, 3);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(10.0));
    CHECK(v[2] == doctest::Approx(100.0));
}

TEST_CASE("scaled_coupling_critical") {
    const ScaledCritical sc = scaled_coupling_critical(160000);
    CHECK(sc.alpha_c == doctest::Approx(0.005).epsilon(0.05));
    CHECK(std::fabs(sc.d_c - 0.0025) < 0.05 * 0.0025);
    CHECK(sc.d_mix_c == doctest::Approx(2 / (3 - std::sqrt(5.0)) * sc.alpha_c).epsilon(0.01));
    CHECK(critical_point(sc.alpha_c).J_c == doctest::Approx(sc.alpha_c * (1 - sc.alpha_c) * 160000).epsilon(1e-10));
    CHECK_THROWS(scaled_coupling_critical(10));
}

TEST_CASE("d_mix_scan") {
    const ScaledCritical sc = scaled_coupling_critical(160000);
    const DMixScan scan = d_mix_scan(160000, default_d_mix_alphas(sc));
    CHECK(std::fabs(scan.fit.exponent - 0.5) < 0.03);
    for (const auto& s : scan.samples) {
        CHECK(s.d_mix > 0.0);
        CHECK(s.d_mix <= 1.0);
    }
    const std::vector<double> below{0.5 * sc.alpha_c};
    CHECK_THROWS_AS(d_mix_scan(160000, below), ValidationError);
}
