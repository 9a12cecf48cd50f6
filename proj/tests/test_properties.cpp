#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mdm/critical.hpp"
#include "mdm/gaussian.hpp"
#include "mdm/model.hpp"
#include "mdm/variational.hpp"

using namespace mdm;

namespace {

ModelParams random_params(std::mt19937_64& rng, double h_scale, double j_scale) {
    std::uniform_real_distribution<double> a(0.1, 0.9);
    std::uniform_real_distribution<double> uh(-h_scale, h_scale);
    std::uniform_real_distribution<double> uj(-j_scale, j_scale);
    ModelParams p;
    p.alpha = a(rng);
    for (auto& v : p.h) v = uh(rng);
    for (auto& row : p.J) {
        for (auto& v : row) v = uj(rng);
    }
    return p;
}

ModelParams symmetric_random_params(std::mt19937_64& rng, double h_scale, double j_scale) {
    ModelParams p = random_params(rng, h_scale, j_scale);
    p.J = symmetrized(p.J);
    return p;
}

DimerDensities random_point(std::mt19937_64& rng, double alpha, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return cube_to_domain(u(rng), u(rng), u(rng), alpha);
}

Vec3 random_valid_h(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> gap(0.5, 3.0);
    const double ha = u(rng), hb = u(rng);
    return {ha, hb, (ha + hb - gap(rng)) / 2};
}

} // namespace

TEST_SUITE("model-core") {
    TEST_CASE("Z_N >= 1") {
        std::mt19937_64 rng(101);
        for (int trial = 0; trial < 30; ++trial) {
            const ModelParams p = random_params(rng, 3.0, 3.0);
            for (int n : {2, 3, 7, 20, 60}) CHECK(log_partition_exact(n, p) >= 0.0);
        }
    }

    TEST_CASE("hard-core closure by rejection count") {
        for (int n : {2, 5, 9, 16, 31}) {
            for (double a : {0.2, 0.5, 0.7}) {
                const PopulationSizes s = split_sizes(n, a);
                std::size_t count = 0;
                for (int da = 0; da <= n; ++da) {
                    for (int db = 0; db <= n; ++db) {
                        for (int dab = 0; dab <= n; ++dab) {
                            if (2 * da + dab <= s.n_a && 2 * db + dab <= s.n_b) ++count;
                        }
                    }
                }
                ModelParams p;
                p.alpha = a;
                CHECK(enumerate_gibbs(n, p).classes == count);
            }
        }
    }

    TEST_CASE("A/B swap symmetry") {
        std::mt19937_64 rng(103);
        for (int trial = 0; trial < 10; ++trial) {
            const ModelParams p = random_params(rng, 1.0, 2.0);
            const int perm[3] = {1, 0, 2};
            ModelParams q;
            q.alpha = 1.0 - p.alpha;
            for (int i = 0; i < 3; ++i) {
                q.h[i] = p.h[perm[i]];
                for (int j = 0; j < 3; ++j) q.J[i][j] = p.J[perm[i]][perm[j]];
            }
            for (int n : {4, 10, 30}) {
                const auto sp = split_sizes(n, p.alpha), sq = split_sizes(n, q.alpha);
                if (sp.n_a != sq.n_b) continue;
                CHECK(log_partition_exact(n, p) == doctest::Approx(log_partition_exact(n, q)).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("d log Z / d h_i = <D_i> and <D_i> increases with h_i") {
        std::mt19937_64 rng(107);
        const double step = 1e-5;
        for (int trial = 0; trial < 10; ++trial) {
            const ModelParams p = random_params(rng, 1.0, 1.0);
            const int n = 12;
            const Vec3 mean = gibbs_expected_densities(n, p);
            for (int i = 0; i < 3; ++i) {
                ModelParams lo = p, hi = p;
                lo.h[i] -= step;
                hi.h[i] += step;
                const double fd = (log_partition_exact(n, hi) - log_partition_exact(n, lo)) / (2 * step) / n;
                CHECK(std::fabs(fd - mean[i]) <= 1e-6 * std::max(mean[i], 1e-3));
                CHECK(gibbs_expected_densities(n, hi)[i] >= gibbs_expected_densities(n, lo)[i]);
            }
        }
    }
}

TEST_SUITE("variational") {
    TEST_CASE("p >= 0") {
        std::mt19937_64 rng(201);
        for (int trial = 0; trial < 10; ++trial) {
            MaximizeOptions mo;
            mo.grid = 24;
            CHECK(pressure(random_params(rng, 5.0, 5.0), mo) >= 0.0);
        }
    }

    TEST_CASE("entropy is concave") {
        std::mt19937_64 rng(203);
        std::uniform_real_distribution<double> ut(0.0, 1.0);
        for (int trial = 0; trial < 2000; ++trial) {
            const double a = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
            const DimerDensities x = random_point(rng, a), y = random_point(rng, a);
            const double t = ut(rng);
            const DimerDensities m{t * x.a + (1 - t) * y.a, t * x.b + (1 - t) * y.b, t * x.ab + (1 - t) * y.ab};
            CHECK(entropy(m, a) >= t * entropy(x, a) + (1 - t) * entropy(y, a) - 1e-12);
        }
    }

    TEST_CASE("stationarity and fixed points") {
        std::mt19937_64 rng(205);
        for (int trial = 0; trial < 8; ++trial) {
            const ModelParams p = random_params(rng, 1.5, 3.0);
            for (const auto& m : maximize_psi(p)) {
                if (m.interior) CHECK(fixed_point_residual(m.d, p) < 1e-10);
            }
            const DimerDensities d = fixed_point_solve(p, random_point(rng, p.alpha, 0.1, 0.9));
            if (is_interior(d, p.alpha)) CHECK(norm2(grad_psi(d, p)) < 1e-8);
        }
    }

    TEST_CASE("J = 0 fixed point is unique") {
        std::mt19937_64 rng(207);
        for (int set = 0; set < 3; ++set) {
            ModelParams p = random_params(rng, 2.0, 0.0);
            p.J = zero_matrix();
            const DimerDensities ref = solve_zero_coupling(p.h, p.alpha);
            for (int trial = 0; trial < 100; ++trial) {
                const DimerDensities d = fixed_point_solve(p, random_point(rng, p.alpha));
                CHECK(std::fabs(d.a - ref.a) < 1e-10);
                CHECK(std::fabs(d.b - ref.b) < 1e-10);
                CHECK(std::fabs(d.ab - ref.ab) < 1e-10);
            }
        }
    }

    TEST_CASE("enumeration converges at rate log N / N") {
        std::mt19937_64 rng(209);
        const std::vector<int> sizes{50, 100, 200, 400, 800};
        for (int trial = 0; trial < 10; ++trial) {
            const ModelParams p = symmetric_random_params(rng, 1.0, 1.0);
            const double pr = pressure(p);
            std::vector<double> c;
            for (int n : sizes) {
                const double gap = std::fabs(log_partition_exact(n, p) / n - pr);
                c.push_back(gap * n / std::log(double(n)));
            }
            const double c0 = *std::max_element(c.begin(), c.begin() + 3);
            for (double v : c) CHECK(v <= 1.5 * c0 + 1e-12);
            CHECK(c.back() < 0.1);
        }
    }

    TEST_CASE("grad_psi matches finite differences") {
        std::mt19937_64 rng(211);
        for (int trial = 0; trial < 20; ++trial) {
            const ModelParams p = random_params(rng, 2.0, 2.0);
            const DimerDensities d = random_point(rng, p.alpha, 0.05, 0.95);
            const Vec3 g = grad_psi(d, p);
            const double step = 1e-6;
            for (int i = 0; i < 3; ++i) {
                Vec3 lo = d.as_vector(), hi = d.as_vector();
                lo[i] -= step;
                hi[i] += step;
                const double fd =
                    (psi(DimerDensities::from_vector(hi), p) - psi(DimerDensities::from_vector(lo), p)) / (2 * step);
                CHECK(std::fabs(fd - g[i]) <= 1e-6 * std::max(1.0, std::fabs(g[i])));
            }
        }
    }
}

TEST_SUITE("critical") {
    TEST_CASE("3D maximizer agrees with the 1D reduction") {
        std::mt19937_64 rng(301);
        int compared = 0;
        while (compared < 20) {
            ReducedParams rp;
            rp.alpha = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
            rp.h = std::uniform_real_distribution<double>(-3.0, 1.0)(rng);
            rp.J = std::uniform_real_distribution<double>(0.1, 12.0)(rng);
            const auto br = solve_branches(rp);
            const auto globals = std::count_if(br.begin(), br.end(),
                                               [](const BranchSolution& b) { return b.stability == Stability::GlobalMax; });
            if (globals != 1) continue;
            const BranchSolution best =
                *std::find_if(br.begin(), br.end(), [](const BranchSolution& b) { return b.stability == Stability::GlobalMax; });
            const auto mx = maximize_psi(rp.to_model());
            REQUIRE(mx.size() == 1);
            CHECK(std::fabs(mx[0].d.ab - best.d) < 1e-8);
            const DimerDensities r = reduced_densities(best.d, rp.alpha);
            CHECK(std::fabs(mx[0].d.a - r.a) < 1e-8);
            CHECK(std::fabs(mx[0].d.b - r.b) < 1e-8);
            ++compared;
        }
    }

    TEST_CASE("f'' changes sign exactly once") {
        for (double a : {1e-4, 1e-3, 1e-2, 0.1, 0.3}) {
            int changes = 0;
            double prev = f_alpha_derivatives(a * 1e-6, a).d2;
            const int grid = 100000;
            for (int i = 1; i <= grid; ++i) {
                const double t = double(i) / grid;
                const double d = a * (1e-6 + (1 - 2e-6) * t);
                const double cur = f_alpha_derivatives(d, a).d2;
                if ((cur > 0) != (prev > 0)) ++changes;
                prev = cur;
            }
            CHECK_MESSAGE(changes == 1, "alpha = " << a);
        }
    }

    TEST_CASE("critical-point expansion residuals are bounded") {
        const double h0 = -2.0 - std::log((std::sqrt(5.0) - 1.0) / 2.0);
        std::vector<double> rd, rj, rh;
        for (double a : {1e-2, 3e-3, 1e-3}) {
            const CriticalPoint cp = critical_point(a);
            rd.push_back(std::fabs(cp.d_c - a / 2) / (a * a * a));
            rj.push_back(std::fabs(cp.J_c - 4 / a) / a);
            rh.push_back(std::fabs(cp.h_c - h0) / a);
        }
        for (const auto& [name, r] : std::vector<std::pair<std::string, std::vector<double>>>{
                 {"|d_c - a/2| / a^3", rd}, {"|J_c - 4/a| / a", rj}, {"|h_c - h_c(0)| / a", rh}}) {
            const double spread = *std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end());
            CHECK_MESSAGE(spread < 2.0, name << " at a = 1e-2, 3e-3, 1e-3: " << r[0] << ", " << r[1] << ", " << r[2]);
            CHECK_MESSAGE(r.back() <= 5.0, name << " at a = 1e-3: " << r.back());
        }
    }

    TEST_CASE("J_c - 4/alpha tends to a constant") {
        std::vector<double> diffs;
        for (double a : {1e-2, 3e-3, 1e-3, 3e-4}) diffs.push_back(critical_point(a).J_c - 4 / a);
        for (std::size_t i = 1; i < diffs.size(); ++i) CHECK(std::fabs(diffs[i] - diffs[i - 1]) < 0.02);
    }

    TEST_CASE("fourth derivative is the first nonzero one") {
        for (double a : {1e-3, 1e-2, 0.1, 0.5}) {
            const CriticalPoint cp = critical_point(a);
            const Psi1Derivatives p = psi1_derivatives(cp.d_c, {a, cp.h_c, cp.J_c});
            const double s = cp.d_c;
            CHECK(std::fabs(p.d1) < 1e-6);
            CHECK(std::fabs(p.d2) * s < 1e-6);
            CHECK(std::fabs(p.d3) * s * s < 1e-6);
            CHECK(p.d4 < 0.0);
        }
    }

    TEST_CASE("one branch below J_c") {
        for (double a : {1e-3, 0.05, 0.3}) {
            const CriticalPoint cp = critical_point(a);
            for (double frac : {0.1, 0.5, 0.9, 0.999}) {
                for (int i = 0; i <= 200; ++i) {
                    const double h = cp.h_c - 20 + 40.0 * i / 200;
                    CHECK(solve_branches({a, h, frac * cp.J_c}).size() == 1);
                }
            }
        }
    }
}

TEST_SUITE("gaussian") {
    TEST_CASE("Wick identity for N <= 40") {
        std::mt19937_64 rng(401);
        for (int trial = 0; trial < 10; ++trial) {
            ModelParams p;
            p.alpha = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
            p.h = random_valid_h(rng);
            for (int n = 2; n <= 40; ++n) {
                const double rel = std::expm1(z_via_gaussian(n, p.alpha, p.h).log_value - log_partition_exact(n, p));
                CHECK_MESSAGE(std::fabs(rel) < 1e-6, "N = " << n);
            }
        }
    }

    TEST_CASE("super-additivity on random decompositions") {
        std::mt19937_64 rng(403);
        std::uniform_int_distribution<int> un(1, 60);
        for (int trial = 0; trial < 50; ++trial) {
            const int n1 = un(rng), n2 = un(rng);
            const double a = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
            CHECK(superadditivity_check(n1, n2, a, random_valid_h(rng)).holds);
        }
    }

    TEST_CASE("(1/N) log Z*_N is nondecreasing along powers of two") {
        for (const auto& [a, h] : std::vector<std::pair<double, Vec3>>{{0.5, {0, 0, -1}}, {0.3, {0.4, -0.5, -0.6}}}) {
            double prev = -INFINITY;
            for (int k = 0; k <= 7; ++k) {
                const int n = 1 << k;
                const double v = z_star(n, a, h).log_value / n;
                CHECK(v >= prev - 1e-12);
                prev = v;
            }
        }
    }

    TEST_CASE("finite-N pressures approach p") {
        ModelParams p;
        p.h = {0, 0, -1};
        const double pr = pressure(p);
        double prev_gap = INFINITY;
        for (int n : {32, 64, 128}) {
            const double gap = std::fabs(log_partition_exact(n, p) / n - pr);
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
        CHECK(prev_gap < 0.02);
        double sup = -INFINITY;
        for (int n = 1; n <= 128; n *= 2) sup = std::max(sup, z_star(n, p.alpha, p.h).log_value / n);
        CHECK(std::fabs(sup - pr) < 0.02);
    }

    TEST_CASE("inequality lemma: equality exactly when x = y") {
        std::mt19937_64 rng(405);
        std::uniform_real_distribution<double> ux(-0.999, 5.0);
        std::uniform_real_distribution<double> ug(0.01, 0.99);
        for (int trial = 0; trial < 5000; ++trial) {
            const double x = ux(rng), g = ug(rng);
            const double y = trial % 2 == 0 ? x : ux(rng);
            const double gap = mixing_inequality_gap(x, y, g);
            CHECK(gap > -1e-12);
            if (std::fabs(x - y) < 1e-9) {
                CHECK(std::fabs(gap) < 1e-12);
            } else if (std::fabs(x - y) > 1e-3) {
                CHECK(std::fabs(gap) >= 1e-12);
            }
        }
        const MixingReport r = mixing_lemma_checks(2000, 77);
        CHECK(r.passed);
        CHECK(r.max_covariance_error < 1e-14);
    }
}
