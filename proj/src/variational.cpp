#include "mdm/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include <boost/math/tools/roots.hpp>

#include "mdm/errors.hpp"

namespace mdm {

MonomerDensities monomer_densities(const DimerDensities& d, double alpha) {
    return {alpha - 2.0 * d.a - d.ab, 1.0 - alpha - 2.0 * d.b - d.ab};
}

bool in_domain(const DimerDensities& d, double alpha, double tol) {
    const MonomerDensities m = monomer_densities(d, alpha);
    return d.a >= -tol && d.b >= -tol && d.ab >= -tol && m.a >= -tol && m.b >= -tol;
}

bool is_interior(const DimerDensities& d, double alpha) {
    const MonomerDensities m = monomer_densities(d, alpha);
    return d.a > 0.0 && d.b > 0.0 && d.ab > 0.0 && m.a > 0.0 && m.b > 0.0;
}

double log_gamma_fn(double x) {
    if (x < 0.0 || std::isnan(x)) {
        throw ValidationError("log_gamma_fn needs x >= 0, got " + std::to_string(x));
    }
    if (x == 0.0) return 0.0;
    return x * std::log(x) - x;
}

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

// Round-off on the boundary of Omega_alpha can leave -1e-17 style values.
double clamp_nonneg(double x) { return x < 0.0 ? 0.0 : x; }

} // namespace

double entropy(const DimerDensities& d, double alpha) {
    require_alpha(alpha);
    if (!in_domain(d, alpha)) throw ValidationError("density vector lies outside Omega_alpha");
    const MonomerDensities m = monomer_densities(d, alpha);
    return log_gamma_fn(alpha) + log_gamma_fn(1.0 - alpha) - log_gamma_fn(clamp_nonneg(m.a)) -
           log_gamma_fn(clamp_nonneg(m.b)) - log_gamma_fn(clamp_nonneg(d.a)) -
           log_gamma_fn(clamp_nonneg(d.b)) - log_gamma_fn(clamp_nonneg(d.ab)) -
           (d.a + d.b) * std::log(2.0);
}

double energy(const DimerDensities& d, const ModelParams& params) {
    const Vec3 v = d.as_vector();
    return -dot(params.h, v) - 0.5 * dot(matvec(params.J, v), v);
}

double psi(const DimerDensities& d, const ModelParams& params) {
    return entropy(d, params.alpha) - energy(d, params);
}

Vec3 grad_psi(const DimerDensities& d, const ModelParams& params) {
    require_alpha(params.alpha);
    if (!is_interior(d, params.alpha)) {
        throw ValidationError("grad_psi needs an interior point of Omega_alpha");
    }
    const MonomerDensities m = monomer_densities(d, params.alpha);
    const Vec3 field = matvec(symmetrized(params.J), d.as_vector());
    return {
        std::log(m.a * m.a / (2.0 * d.a)) + params.h[kA] + field[kA],
        std::log(m.b * m.b / (2.0 * d.b)) + params.h[kB] + field[kB],
        std::log(m.a * m.b / d.ab) + params.h[kAB] + field[kAB],
    };
}

EffectiveWeights effective_weights(const DimerDensities& d, const ModelParams& params) {
    const Vec3 field = matvec(symmetrized(params.J), d.as_vector());
    return {std::exp(params.h[kA] + field[kA]), std::exp(params.h[kB] + field[kB]),
            std::exp(params.h[kAB] + field[kAB])};
}

DimerDensities solve_zero_coupling(const Vec3& h, double alpha) {
    require_alpha(alpha);
    for (double v : h) {
        if (!std::isfinite(v)) throw ValidationError("h has a non-finite entry");
    }
    const double w_a = std::exp(h[kA]);
    const double w_b = std::exp(h[kB]);
    const double w_ab = std::exp(h[kAB]);

    // For fixed m_B the A hard-core identity alpha = m_A + w_A m_A^2 + w_AB m_A m_B is a
    // quadratic in m_A; its positive root decreases in m_B, and the B identity
    // then becomes strictly increasing in m_B.
    auto m_a_of = [&](double m_b) {
        const double b = 1.0 + w_ab * m_b;
        return 2.0 * alpha / (b + std::sqrt(b * b + 4.0 * w_a * alpha));
    };
    auto b_identity = [&](double m_b) {
        return m_b + w_b * m_b * m_b + w_ab * m_a_of(m_b) * m_b - (1.0 - alpha);
    };

    const double hi = 1.0 - alpha;
    const double f_lo = b_identity(0.0);
    const double f_hi = b_identity(hi);
    std::uintmax_t max_iter = 500;
    const auto tol = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 2);
    const auto [lo_b, hi_b] =
        boost::math::tools::toms748_solve(b_identity, 0.0, hi, f_lo, f_hi, tol, max_iter);
    if (max_iter >= 500) throw NumericalError("solve_zero_coupling: root finder did not converge");

    const double m_b = 0.5 * (lo_b + hi_b);
    const double m_a = m_a_of(m_b);
    return {0.5 * w_a * m_a * m_a, 0.5 * w_b * m_b * m_b, w_ab * m_a * m_b};
}

double fixed_point_residual(const DimerDensities& d, const ModelParams& params) {
    const EffectiveWeights w = effective_weights(d, params);
    const MonomerDensities m = monomer_densities(d, params.alpha);
    return std::max({std::fabs(d.a - 0.5 * w.a * m.a * m.a), std::fabs(d.b - 0.5 * w.b * m.b * m.b),
                     std::fabs(d.ab - w.ab * m.a * m.b)});
}

namespace {

bool zero_coupling(const Mat3& J) {
    for (const auto& row : J) {
        for (double v : row) {
            if (v != 0.0) return false;
        }
    }
    return true;
}

// Largest componentwise gap relative to the component size, so tiny densities
// are resolved as accurately as O(1) ones.
double relative_gap(const Vec3& next, const Vec3& cur) {
    double gap = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double scale = std::max(std::fabs(next[i]), std::numeric_limits<double>::min());
        gap = std::max(gap, std::fabs(next[i] - cur[i]) / scale);
    }
    return gap;
}

} // namespace

FixedPointResult fixed_point_iterate(const ModelParams& params, const DimerDensities& d0,
                                     const FixedPointOptions& opts) {
    params.validate();
    if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
        throw ValidationError("damping must lie in (0,1]");
    }
    if (!in_domain(d0, params.alpha)) throw ValidationError("initial point lies outside Omega_alpha");

    if (zero_coupling(params.J)) {
        return {solve_zero_coupling(params.h, params.alpha), 1, opts.damping};
    }

    const Mat3 js = symmetrized(params.J);
    Vec3 d = d0.as_vector();
    double lambda = opts.damping;
    double previous_gap = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iterations; ++it) {
        Vec3 field = matvec(js, d);
        for (int i = 0; i < 3; ++i) field[i] += params.h[i];
        const Vec3 g = solve_zero_coupling(field, params.alpha).as_vector();
        const double gap = relative_gap(g, d);
        if (gap < opts.tolerance) return {DimerDensities::from_vector(g), it, lambda};
        if (gap > previous_gap) lambda = std::max(0.5 * lambda, opts.min_damping);
        previous_gap = gap;
        for (int i = 0; i < 3; ++i) d[i] = (1.0 - lambda) * d[i] + lambda * g[i];
    }
    throw NumericalError("fixed_point_solve: no convergence after " +
                         std::to_string(opts.max_iterations) + " iterations");
}

DimerDensities fixed_point_solve(const ModelParams& params, const DimerDensities& d0,
                                 const FixedPointOptions& opts) {
    return fixed_point_iterate(params, d0, opts).d;
}

DimerDensities cube_to_domain(double u1, double u2, double u3, double alpha) {
    const double ab = u3 * std::min(alpha, 1.0 - alpha);
    return {0.5 * u1 * (alpha - ab), 0.5 * u2 * (1.0 - alpha - ab), ab};
}

std::vector<Maximizer> maximize_psi(const ModelParams& params, const MaximizeOptions& opts) {
    params.validate();
    if (opts.grid < 2) throw ValidationError("maximize_psi needs a grid of at least 2 intervals");

    const int n = opts.grid + 1;
    auto index = [n](int i, int j, int k) { return (static_cast<std::size_t>(i) * n + j) * n + k; };
    std::vector<double> values(static_cast<std::size_t>(n) * n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const DimerDensities d =
                    cube_to_domain(double(i) / opts.grid, double(j) / opts.grid, double(k) / opts.grid, params.alpha);
                values[index(i, j, k)] = psi(d, params);
            }
        }
    }

    struct Seed {
        double value;
        int i, j, k;
    };
    std::vector<Seed> seeds;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const double v = values[index(i, j, k)];
                bool local_max = true;
                for (int di = -1; di <= 1 && local_max; ++di) {
                    for (int dj = -1; dj <= 1 && local_max; ++dj) {
                        for (int dk = -1; dk <= 1; ++dk) {
                            const int a = i + di, b = j + dj, c = k + dk;
                            if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n) continue;
                            if (values[index(a, b, c)] > v) {
                                local_max = false;
                                break;
                            }
                        }
                    }
                }
                if (local_max) seeds.push_back({v, i, j, k});
            }
        }
    }
    std::stable_sort(seeds.begin(), seeds.end(), [](const Seed& x, const Seed& y) { return x.value > y.value; });
    if (seeds.size() > static_cast<std::size_t>(opts.max_seeds)) seeds.resize(opts.max_seeds);

    std::vector<Maximizer> candidates;
    for (const Seed& s : seeds) {
        const DimerDensities start =
            cube_to_domain(double(s.i) / opts.grid, double(s.j) / opts.grid, double(s.k) / opts.grid, params.alpha);
        candidates.push_back({start, s.value, is_interior(start, params.alpha)});
        try {
            const DimerDensities refined = fixed_point_solve(params, start, opts.fixed_point);
            candidates.push_back({refined, psi(refined, params), is_interior(refined, params.alpha)});
        } catch (const NumericalError&) {
            // the grid point stays as the candidate for this basin
        }
    }

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) best = std::max(best, c.value);

    std::vector<Maximizer> top;
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Maximizer& x, const Maximizer& y) { return x.value > y.value; });
    for (const auto& c : candidates) {
        if (c.value < best - opts.tie_tolerance) break;
        const bool duplicate = std::any_of(top.begin(), top.end(), [&](const Maximizer& t) {
            Vec3 diff = c.d.as_vector();
            const Vec3 other = t.d.as_vector();
            for (int i = 0; i < 3; ++i) diff[i] -= other[i];
            return norm2(diff) < opts.dedup_distance;
        });
        if (!duplicate) top.push_back(c);
    }
    std::sort(top.begin(), top.end(), [](const Maximizer& x, const Maximizer& y) {
        return std::tie(x.d.a, x.d.b, x.d.ab) < std::tie(y.d.a, y.d.b, y.d.ab);
    });
    return top;
}

double pressure(const ModelParams& params, const MaximizeOptions& opts) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : maximize_psi(params, opts)) best = std::max(best, m.value);
    return best;
}

} // namespace mdm
