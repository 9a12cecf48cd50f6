#include "mdm/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "mdm/errors.hpp"
#include "mdm/log_sum_exp.hpp"
#include "mdm/model.hpp"

namespace mdm {

std::array<double, 3> DimerWeightMatrix::cholesky() const {
    const double l11 = std::sqrt(w_a);
    const double l21 = w_ab / l11;
    return {l11, l21, std::sqrt(w_b - l21 * l21)};
}

double DimerWeightMatrix::inverse_quadratic_form(const Vec2& xi) const {
    return (w_b * xi[0] * xi[0] - 2.0 * w_ab * xi[0] * xi[1] + w_a * xi[1] * xi[1]) / determinant();
}

DimerWeightMatrix weight_matrix(const Vec3& h) {
    for (double v : h) {
        if (!std::isfinite(v)) throw ValidationError("h has a non-finite entry");
    }
    if (!(h[kA] + h[kB] > 2.0 * h[kAB])) {
        throw ValidationError("W is not positive definite: need h_A + h_B > 2 h_AB, got " +
                              std::to_string(h[kA] + h[kB]) + " <= " + std::to_string(2.0 * h[kAB]));
    }
    return {std::exp(h[kA]), std::exp(h[kB]), std::exp(h[kAB])};
}

double laplace_exponent(const Vec2& xi, double alpha, const DimerWeightMatrix& w) {
    if (xi[0] == -1.0 || xi[1] == -1.0) throw ValidationError("laplace_exponent is singular on xi = -1");
    return -0.5 * w.inverse_quadratic_form(xi) + alpha * std::log(std::fabs(1.0 + xi[0])) +
           (1.0 - alpha) * std::log(std::fabs(1.0 + xi[1]));
}

Vec2 laplace_gradient(const Vec2& xi, double alpha, const DimerWeightMatrix& w) {
    const double det = w.determinant();
    return {-(w.w_b * xi[0] - w.w_ab * xi[1]) / det + alpha / (1.0 + xi[0]),
            -(-w.w_ab * xi[0] + w.w_a * xi[1]) / det + (1.0 - alpha) / (1.0 + xi[1])};
}

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

// Damped Newton for the concave restriction of f to one sign region of (1+xi_A, 1+xi_B).
Vec2 maximize_in_region(double alpha, const DimerWeightMatrix& w, double s_a, double s_b) {
    auto inside = [&](const Vec2& p) { return s_a * (1.0 + p[0]) > 0.0 && s_b * (1.0 + p[1]) > 0.0; };
    Vec2 xi{s_a > 0 ? 0.0 : -2.0, s_b > 0 ? 0.0 : -2.0};
    const double det = w.determinant();
    for (int it = 0; it < 500; ++it) {
        const Vec2 g = laplace_gradient(xi, alpha, w);
        if (std::hypot(g[0], g[1]) < 1e-13) break;
        const double ca = alpha / ((1.0 + xi[0]) * (1.0 + xi[0]));
        const double cb = (1.0 - alpha) / ((1.0 + xi[1]) * (1.0 + xi[1]));
        // H = -(W^{-1} + diag(ca, cb)); solve (W^{-1} + diag) step = g.
        const double a11 = w.w_b / det + ca;
        const double a12 = -w.w_ab / det;
        const double a22 = w.w_a / det + cb;
        const double dm = a11 * a22 - a12 * a12;
        const Vec2 step{(a22 * g[0] - a12 * g[1]) / dm, (a11 * g[1] - a12 * g[0]) / dm};
        const double f0 = laplace_exponent(xi, alpha, w);
        double t = 1.0;
        Vec2 next{};
        for (int k = 0; k < 60; ++k, t *= 0.5) {
            next = {xi[0] + t * step[0], xi[1] + t * step[1]};
            if (inside(next) && laplace_exponent(next, alpha, w) >= f0 - 1e-15 * std::fabs(f0)) break;
        }
        if (!inside(next)) break;
        if (std::hypot(next[0] - xi[0], next[1] - xi[1]) < 1e-16) {
            xi = next;
            break;
        }
        xi = next;
    }
    return xi;
}

enum class Region { Full, Quadrant, Complement };

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

const Rule& gauss_legendre_16() {
    static const Rule rule = [] {
        using GL = boost::math::quadrature::gauss<double, 16>;
        Rule r;
        const auto& x = GL::abscissa();
        const auto& w = GL::weights();
        for (std::size_t i = x.size(); i-- > 0;) {
            if (x[i] == 0.0) continue;
            r.nodes.push_back(-x[i]);
            r.weights.push_back(w[i]);
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            r.nodes.push_back(x[i]);
            r.weights.push_back(w[i]);
        }
        return r;
    }();
    return rule;
}

// Composite Gauss-Legendre nodes (node, log weight) on [lo, hi].
void composite_nodes(double lo, double hi, int panels, std::vector<std::pair<double, double>>& out) {
    out.clear();
    if (!(hi > lo)) return;
    const Rule& rule = gauss_legendre_16();
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            out.emplace_back(mid + 0.5 * width * rule.nodes[i], std::log(0.5 * width * rule.weights[i]));
        }
    }
}

bool is_odd_integer(double e) { return std::fmod(e, 2.0) == 1.0; }

struct MomentProblem {
    double exp_a;  // exponent of (1 + xi_A)
    double exp_b;
    int n;
    DimerWeightMatrix w;
    Region region;
};

// Integral in whitened coordinates z (xi = L z / sqrt(n)) against the standard
// bivariate normal, accumulated in log space.
SignedLogSumExp integrate(const MomentProblem& pb, int panels, double half_width) {
    const auto [l11, l21, l22] = pb.w.cholesky();
    const double rn = std::sqrt(double(pb.n));

    // Box covering both the origin and the mode of the integrand.
    const double alpha_eff = pb.exp_a / (pb.exp_a + pb.exp_b);
    const Vec2 mode = maximize_in_region(alpha_eff, pb.w, 1.0, 1.0);
    const double mode_z1 = rn * mode[0] / l11;
    const double mode_z2 = (rn * mode[1] - l21 * mode_z1) / l22;
    const double lo1 = std::min(-half_width, mode_z1 - half_width);
    const double hi1 = std::max(half_width, mode_z1 + half_width);
    const double lo2 = std::min(-half_width, mode_z2 - half_width);
    const double hi2 = std::max(half_width, mode_z2 + half_width);

    // 1 + xi_A > 0 <=> z1 > edge1; 1 + xi_B > 0 <=> z2 > (-rn - l21 z1)/l22.
    const double edge1 = -rn / l11;
    const double log_norm = -std::log(2.0 * std::numbers::pi);

    SignedLogSumExp acc;
    std::vector<std::pair<double, double>> outer, inner;

    auto add_strip = [&](double a, double b, const std::function<std::pair<double, double>(double)>& inner_range) {
        composite_nodes(a, b, panels, outer);
        for (const auto& [z1, lw1] : outer) {
            const double base_a = 1.0 + l11 * z1 / rn;
            const auto [c, d] = inner_range(z1);
            composite_nodes(c, d, panels, inner);
            for (const auto& [z2, lw2] : inner) {
                const double base_b = 1.0 + (l21 * z1 + l22 * z2) / rn;
                double log_term = lw1 + lw2 + log_norm - 0.5 * (z1 * z1 + z2 * z2);
                double sign = 1.0;
                if (pb.exp_a != 0.0) {
                    log_term += pb.exp_a * std::log(std::fabs(base_a));
                    if (base_a < 0.0 && is_odd_integer(pb.exp_a)) sign = -sign;
                }
                if (pb.exp_b != 0.0) {
                    log_term += pb.exp_b * std::log(std::fabs(base_b));
                    if (base_b < 0.0 && is_odd_integer(pb.exp_b)) sign = -sign;
                }
                acc.add(log_term, sign);
            }
        }
    };

    auto b_edge = [&](double z1) { return (-rn - l21 * z1) / l22; };
    switch (pb.region) {
    case Region::Full:
        // The inner integrand is polynomial times Gaussian: no kinks, one strip.
        add_strip(lo1, hi1, [&](double) { return std::make_pair(lo2, hi2); });
        break;
    case Region::Quadrant:
        add_strip(std::max(lo1, edge1), hi1,
                  [&](double z1) { return std::make_pair(std::max(lo2, b_edge(z1)), hi2); });
        break;
    case Region::Complement:
        add_strip(lo1, std::min(edge1, hi1), [&](double) { return std::make_pair(lo2, hi2); });
        add_strip(std::max(lo1, edge1), hi1,
                  [&](double z1) { return std::make_pair(lo2, std::min(hi2, b_edge(z1))); });
        break;
    }
    return acc;
}

GaussEstimate quadrature_estimate(const MomentProblem& pb, const GaussOptions& opts) {
    if (opts.panels < 2) throw ValidationError("quadrature needs at least 2 panels");
    const SignedLogSumExp fine = integrate(pb, opts.panels, opts.box_half_width);
    const SignedLogSumExp coarse = integrate(pb, opts.panels / 2, opts.box_half_width);
    if (!fine.positive() || !coarse.positive()) {
        throw NumericalError("Gaussian moment quadrature produced a non-positive value");
    }
    return {fine.log_value(), std::fabs(fine.log_value() - coarse.log_value())};
}

GaussEstimate monte_carlo_estimate(const MomentProblem& pb, const GaussOptions& opts) {
    if (opts.samples < 2) throw ValidationError("Monte Carlo needs at least 2 samples");
    const auto [l11, l21, l22] = pb.w.cholesky();
    const double rn = std::sqrt(double(pb.n));
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 1; i <= opts.samples; ++i) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        const double a = 1.0 + l11 * z1 / rn;
        const double b = 1.0 + (l21 * z1 + l22 * z2) / rn;
        double value = 0.0;
        if (pb.region == Region::Full || (a > 0.0 && b > 0.0)) {
            value = std::pow(a, pb.exp_a) * std::pow(b, pb.exp_b);
        }
        const double delta = value - mean;
        mean += delta / double(i);
        m2 += delta * (value - mean);
    }
    if (!(mean > 0.0)) throw NumericalError("Monte Carlo estimate of the Gaussian moment is not positive");
    const double se = std::sqrt(m2 / double(opts.samples - 1) / double(opts.samples));
    return {std::log(mean), se / mean};
}

GaussEstimate estimate(const MomentProblem& pb, const GaussOptions& opts) {
    return opts.method == GaussMethod::Quadrature ? quadrature_estimate(pb, opts)
                                                  : monte_carlo_estimate(pb, opts);
}

void check_cap(int n, const GaussOptions& opts) {
    if (n > opts.max_n) {
        throw ValidationError("N=" + std::to_string(n) + " exceeds the Gaussian moment cap " +
                              std::to_string(opts.max_n));
    }
}

} // namespace

GaussEstimate z_via_gaussian(int n, double alpha, const Vec3& h, const GaussOptions& opts) {
    const PopulationSizes sizes = split_sizes(n, alpha);
    check_cap(n, opts);
    return estimate({double(sizes.n_a), double(sizes.n_b), n, weight_matrix(h), Region::Full}, opts);
}

GaussEstimate z_star(int n, double alpha, const Vec3& h, const GaussOptions& opts) {
    require_alpha(alpha);
    if (n < 1) throw ValidationError("z_star needs N >= 1");
    check_cap(n, opts);
    return estimate({alpha * n, (1.0 - alpha) * n, n, weight_matrix(h), Region::Quadrant}, opts);
}

double off_quadrant_moment(int n, double alpha, const Vec3& h, const GaussOptions& opts) {
    const PopulationSizes sizes = split_sizes(n, alpha);
    check_cap(n, opts);
    const SignedLogSumExp acc = integrate(
        {double(sizes.n_a), double(sizes.n_b), n, weight_matrix(h), Region::Complement}, opts.panels,
        opts.box_half_width);
    return acc.value();
}

LaplaceMaximum laplace_maximum(double alpha, const DimerWeightMatrix& w) {
    require_alpha(alpha);
    if (!(w.determinant() > 0.0)) throw ValidationError("W must be positive definite");
    static constexpr std::array<std::array<double, 2>, 4> signs{{{1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
    LaplaceMaximum out;
    for (std::size_t r = 0; r < signs.size(); ++r) {
        const Vec2 xi = maximize_in_region(alpha, w, signs[r][0], signs[r][1]);
        out.region_values[r] = laplace_exponent(xi, alpha, w);
        if (r == 0) {
            out.xi = xi;
            out.value = out.region_values[0];
            const Vec2 g = laplace_gradient(xi, alpha, w);
            out.gradient_norm = std::hypot(g[0], g[1]);
        }
    }
    out.in_positive_quadrant = out.xi[0] >= 0.0 && out.xi[1] >= 0.0;
    out.dominates_other_regions = std::all_of(out.region_values.begin() + 1, out.region_values.end(),
                                              [&](double v) { return v < out.value; });
    return out;
}

SuperadditivityResult superadditivity_check(int n1, int n2, double alpha, const Vec3& h,
                                            const GaussOptions& opts) {
    SuperadditivityResult r;
    r.lhs = z_star(n1, alpha, h, opts).log_value + z_star(n2, alpha, h, opts).log_value;
    r.rhs = z_star(n1 + n2, alpha, h, opts).log_value;
    r.holds = r.lhs <= r.rhs + 1e-9;
    return r;
}

double mixing_inequality_gap(double x, double y, double g) {
    if (!(x > -1.0 && y > -1.0 && g > 0.0 && g < 1.0)) {
        throw ValidationError("mixing inequality needs x, y > -1 and 0 < gamma < 1");
    }
    return 1.0 + g * x + (1.0 - g) * y - std::exp(g * std::log1p(x) + (1.0 - g) * std::log1p(y));
}

double covariance_identity_error(int n1, int n2, const DimerWeightMatrix& w) {
    if (n1 < 1 || n2 < 1) throw ValidationError("covariance identity needs N1, N2 >= 1");
    const double n = double(n1) + double(n2);
    const double g = double(n1) / n;
    double worst = 0.0;
    for (double entry : {w.w_a, w.w_b, w.w_ab}) {
        const double lhs = g * g * entry / n1 + (1.0 - g) * (1.0 - g) * entry / n2;
        const double rhs = entry / n;
        worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
    }
    return worst;
}

MixingReport mixing_lemma_checks(int trials, std::uint64_t seed) {
    if (trials < 1) throw ValidationError("mixing_lemma_checks needs at least one trial");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> sizes(1, 1000);
    std::uniform_real_distribution<double> field(-2.0, 2.0);
    std::uniform_real_distribution<double> margin(0.01, 3.0);
    std::uniform_real_distribution<double> base(-0.999, 10.0);
    std::uniform_real_distribution<double> ratio(0.001, 0.999);

    MixingReport rep;
    rep.trials = trials;
    rep.min_inequality_gap = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        const double ha = field(rng), hb = field(rng);
        const DimerWeightMatrix w = weight_matrix({ha, hb, 0.5 * (ha + hb) - margin(rng)});
        rep.max_covariance_error = std::max(rep.max_covariance_error, covariance_identity_error(sizes(rng), sizes(rng), w));

        const double g = ratio(rng);
        const double x = base(rng);
        const bool equal_case = (t % 2 == 0);
        double y = x;
        if (!equal_case) {
            do {
                y = base(rng);
            } while (std::fabs(x - y) < 1e-3);
        }
        const double gap = mixing_inequality_gap(x, y, g);
        rep.min_inequality_gap = std::min(rep.min_inequality_gap, gap);
        if (equal_case) ++rep.equality_trials;
        const bool tight = std::fabs(gap) < 1e-12;
        if (tight != (std::fabs(x - y) < 1e-9)) rep.equality_iff_equal = false;
    }
    rep.passed = rep.max_covariance_error < 1e-14 && rep.min_inequality_gap > -1e-12 && rep.equality_iff_equal;
    return rep;
}

} // namespace mdm
