#include "mdm/critical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include <boost/math/tools/roots.hpp>

#include "mdm/errors.hpp"

namespace mdm {

namespace {

constexpr int kRootDigits = std::numeric_limits<double>::digits - 2;

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha));
    }
}

// Upper end of the reduced curve, where x_alpha or y_alpha reaches 0.
double d_max(double alpha) { return std::min(alpha, 1.0 - alpha); }

// Positive root of z^2 + z - u = 0 without cancellation for small u.
double positive_quadratic_root(double u) { return 2.0 * u / (1.0 + std::sqrt(1.0 + 4.0 * u)); }

struct LogDerivs {
    double l1, l2, l3;
};

// Derivatives in d of log z(d) where z^2 + z = u(d), u' = -1, S = 2z + 1.
LogDerivs log_root_derivatives(double z) {
    const double s = 2.0 * z + 1.0;
    const double z1 = -1.0 / s;
    const double z2 = -2.0 / (s * s * s);
    const double z3 = -12.0 / (s * s * s * s * s);
    const double r1 = z1 / z;
    return {r1, z2 / z - r1 * r1, z3 / z - 3.0 * z1 * z2 / (z * z) + 2.0 * r1 * r1 * r1};
}

template <class F>
double bracketed_root(F&& fn, double lo, double hi, double f_lo, double f_hi, const char* what) {
    std::uintmax_t max_iter = 300;
    const auto [a, b] = boost::math::tools::toms748_solve(
        fn, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(kRootDigits), max_iter);
    if (max_iter >= 300) throw NumericalError(std::string(what) + ": root finder did not converge");
    return 0.5 * (a + b);
}

} // namespace

void ReducedParams::validate() const {
    require_alpha(alpha);
    if (!std::isfinite(h)) throw ValidationError("h must be finite");
    if (!(J > 0.0) || !std::isfinite(J)) throw ValidationError("J must be a finite positive coupling");
}

ModelParams ReducedParams::to_model() const {
    ModelParams p;
    p.alpha = alpha;
    p.h = {0.0, 0.0, h};
    p.J[kAB][kAB] = J;
    return p;
}

const char* to_string(Stability s) {
    switch (s) {
    case Stability::GlobalMax: return "global-max";
    case Stability::LocalMax: return "local-max";
    case Stability::Unstable: return "unstable";
    }
    return "unknown";
}

double x_alpha(double d, double alpha) {
    require_alpha(alpha);
    if (!(d >= 0.0 && d <= alpha)) throw ValidationError("x_alpha needs 0 <= d <= alpha");
    return positive_quadratic_root(alpha - d);
}

double y_alpha(double d, double alpha) {
    require_alpha(alpha);
    if (!(d >= 0.0 && d <= 1.0 - alpha)) throw ValidationError("y_alpha needs 0 <= d <= 1 - alpha");
    return positive_quadratic_root(1.0 - alpha - d);
}

DimerDensities reduced_densities(double d, double alpha) {
    const double x = x_alpha(d, alpha);
    const double y = y_alpha(d, alpha);
    return {0.5 * x * x, 0.5 * y * y, d};
}

double psi1(double d, const ReducedParams& rp) {
    return psi(reduced_densities(d, rp.alpha), rp.to_model());
}

FAlpha f_alpha_derivatives(double d, double alpha) {
    require_alpha(alpha);
    if (!(d > 0.0 && d < d_max(alpha))) throw ValidationError("f_alpha needs 0 < d < min(alpha, 1 - alpha)");
    const double x = x_alpha(d, alpha);
    const double y = y_alpha(d, alpha);
    const LogDerivs lx = log_root_derivatives(x);
    const LogDerivs ly = log_root_derivatives(y);
    return {
        std::log(d) - std::log(x) - std::log(y),
        1.0 / d - lx.l1 - ly.l1,
        -1.0 / (d * d) - lx.l2 - ly.l2,
        2.0 / (d * d * d) - lx.l3 - ly.l3,
    };
}

double f_alpha(double d, double alpha) { return f_alpha_derivatives(d, alpha).f; }

Psi1Derivatives psi1_derivatives(double d, const ReducedParams& rp) {
    const FAlpha f = f_alpha_derivatives(d, rp.alpha);
    return {rp.h + rp.J * d - f.f, rp.J - f.d1, -f.d2, -f.d3};
}

CriticalPoint critical_point(double alpha) {
    require_alpha(alpha);
    const double top = d_max(alpha);
    double lo = top * 1e-12;
    double hi = top * (1.0 - 1e-12);
    if (!(f_alpha_derivatives(lo, alpha).d2 < 0.0 && f_alpha_derivatives(hi, alpha).d2 > 0.0)) {
        throw NumericalError("critical_point: f'' does not change sign on the reduced curve");
    }
    // Coarse bisection, then Newton on f'' with f''' inside the bracket.
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f_alpha_derivatives(mid, alpha).d2 < 0.0 ? lo : hi) = mid;
    }
    std::uintmax_t max_iter = 200;
    const double d_c = boost::math::tools::newton_raphson_iterate(
        [alpha](double d) {
            const FAlpha f = f_alpha_derivatives(d, alpha);
            return std::make_tuple(f.d2, f.d3);
        },
        0.5 * (lo + hi), lo, hi, kRootDigits, max_iter);
    const FAlpha f = f_alpha_derivatives(d_c, alpha);
    return {d_c, f.f - f.d1 * d_c, f.d1};
}

std::vector<BranchSolution> solve_branches(const ReducedParams& rp, const BranchOptions& opts) {
    rp.validate();
    const double alpha = rp.alpha;
    const double top = d_max(alpha);
    auto r = [&](double d) { return f_alpha(d, alpha) - rp.h - rp.J * d; };
    auto slope = [&](double d) { return f_alpha_derivatives(d, alpha).d1 - rp.J; };

    // r' = f' - J; f' has a single minimum J_c at d_c, so r is monotone on at most
    // three pieces separated by the roots of f' = J.
    const CriticalPoint cp = critical_point(alpha);
    std::vector<double> cuts;
    if (rp.J > cp.J_c) {
        const double lo = top * 1e-15;
        const double hi = top * (1.0 - 1e-15);
        if (slope(lo) > 0.0) cuts.push_back(bracketed_root(slope, lo, cp.d_c, slope(lo), slope(cp.d_c), "solve_branches"));
        if (slope(hi) > 0.0) cuts.push_back(bracketed_root(slope, cp.d_c, hi, slope(cp.d_c), slope(hi), "solve_branches"));
    }

    struct Root {
        double d;
        bool maximum;  // r crosses from - to +, i.e. psi1' from + to -
    };
    std::vector<Root> roots;

    std::vector<double> edges{0.0};
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    edges.push_back(top);
    for (std::size_t piece = 0; piece + 1 < edges.size(); ++piece) {
        const bool increasing = (piece % 2 == 0);
        double a = edges[piece];
        double b = edges[piece + 1];
        // Replace the open ends 0 and top by points where r has its limiting sign.
        if (a == 0.0) {
            a = b * 0.5;
            while (r(a) >= 0.0 && a > std::numeric_limits<double>::min()) a *= 0.5;
        }
        if (b == top) {
            double gap = (top - a) * 0.5;
            b = top - gap;
            while (r(b) <= 0.0) {
                gap *= 0.5;
                const double next = top - gap;
                if (next == b || next >= top) {
                    throw NumericalError("solve_branches: root lies closer to the end of the curve than double precision resolves");
                }
                b = next;
            }
        }
        const double ra = r(a);
        const double rb = r(b);
        const bool sign_change = increasing ? (ra <= 0.0 && rb >= 0.0) : (ra >= 0.0 && rb <= 0.0);
        if (!sign_change) continue;
        double root;
        if (ra == 0.0) {
            root = a;
        } else if (rb == 0.0) {
            root = b;
        } else {
            root = bracketed_root(r, a, b, ra, rb, "solve_branches");
        }
        roots.push_back({root, increasing});
    }

    // Near the critical point round-off can split one root into a tight cluster.
    std::vector<Root> merged;
    for (const Root& x : roots) {
        if (!merged.empty() && x.d - merged.back().d < opts.merge_fraction * top) {
            merged.back().d = 0.5 * (merged.back().d + x.d);
            merged.back().maximum = merged.back().maximum || x.maximum;
        } else {
            merged.push_back(x);
        }
    }

    std::vector<BranchSolution> out;
    double best = -std::numeric_limits<double>::infinity();
    for (const Root& x : merged) {
        BranchSolution s{x.d, psi1(x.d, rp), x.maximum ? Stability::LocalMax : Stability::Unstable};
        if (x.maximum) best = std::max(best, s.psi1_value);
        out.push_back(s);
    }
    for (auto& s : out) {
        if (s.stability == Stability::LocalMax && s.psi1_value >= best - opts.tie_tolerance) {
            s.stability = Stability::GlobalMax;
        }
    }
    return out;
}

BranchSolution upper_branch(const std::vector<BranchSolution>& branches) {
    for (auto it = branches.rbegin(); it != branches.rend(); ++it) {
        if (it->stability != Stability::Unstable) return *it;
    }
    throw NumericalError("no stable branch found");
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ValidationError("fit_power_law needs at least two (x, y) pairs of equal length");
    }
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw NumericalError("fit_power_law: non-positive data");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw ValidationError("fit_power_law: x values are all equal");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    return {slope, std::exp(intercept)};
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi >= lo) || n < 1) throw ValidationError("log_spaced needs 0 < lo <= hi and n >= 1");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) out[i] = lo * std::exp(step * i);
    out.back() = hi;
    return out;
}

ExponentScan exponent_scan(double alpha, std::span<const double> offsets, const ExponentScanOptions& opts) {
    require_alpha(alpha);
    if (offsets.size() < 2) throw ValidationError("exponent_scan needs at least two offsets");
    ExponentScan scan;
    scan.alpha = alpha;
    scan.critical = critical_point(alpha);
    scan.reference_prefactor = std::sqrt(3.0 * alpha * alpha * alpha / 16.0);
    const CriticalPoint& cp = scan.critical;
    for (double delta : offsets) {
        if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("offsets must be positive");
        if (delta > opts.max_offset_fraction * cp.J_c) {
            throw ValidationError("offset " + std::to_string(delta) + " exceeds " +
                                  std::to_string(opts.max_offset_fraction) + " * J_c");
        }
    }

    std::vector<double> xs, ys;
    for (double delta : offsets) {
        ExponentSample s;
        s.offset = delta;
        s.J = cp.J_c + delta;
        s.h = cp.h_c - cp.d_c * delta;
        const BranchSolution up = upper_branch(solve_branches({alpha, s.h, s.J}, opts.branches));
        s.d_star = up.d;
        s.deviation = up.d - cp.d_c;
        if (!(s.deviation > 0.0)) {
            throw NumericalError("exponent_scan: only a branch below d_c at offset " + std::to_string(delta));
        }
        xs.push_back(delta);
        ys.push_back(s.deviation);
        scan.samples.push_back(s);
    }
    scan.fit = fit_power_law(xs, ys);
    return scan;
}

double mixed_fraction(double d, double alpha) {
    const DimerDensities r = reduced_densities(d, alpha);
    return r.ab / (r.a + r.b + r.ab);
}

ScaledCritical scaled_coupling_critical(double Jprime) {
    if (!(Jprime >= 100.0) || !std::isfinite(Jprime)) {
        throw ValidationError("scaled_coupling_critical needs J' >= 100");
    }
    auto gap = [Jprime](double a) { return critical_point(a).J_c - a * (1.0 - a) * Jprime; };
    const double lo = 1.0 / std::sqrt(Jprime);
    const double hi = std::min(4.0 / std::sqrt(Jprime), 0.5);
    const double g_lo = gap(lo);
    const double g_hi = gap(hi);
    if (!(g_lo > 0.0 && g_hi < 0.0)) {
        throw NumericalError("scaled_coupling_critical: J_c(alpha) = alpha(1-alpha)J' has no root in the bracket");
    }
    const double alpha_c = bracketed_root(gap, lo, hi, g_lo, g_hi, "scaled_coupling_critical");
    const CriticalPoint cp = critical_point(alpha_c);
    return {Jprime, alpha_c, cp.h_c, cp.d_c, cp.J_c, mixed_fraction(cp.d_c, alpha_c)};
}

DMixScan d_mix_scan(double Jprime, std::span<const double> alphas, const BranchOptions& opts) {
    DMixScan scan;
    scan.critical = scaled_coupling_critical(Jprime);
    const ScaledCritical& sc = scan.critical;
    if (alphas.empty()) throw ValidationError("d_mix_scan needs at least one alpha");
    for (double a : alphas) {
        if (!(a > sc.alpha_c && a < 1.0)) {
            throw ValidationError("d_mix_scan: alpha " + std::to_string(a) + " is not above alpha_c = " +
                                  std::to_string(sc.alpha_c));
        }
    }
    std::vector<double> xs, ys;
    for (double a : alphas) {
        const CriticalPoint cp = critical_point(a);
        DMixSample s;
        s.alpha = a;
        s.J = a * (1.0 - a) * Jprime;
        s.h = cp.h_c - cp.d_c * (s.J - cp.J_c);
        s.d = upper_branch(solve_branches({a, s.h, s.J}, opts)).d;
        s.d_mix = mixed_fraction(s.d, a);
        scan.samples.push_back(s);
        xs.push_back(a - sc.alpha_c);
        ys.push_back(s.d_mix - sc.d_mix_c);
    }
    if (xs.size() >= 2) scan.fit = fit_power_law(xs, ys);
    return scan;
}

std::vector<double> default_d_mix_alphas(const ScaledCritical& sc, int n) {
    std::vector<double> out = log_spaced(1e-4, 1e-2, n);
    for (double& e : out) e = sc.alpha_c * (1.0 + e);
    return out;
}

} // namespace mdm
