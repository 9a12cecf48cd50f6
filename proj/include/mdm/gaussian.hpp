#pragma once

// Gaussian-moment representation of the J = 0 partition function:
//   Z_N = E[(1 + xi_A)^{N_A} (1 + xi_B)^{N_B}],  xi ~ N(0, W/N),
// with W = [[e^{h_A}, e^{h_AB}], [e^{h_AB}, e^{h_B}]] positive definite, the
// quadrant-restricted Z_N*, the Laplace exponent, and the super-additivity
// machinery.

#include <array>
#include <cstdint>

#include "mdm/linalg.hpp"

namespace mdm {

using Vec2 = std::array<double, 2>;

struct DimerWeightMatrix {
    double w_a = 1.0;
    double w_b = 1.0;
    double w_ab = 0.0;

    double determinant() const { return w_a * w_b - w_ab * w_ab; }
    // Lower Cholesky factor (l11, l21, l22) of W.
    std::array<double, 3> cholesky() const;
    // W^{-1} xi . xi
    double inverse_quadratic_form(const Vec2& xi) const;
};

// Throws ValidationError unless h_A + h_B > 2 h_AB.
DimerWeightMatrix weight_matrix(const Vec3& h);

enum class GaussMethod { Quadrature, MonteCarlo };

struct GaussOptions {
    GaussMethod method = GaussMethod::Quadrature;
    int max_n = 200;            // moment cap
    int panels = 16;            // Gauss-Legendre panels per axis (16 nodes each)
    double box_half_width = 12.0;  // in standard deviations, around 0 and around the mode
    std::uint64_t samples = 1'000'000;  // Monte Carlo
    std::uint64_t seed = 12345;
};

struct GaussEstimate {
    double log_value = 0.0;
    // Quadrature: |log I(P) - log I(P/2)| from halving the panel count.
    // Monte Carlo: standard error of the mean relative to the mean.
    double error = 0.0;
};

// log Z_N through the Gaussian expectation, with N_A, N_B from split_sizes.
GaussEstimate z_via_gaussian(int n, double alpha, const Vec3& h, const GaussOptions& opts = {});

// log Z_N* = log E[(1+xi_A)^{alpha N} (1+xi_B)^{(1-alpha) N} 1{xi_A > -1, xi_B > -1}].
// Exponents are the real numbers alpha N and (1 - alpha) N, so any N >= 1 is allowed.
GaussEstimate z_star(int n, double alpha, const Vec3& h, const GaussOptions& opts = {});

// Signed contribution of the complement of the quadrant to Z_N (integer exponents).
double off_quadrant_moment(int n, double alpha, const Vec3& h, const GaussOptions& opts = {});

// f(xi) = -1/2 <W^{-1} xi, xi> + alpha log|1+xi_A| + (1-alpha) log|1+xi_B|.
double laplace_exponent(const Vec2& xi, double alpha, const DimerWeightMatrix& w);
Vec2 laplace_gradient(const Vec2& xi, double alpha, const DimerWeightMatrix& w);

struct LaplaceMaximum {
    Vec2 xi{};
    double value = 0.0;
    double gradient_norm = 0.0;
    // Best value found in each region sign(1+xi_A), sign(1+xi_B): (+,+), (-,+), (+,-), (-,-).
    std::array<double, 4> region_values{};
    bool in_positive_quadrant = false;  // xi_A >= 0 and xi_B >= 0
    bool dominates_other_regions = false;
};

// Maximizes f on each of the four regions where it is smooth and concave.
LaplaceMaximum laplace_maximum(double alpha, const DimerWeightMatrix& w);

struct SuperadditivityResult {
    double lhs = 0.0;  // log Z*_{N1} + log Z*_{N2}
    double rhs = 0.0;  // log Z*_{N1+N2}
    bool holds = false;
};

SuperadditivityResult superadditivity_check(int n1, int n2, double alpha, const Vec3& h,
                                            const GaussOptions& opts = {});

// 1 + g x + (1-g) y - (1+x)^g (1+y)^{1-g}; nonnegative for x, y > -1, g in (0,1).
double mixing_inequality_gap(double x, double y, double g);

// gamma^2 W/N1 + (1-gamma)^2 W/N2 - W/N, largest entry relative to the matching W/N entry.
double covariance_identity_error(int n1, int n2, const DimerWeightMatrix& w);

struct MixingReport {
    int trials = 0;
    double max_covariance_error = 0.0;
    double min_inequality_gap = 0.0;  // over all trials; negative means a violation
    int equality_trials = 0;           // trials drawn with x == y (up to 1e-10)
    bool equality_iff_equal = true;    // |gap| < 1e-12 exactly on those trials
    bool passed = false;
};

// Random checks of the covariance identity and the inequality lemma. Half of the
// inequality trials use x == y (equality cases), half use |x - y| >= 1e-3.
MixingReport mixing_lemma_checks(int trials, std::uint64_t seed = 2024);

} // namespace mdm
