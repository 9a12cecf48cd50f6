#pragma once

// One-dimensional reduction with only h = h_AB and J = J_AB^AB > 0 switched on.
// The intra-population densities are slaved to the mixed density d through
//   d_A = x_alpha(d)^2 / 2,  d_B = y_alpha(d)^2 / 2,
// and stationary points solve f_alpha(d) = h + J d with
//   f_alpha(d) = log d - log x_alpha(d) - log y_alpha(d).

#include <span>
#include <vector>

#include "mdm/model.hpp"
#include "mdm/variational.hpp"

namespace mdm {

struct ReducedParams {
    double alpha = 0.5;
    double h = 0.0;  // h_AB
    double J = 1.0;  // J_AB^AB

    // Requires 0 < alpha < 1, finite h, J > 0.
    void validate() const;
    ModelParams to_model() const;
};

struct CriticalPoint {
    double d_c = 0.0;
    double h_c = 0.0;
    double J_c = 0.0;
};

enum class Stability { GlobalMax, LocalMax, Unstable };

const char* to_string(Stability s);

struct BranchSolution {
    double d = 0.0;
    double psi1_value = 0.0;
    Stability stability = Stability::Unstable;
};

// Positive root of x^2 + x - (alpha - d) = 0, for 0 <= d <= alpha.
double x_alpha(double d, double alpha);
// Positive root of y^2 + y - (1 - alpha - d) = 0, for 0 <= d <= 1 - alpha.
double y_alpha(double d, double alpha);

// The reduced point (x^2/2, y^2/2, d).
DimerDensities reduced_densities(double d, double alpha);

double psi1(double d, const ReducedParams& rp);

struct FAlpha {
    double f = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

// f_alpha and its first three derivatives in closed form; 0 < d < min(alpha, 1 - alpha).
FAlpha f_alpha_derivatives(double d, double alpha);
double f_alpha(double d, double alpha);

// Derivatives of psi1 in d. Because d_A and d_B sit on their own stationary
// curves, psi1' = h + J d - f_alpha(d) and the higher ones follow from f.
struct Psi1Derivatives {
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
    double d4 = 0.0;
};
Psi1Derivatives psi1_derivatives(double d, const ReducedParams& rp);

// The inflection point of f_alpha: f'' = 0, J_c = f'(d_c), h_c = f(d_c) - J_c d_c.
CriticalPoint critical_point(double alpha);

struct BranchOptions {
    double tie_tolerance = 1e-8;     // psi1 gap under which maxima count as tied
    double merge_fraction = 1e-5;    // roots closer than merge_fraction*alpha are one root
};

// All roots of f_alpha(d) = h + J d on (0, min(alpha, 1 - alpha)), ascending, classified by psi1.
std::vector<BranchSolution> solve_branches(const ReducedParams& rp, const BranchOptions& opts = {});

// Largest-d local maximum of psi1 (the upper branch).
BranchSolution upper_branch(const std::vector<BranchSolution>& branches);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
};

// Unweighted least squares of log y against log x. All values must be positive.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

struct ExponentSample {
    double offset = 0.0;  // J - J_c
    double J = 0.0;
    double h = 0.0;
    double d_star = 0.0;
    double deviation = 0.0;  // d_star - d_c
};

struct ExponentScan {
    double alpha = 0.0;
    CriticalPoint critical;
    std::vector<ExponentSample> samples;
    PowerLawFit fit;
    double reference_prefactor = 0.0;  // sqrt(3 alpha^3 / 16)
};

struct ExponentScanOptions {
    double max_offset_fraction = 0.05;  // offsets must stay below this fraction of J_c
    BranchOptions branches;
};

// Walks J = J_c + delta, h = h_c - d_c delta and fits d* - d_c against delta.
ExponentScan exponent_scan(double alpha, std::span<const double> offsets,
                           const ExponentScanOptions& opts = {});

// n log-spaced values between lo and hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int n);

// Mixed-dimer fraction d / (x^2/2 + y^2/2 + d) on the reduced curve.
double mixed_fraction(double d, double alpha);

struct ScaledCritical {
    double Jprime = 0.0;
    double alpha_c = 0.0;
    double h_c = 0.0;
    double d_c = 0.0;
    double J_c = 0.0;
    double d_mix_c = 0.0;
};

// Critical point in the (alpha, h) plane for J = alpha (1 - alpha) J'.
ScaledCritical scaled_coupling_critical(double Jprime);

struct DMixSample {
    double alpha = 0.0;
    double J = 0.0;
    double h = 0.0;
    double d = 0.0;
    double d_mix = 0.0;
};

struct DMixScan {
    ScaledCritical critical;
    std::vector<DMixSample> samples;
    PowerLawFit fit;  // d_mix - d_mix_c against alpha - alpha_c
};

// For each alpha > alpha_c: J = alpha(1-alpha)J', h = h_c(alpha) - d_c(alpha)(J - J_c(alpha)),
// upper branch, d_mix. Throws ValidationError for alpha <= alpha_c.
DMixScan d_mix_scan(double Jprime, std::span<const double> alphas, const BranchOptions& opts = {});

// Default scan points alpha_c (1 + e) with e log-spaced in [1e-4, 1e-2].
std::vector<double> default_d_mix_alphas(const ScaledCritical& sc, int n = 9);

} // namespace mdm
