#pragma once

// Thermodynamic-limit side of the model: entropy, energy and variational
// pressure psi = s - eps over the density region
//   Omega_alpha = { d >= 0 : 2 d_A + d_AB <= alpha, 2 d_B + d_AB <= 1 - alpha },
// its stationary points (the fixed-point system) and its global maximum.

#include <vector>

#include "mdm/linalg.hpp"
#include "mdm/model.hpp"

namespace mdm {

struct DimerDensities {
    double a = 0.0;
    double b = 0.0;
    double ab = 0.0;

    Vec3 as_vector() const { return {a, b, ab}; }
    static DimerDensities from_vector(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

struct MonomerDensities {
    double a = 0.0;  // alpha - 2 d_A - d_AB
    double b = 0.0;  // 1 - alpha - 2 d_B - d_AB
};

MonomerDensities monomer_densities(const DimerDensities& d, double alpha);

bool in_domain(const DimerDensities& d, double alpha, double tol = 1e-12);
bool is_interior(const DimerDensities& d, double alpha);

// x log x - x, extended by 0 at x = 0.
double log_gamma_fn(double x);

double entropy(const DimerDensities& d, double alpha);
double energy(const DimerDensities& d, const ModelParams& params);
double psi(const DimerDensities& d, const ModelParams& params);

// Gradient in d of psi at an interior point. The quadratic form is
// differentiated as written, so J enters through (J + J^T)/2.
Vec3 grad_psi(const DimerDensities& d, const ModelParams& params);

struct EffectiveWeights {
    double a = 1.0;
    double b = 1.0;
    double ab = 1.0;
};

// w = exp(h + J_sym d), J_sym = (J + J^T)/2.
EffectiveWeights effective_weights(const DimerDensities& d, const ModelParams& params);

// The unique solution of the J = 0 system with constant weights exp(h):
//   d_A = (w_A/2) m_A^2, d_B = (w_B/2) m_B^2, d_AB = w_AB m_A m_B.
DimerDensities solve_zero_coupling(const Vec3& h, double alpha);

// Max-abs residual of the fixed-point system at d (weights evaluated at d).
double fixed_point_residual(const DimerDensities& d, const ModelParams& params);

struct FixedPointOptions {
    double damping = 0.5;     // lambda in d <- (1-lambda) d + lambda g(h + J d)
    double tolerance = 1e-12; // max-norm of successive differences
    int max_iterations = 100000;
    double min_damping = 1e-6;
};

struct FixedPointResult {
    DimerDensities d;
    int iterations = 0;
    double damping = 0.0;  // damping in effect at convergence
};

// Damped iteration of d = g(h + J d, alpha); the damping is halved whenever the
// step length grows. Throws NumericalError when the cap is reached.
FixedPointResult fixed_point_iterate(const ModelParams& params, const DimerDensities& d0,
                                     const FixedPointOptions& opts = {});

DimerDensities fixed_point_solve(const ModelParams& params, const DimerDensities& d0,
                                 const FixedPointOptions& opts = {});

struct Maximizer {
    DimerDensities d;
    double value = 0.0;
    bool interior = false;
};

struct MaximizeOptions {
    int grid = 64;             // intervals per axis of the scan
    double tie_tolerance = 1e-9;
    double dedup_distance = 1e-6;
    int max_seeds = 32;        // refinement starts, best grid maxima first
    FixedPointOptions fixed_point;
};

// Maps the unit cube onto Omega_alpha:
//   d_AB = u3 * min(alpha, 1-alpha), d_A = u1 (alpha - d_AB)/2, d_B = u2 (1-alpha-d_AB)/2.
DimerDensities cube_to_domain(double u1, double u2, double u3, double alpha);

// All global maximizers of psi (ties within tie_tolerance), sorted
// lexicographically by (d_A, d_B, d_AB).
std::vector<Maximizer> maximize_psi(const ModelParams& params, const MaximizeOptions& opts = {});

// p(h, J, alpha) = max psi.
double pressure(const ModelParams& params, const MaximizeOptions& opts = {});

} // namespace mdm
