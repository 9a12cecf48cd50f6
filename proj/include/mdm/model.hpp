#pragma once

// Exact finite-N two-population monomer-dimer model.
//
// Configurations are grouped into count classes D = (D_A, D_B, D_AB); the
// Hamiltonian depends on D only, so summing over classes weighted by the
// number of configurations in each class is exact.

#include <cstddef>

#include "mdm/linalg.hpp"

namespace mdm {

struct ModelParams {
    double alpha = 0.5;  // fraction of sites in population A
    Vec3 h{};            // dimer fields (h_A, h_B, h_AB)
    Mat3 J{};            // couplings, rows/cols ordered A, B, AB

    // Throws ValidationError unless 0 < alpha < 1 and every entry is finite.
    void validate() const;
};

struct PopulationSizes {
    int n = 0;
    int n_a = 0;
    int n_b = 0;
};

struct DimerCounts {
    int a = 0;
    int b = 0;
    int ab = 0;

    int total() const { return a + b + ab; }
    Vec3 as_vector() const { return {double(a), double(b), double(ab)}; }
};

// N_A = round(alpha*N) clamped to [1, N-1].
PopulationSizes split_sizes(int n, double alpha);

// Hard-core check: 2 D_A + D_AB <= N_A, 2 D_B + D_AB <= N_B, all counts >= 0.
bool is_admissible(const DimerCounts& d, const PopulationSizes& sizes);

// log of the number of monomer-dimer configurations with counts d:
//   N_A! N_B! / (M_A! M_B! D_A! D_B! D_AB! 2^{D_A} 2^{D_B})
double log_config_count(const DimerCounts& d, const PopulationSizes& sizes);

// H_N(D) = -h.D - (1/2N) (J D).D
double hamiltonian(const DimerCounts& d, int n, const ModelParams& params);

struct EnumerationOptions {
    int max_n = 2000;      // resource guard; the sum has O(N^3) terms
    unsigned threads = 1;  // slices over D_A; reduction order is fixed
};

// Everything the full enumeration produces in one pass.
struct GibbsSummary {
    PopulationSizes sizes;
    double log_z = 0.0;
    Vec3 mean_counts{};                // <D>_N
    double mean_mixed_fraction = 0.0;  // <D_AB/|D|>_N, 0 on the empty class
    std::size_t classes = 0;           // number of admissible count vectors
};

GibbsSummary enumerate_gibbs(int n, const ModelParams& params, const EnumerationOptions& opts = {});

double log_partition_exact(int n, const ModelParams& params, const EnumerationOptions& opts = {});

// <D>_N / N
Vec3 gibbs_expected_densities(int n, const ModelParams& params, const EnumerationOptions& opts = {});

// <D_AB / |D|>_N with the empty configuration contributing 0.
double d_mix_finite(int n, const ModelParams& params, const EnumerationOptions& opts = {});

} // namespace mdm
