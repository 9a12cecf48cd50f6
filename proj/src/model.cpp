#include "mdm/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "mdm/errors.hpp"

namespace mdm {

void ModelParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha));
    }
    for (double v : h) {
        if (!std::isfinite(v)) throw ValidationError("h has a non-finite entry");
    }
    for (const auto& row : J) {
        for (double v : row) {
            if (!std::isfinite(v)) throw ValidationError("J has a non-finite entry");
        }
    }
}

PopulationSizes split_sizes(int n, double alpha) {
    if (n < 2) throw ValidationError("N must be at least 2, got " + std::to_string(n));
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha));
    }
    const long rounded = std::lround(alpha * n);
    const int n_a = static_cast<int>(std::clamp<long>(rounded, 1, n - 1));
    return {n, n_a, n - n_a};
}

bool is_admissible(const DimerCounts& d, const PopulationSizes& sizes) {
    return d.a >= 0 && d.b >= 0 && d.ab >= 0 && 2 * d.a + d.ab <= sizes.n_a &&
           2 * d.b + d.ab <= sizes.n_b;
}

namespace {

double log_factorial(int k) { return std::lgamma(k + 1.0); }

// Log-factorials 0!..n! for the enumeration loops.
std::vector<double> log_factorial_table(int n) {
    std::vector<double> table(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) table[k] = log_factorial(k);
    return table;
}

// Partial sums for one D_A slice, all scaled by exp(-shift).
struct SliceSums {
    double shift = -std::numeric_limits<double>::infinity();
    double z = 0.0;
    Vec3 counts{};
    double mixed = 0.0;
    std::size_t classes = 0;

    void add(double log_w, const DimerCounts& d) {
        if (log_w > shift) {
            const double r = std::exp(shift - log_w);
            z *= r;
            for (double& c : counts) c *= r;
            mixed *= r;
            shift = log_w;
        }
        const double w = std::exp(log_w - shift);
        z += w;
        counts[0] += w * d.a;
        counts[1] += w * d.b;
        counts[2] += w * d.ab;
        if (d.total() > 0) mixed += w * double(d.ab) / double(d.total());
        ++classes;
    }

    void merge(const SliceSums& o) {
        if (o.classes == 0) return;
        if (classes == 0) {
            *this = o;
            return;
        }
        const double top = std::max(shift, o.shift);
        const double r_self = std::exp(shift - top);
        const double r_other = std::exp(o.shift - top);
        z = z * r_self + o.z * r_other;
        for (int i = 0; i < 3; ++i) counts[i] = counts[i] * r_self + o.counts[i] * r_other;
        mixed = mixed * r_self + o.mixed * r_other;
        shift = top;
        classes += o.classes;
    }
};

} // namespace

double log_config_count(const DimerCounts& d, const PopulationSizes& sizes) {
    if (!is_admissible(d, sizes)) {
        throw ValidationError("dimer counts violate the hard-core constraints");
    }
    const int m_a = sizes.n_a - 2 * d.a - d.ab;
    const int m_b = sizes.n_b - 2 * d.b - d.ab;
    return log_factorial(sizes.n_a) + log_factorial(sizes.n_b) - log_factorial(m_a) -
           log_factorial(m_b) - log_factorial(d.a) - log_factorial(d.b) - log_factorial(d.ab) -
           (d.a + d.b) * std::log(2.0);
}

double hamiltonian(const DimerCounts& d, int n, const ModelParams& params) {
    const Vec3 v = d.as_vector();
    return -dot(params.h, v) - dot(matvec(params.J, v), v) / (2.0 * n);
}

GibbsSummary enumerate_gibbs(int n, const ModelParams& params, const EnumerationOptions& opts) {
    params.validate();
    if (n > opts.max_n) {
        throw ValidationError("N=" + std::to_string(n) + " exceeds the enumeration cap " +
                              std::to_string(opts.max_n));
    }
    const PopulationSizes sizes = split_sizes(n, params.alpha);
    const std::vector<double> lf = log_factorial_table(n);
    const double log_n = std::log(double(n));
    const double log2 = std::log(2.0);
    const double base = lf[sizes.n_a] + lf[sizes.n_b];

    const int slices = sizes.n_a / 2 + 1;
    std::vector<SliceSums> partial(static_cast<std::size_t>(slices));

    auto run_slice = [&](int da) {
        SliceSums acc;
        for (int db = 0; db <= sizes.n_b / 2; ++db) {
            const int ab_max = std::min(sizes.n_a - 2 * da, sizes.n_b - 2 * db);
            for (int dab = 0; dab <= ab_max; ++dab) {
                const DimerCounts d{da, db, dab};
                const double log_phi = base - lf[sizes.n_a - 2 * da - dab] -
                                       lf[sizes.n_b - 2 * db - dab] - lf[da] - lf[db] - lf[dab] -
                                       (da + db) * log2;
                acc.add(log_phi - d.total() * log_n - hamiltonian(d, n, params), d);
            }
        }
        partial[da] = acc;
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads, unsigned(slices)));
    if (workers == 1) {
        for (int da = 0; da < slices; ++da) run_slice(da);
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (int da = next++; da < slices; da = next++) run_slice(da);
            });
        }
    }

    SliceSums total;
    for (const auto& s : partial) total.merge(s);

    GibbsSummary out;
    out.sizes = sizes;
    out.log_z = total.shift + std::log(total.z);
    for (int i = 0; i < 3; ++i) out.mean_counts[i] = total.counts[i] / total.z;
    out.mean_mixed_fraction = total.mixed / total.z;
    out.classes = total.classes;
    return out;
}

double log_partition_exact(int n, const ModelParams& params, const EnumerationOptions& opts) {
    return enumerate_gibbs(n, params, opts).log_z;
}

Vec3 gibbs_expected_densities(int n, const ModelParams& params, const EnumerationOptions& opts) {
    Vec3 d = enumerate_gibbs(n, params, opts).mean_counts;
    for (double& v : d) v /= n;
    return d;
}

double d_mix_finite(int n, const ModelParams& params, const EnumerationOptions& opts) {
    return enumerate_gibbs(n, params, opts).mean_mixed_fraction;
}

} // namespace mdm
