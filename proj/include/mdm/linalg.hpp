#pragma once

#include <array>
#include <cmath>

namespace mdm {

// Components are always ordered (A, B, AB).
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

enum Component : int { kA = 0, kB = 1, kAB = 2 };

inline double dot(const Vec3& u, const Vec3& v) {
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

inline Vec3 matvec(const Mat3& m, const Vec3& v) {
    Vec3 out{};
    for (int i = 0; i < 3; ++i) {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    }
    return out;
}

inline Mat3 symmetrized(const Mat3& m) {
    Mat3 s{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            s[i][j] = 0.5 * (m[i][j] + m[j][i]);
        }
    }
    return s;
}

inline double max_abs(const Vec3& v) {
    return std::fmax(std::fabs(v[0]), std::fmax(std::fabs(v[1]), std::fabs(v[2])));
}

inline double norm2(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Mat3 zero_matrix() { return Mat3{}; }

} // namespace mdm
