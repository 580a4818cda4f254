#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace divgov {

template <typename S> using Vec3T = Eigen::Matrix<S, 3, 1>;
template <typename S> using Vec4T = Eigen::Matrix<S, 4, 1>;
template <typename S> using Mat3T = Eigen::Matrix<S, 3, 3>;
template <typename S> using Mat4T = Eigen::Matrix<S, 4, 4>;

using Vec3 = Vec3T<double>;
using Vec4 = Vec4T<double>;
using Mat3 = Mat3T<double>;
using Mat4 = Mat4T<double>;

using Complex = std::complex<double>;

/// Side of the discontinuity surface x2 = 0, or sliding on it.
enum class Mode { Above, Below, Sliding };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::Above: return "above";
        case Mode::Below: return "below";
        case Mode::Sliding: return "sliding";
    }
    return "?";
}

template <typename S>
int sgn(S v) { return (v > S(0)) - (v < S(0)); }

inline bool all_finite(const Vec3& x) {
    return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

}  // namespace divgov
