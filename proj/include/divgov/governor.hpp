#pragma once

#include "divgov/types.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace divgov {

/// Physical parameters of the governor: stiffness A, viscous damping B,
/// inverse drive time constant C (C = 0 switches self-regulation off) and
/// dry-friction coefficient k.
struct GovernorParams {
    double A = 1.0;
    double B = 1.0;
    double C = 0.0;
    double k = 0.5;

    void validate() const {
        if (!(A > 0.0)) throw std::invalid_argument("GovernorParams: A must be > 0");
        if (!(B > 0.0)) throw std::invalid_argument("GovernorParams: B must be > 0");
        if (!(C >= 0.0)) throw std::invalid_argument("GovernorParams: C must be >= 0");
        if (!(k >= 0.0)) throw std::invalid_argument("GovernorParams: k must be >= 0");
    }
};

using StateVector = Vec3;  // (x1, x2, x3) = (coordinate, velocity, drive)

/// Lurie form xdot = H x + G phi(sigma), sigma = L x = x2, with the relay
/// phi taking values in [-1, 1].
struct LurieSystem {
    Mat3 H;
    Vec3 G;
    GovernorParams params;

    /// L as a functional: selects the velocity coordinate.
    double sigma(const StateVector& x) const { return x[1]; }

    /// Row form of L.
    Eigen::RowVector3d L() const { return Eigen::RowVector3d(0.0, 1.0, 0.0); }
};

inline LurieSystem build_system(const GovernorParams& p) {
    p.validate();
    LurieSystem sys;
    sys.H << 0.0, 1.0, 0.0,
             -p.A, -p.B, 1.0,
             -1.0, 0.0, -p.C;
    sys.G << 0.0, p.k, 0.0;
    sys.params = p;
    return sys;
}

/// Right-hand side with an explicit relay/Filippov value phi in [-1, 1].
inline Vec3 vector_field(const LurieSystem& sys, const StateVector& x, double phi) {
    if (!(std::abs(phi) <= 1.0 + 1e-12))
        throw std::invalid_argument("vector_field: |phi| must be <= 1");
    return sys.H * x + sys.G * phi;
}

/// Relay value selected off the discontinuity surface. Dry friction opposes
/// the velocity, so the selection is -1 on x2 > 0 and +1 on x2 < 0.
inline double relay_off_surface(double x2) { return x2 > 0.0 ? -1.0 : 1.0; }

/// The set of Filippov equilibria: the segment
///   { x2 = 0,  x1 = -C*x3,  |x3| <= k / (1 + A*C) }.
struct StationarySet {
    GovernorParams params;

    double x3_extent() const { return params.k / (1.0 + params.A * params.C); }

    /// Closest point of the segment to x.
    Vec3 closest_point(const Vec3& x) const {
        const double C = params.C;
        double s = (x[2] - C * x[0]) / (1.0 + C * C);
        const double m = x3_extent();
        s = std::clamp(s, -m, m);
        return Vec3(-C * s, 0.0, s);
    }

    double distance(const Vec3& x) const { return (x - closest_point(x)).norm(); }

    bool contains(const Vec3& x, double tol = 1e-9) const {
        return std::abs(x[1]) <= tol && std::abs(x[0] + params.C * x[2]) <= tol &&
               std::abs(x[2]) <= x3_extent() + tol;
    }
};

inline StationarySet stationary_set(const GovernorParams& p) {
    p.validate();
    return StationarySet{p};
}

enum class HurwitzVerdict { Stable, Marginal, Unstable };

inline const char* to_string(HurwitzVerdict v) {
    switch (v) {
        case HurwitzVerdict::Stable: return "stable";
        case HurwitzVerdict::Marginal: return "marginal";
        case HurwitzVerdict::Unstable: return "unstable";
    }
    return "?";
}

/// Roots of x^3 + a2 x^2 + a1 x + a0, closed form plus Newton polish,
/// sorted by real part (then imaginary part).
inline std::array<Complex, 3> cubic_roots(double a2, double a1, double a0) {
    auto poly = [&](double x) { return ((x + a2) * x + a1) * x + a0; };
    auto dpoly = [&](double x) { return (3.0 * x + 2.0 * a2) * x + a1; };
    auto polish = [&](double x) {
        for (int i = 0; i < 8; ++i) {
            double d = dpoly(x);
            if (std::abs(d) < 1e-300) break;
            double step = poly(x) / d;
            x -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
        }
        return x;
    };

    const double p = a1 - a2 * a2 / 3.0;
    const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    const double disc = 0.25 * q * q + p * p * p / 27.0;
    const double shift = a2 / 3.0;

    std::array<Complex, 3> roots;
    if (disc > 0.0) {
        const double sd = std::sqrt(disc);
        const double u = std::cbrt(-0.5 * q + sd);
        const double v = std::cbrt(-0.5 * q - sd);
        double r = polish(u + v - shift);
        // deflate to the quadratic factor
        const double b = a2 + r;
        const double c = a1 + r * b;
        const double qd = b * b - 4.0 * c;
        if (qd >= 0.0) {
            roots = {Complex(r, 0.0), Complex(0.5 * (-b - std::sqrt(qd)), 0.0),
                     Complex(0.5 * (-b + std::sqrt(qd)), 0.0)};
        } else {
            const double im = 0.5 * std::sqrt(-qd);
            roots = {Complex(r, 0.0), Complex(-0.5 * b, -im), Complex(-0.5 * b, im)};
        }
    } else {
        const double mp = std::sqrt(std::max(0.0, -p / 3.0));
        double arg = (mp > 0.0) ? std::clamp(1.5 * q / (p * mp), -1.0, 1.0) : 0.0;
        const double theta = std::acos(arg) / 3.0;
        constexpr double two_pi_3 = 2.0943951023931953;
        for (int k = 0; k < 3; ++k) {
            double r = 2.0 * mp * std::cos(theta - two_pi_3 * k) - shift;
            roots[k] = Complex(polish(r), 0.0);
        }
    }
    std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

struct HurwitzResult {
    HurwitzVerdict verdict;
    std::array<Complex, 3> spectrum;  // eigenvalues of H, ascending real part
    double routh_margin;              // (B+C)(A+BC) - (AC+1)
};

/// Routh-Hurwitz test of the linear part H. The characteristic polynomial is
/// s^3 + (B+C) s^2 + (A+BC) s + (AC+1); with admissible parameters all
/// coefficients are positive, so stability reduces to the single product
/// condition (B+C)(A+BC) > AC+1. Verdicts within 1e-10 of the boundary are
/// reported as marginal.
inline HurwitzResult hurwitz_test(const GovernorParams& p) {
    p.validate();
    const double a2 = p.B + p.C;
    const double a1 = p.A + p.B * p.C;
    const double a0 = p.A * p.C + 1.0;
    HurwitzResult r;
    r.routh_margin = a2 * a1 - a0;
    r.spectrum = cubic_roots(a2, a1, a0);
    constexpr double band = 1e-10;
    if (r.routh_margin > band)
        r.verdict = HurwitzVerdict::Stable;
    else if (r.routh_margin < -band)
        r.verdict = HurwitzVerdict::Unstable;
    else
        r.verdict = HurwitzVerdict::Marginal;
    return r;
}

}  // namespace divgov
