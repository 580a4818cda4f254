#pragma once

#include "divgov/governor.hpp"
#include "divgov/types.hpp"

#include <cmath>
#include <stdexcept>

namespace divgov {

/// Structured density
///   rho(x) = A/2 (x1/A + x2)^2
///          + 1/2 (A x1 - x3 + (AB-1)/A x2 + k s)^2
///          + (AB-1)/(2 A^2) x2^2 + alpha/2 x3^2,
/// where s = sign(x2) is the sheet sign. The relay value of the dynamics is
/// the opposite of s, so the density is evaluated per half-space.
struct StructuredDensity {
    GovernorParams params;
    double alpha = 0.0;

    void validate() const {
        params.validate();
        if (!(alpha >= 0.0)) throw std::invalid_argument("StructuredDensity: alpha must be >= 0");
    }
};

/// Sheet sign of a state: +1 on x2 > 0, -1 on x2 < 0. `side` breaks the tie
/// on the surface; passing side = 0 there is an error.
inline int sheet_sign(double x2, int side = 0) {
    if (x2 > 0.0) return 1;
    if (x2 < 0.0) return -1;
    if (side == 0)
        throw std::invalid_argument("sheet_sign: x2 = 0 requires an explicit side");
    return side > 0 ? 1 : -1;
}

template <typename S>
S eval_structured_density(const StructuredDensity& d, const Vec3T<S>& x, int side = 0) {
    const S A = S(d.params.A), B = S(d.params.B), k = S(d.params.k), alpha = S(d.alpha);
    const S s = S(sheet_sign(static_cast<double>(x[1]), side));
    const S mu = A * B - S(1);
    const S u1 = x[0] / A + x[1];
    const S u2 = A * x[0] - x[2] + mu / A * x[1] + k * s;
    return S(0.5) * A * u1 * u1 + S(0.5) * u2 * u2 + mu / (S(2) * A * A) * x[1] * x[1] +
           S(0.5) * alpha * x[2] * x[2];
}

/// Analytic gradient of the structured density on the given sheet.
template <typename S>
Vec3T<S> grad_structured_density(const StructuredDensity& d, const Vec3T<S>& x, int side = 0) {
    const S A = S(d.params.A), B = S(d.params.B), k = S(d.params.k), alpha = S(d.alpha);
    const S s = S(sheet_sign(static_cast<double>(x[1]), side));
    const S mu = A * B - S(1);
    const S u1 = x[0] / A + x[1];
    const S u2 = A * x[0] - x[2] + mu / A * x[1] + k * s;
    Vec3T<S> g;
    g[0] = u1 + A * u2;
    g[1] = A * u1 + mu / A * u2 + mu / (A * A) * x[1];
    g[2] = -u2 + alpha * x[2];
    return g;
}

/// div f is constant off the surface: trace(H) = -(B + C).
inline double divergence_of_field(const GovernorParams& p) { return -(p.B + p.C); }

/// Symmetric 4x4 form W with z = (x1, x2, x3, phi), phi the relay value, so
/// that z' W z = div(rho f) - rho div f holds exactly on each sheet.
/// At k = 1/2 the entries reduce to
///   W11 = -A(AB-1),  W12 = -B(AB-1),   W13 = AB-1 - alpha/2 + AC/2,
///   W14 = (AB-1)/2,  W22 = -B^2(AB-1)/A,
///   W23 = -C/(2A) + CB/2 + B(AB-1)/A,  W24 = B(AB-1)/(2A),
///   W33 = -C - (AB-1)/A - alpha C,     W34 = -C/4 - (AB-1)/(2A),
///   W44 = -(AB-1)/(4A).
template <typename S = double>
Mat4T<S> build_w_form(const GovernorParams& p, double alpha) {
    p.validate();
    const S A = S(p.A), B = S(p.B), C = S(p.C), k = S(p.k), al = S(alpha);
    const S mu = A * B - S(1);
    Mat4T<S> W;
    W(0, 0) = -A * mu;
    W(0, 1) = -B * mu;
    W(0, 2) = mu - al / S(2) + A * C / S(2);
    W(0, 3) = k * mu;
    W(1, 1) = -B * B * mu / A;
    W(1, 2) = -C / (S(2) * A) + C * B / S(2) + B * mu / A;
    W(1, 3) = B * k * mu / A;
    W(2, 2) = -C - mu / A - al * C;
    W(2, 3) = -k * mu / A - C * k / S(2);
    W(3, 3) = -k * k * mu / A;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) W(i, j) = W(j, i);
    return W;
}

/// Closed form of div(rho f) - rho div f for the structured density on sheet
/// s = sign(x2). The leading square matches the relay-closed second state
/// equation; the C-proportional terms vanish without self-regulation.
template <typename S>
S structured_divergence_closed_form(const StructuredDensity& d, const Vec3T<S>& x, int side = 0) {
    const S A = S(d.params.A), B = S(d.params.B), C = S(d.params.C), k = S(d.params.k);
    const S alpha = S(d.alpha);
    const S s = S(sheet_sign(static_cast<double>(x[1]), side));
    const S mu = A * B - S(1);
    const S sq = x[2] - A * x[0] - B * x[1] - k * s;
    return -mu / A * sq * sq - alpha * x[0] * x[2] - alpha * C * x[2] * x[2] +
           C * (A * x[0] * x[2] + B * x[1] * x[2] + k * s * x[2] - x[2] * x[2] -
                x[1] * x[2] / A);
}

/// z' W z evaluated with z = (x, relay), relay = -sheet sign.
template <typename S>
S w_form_value(const Mat4T<S>& W, const Vec3T<S>& x, int side = 0) {
    const S relay = S(-sheet_sign(static_cast<double>(x[1]), side));
    Vec4T<S> z;
    z << x[0], x[1], x[2], relay;
    return z.dot(W * z);
}

/// Quadratic density rho(x) = x' Q x.
struct QuadraticDensity {
    Mat3 Q;

    void validate_symmetric(double tol = 1e-12) const {
        double scale = std::max(1.0, Q.norm());
        if ((Q - Q.transpose()).norm() > tol * scale)
            throw std::invalid_argument("QuadraticDensity: Q must be symmetric");
    }
};

/// S-procedure matrix
///   F(Q, tau) = [ H'Q + QH   QG ]
///               [ (QG)'     -tau ],
/// negative definiteness of which certifies the divergence condition for the
/// quadratic density. tau >= 0 is the multiplier of the relay bound phi^2 <= 1;
/// tau = 1 gives the fixed-corner variant.
inline Mat4 build_f_form(const LurieSystem& sys, const QuadraticDensity& q, double tau) {
    q.validate_symmetric();
    if (!(tau >= 0.0)) throw std::invalid_argument("build_f_form: tau must be >= 0");
    Mat4 F = Mat4::Zero();
    F.topLeftCorner<3, 3>() = sys.H.transpose() * q.Q + q.Q * sys.H;
    Vec3 g = q.Q * sys.G;
    F.topRightCorner<3, 1>() = g;
    F.bottomLeftCorner<1, 3>() = g.transpose();
    F(3, 3) = -tau;
    return F;
}

/// div(rho f) - rho div f for the quadratic density: 2 x' Q (H x + G phi).
inline double quadratic_divergence_difference(const LurieSystem& sys, const QuadraticDensity& q,
                                              const Vec3& x, double phi) {
    return 2.0 * x.dot(q.Q * (sys.H * x + sys.G * phi));
}

/// Maximum mismatch between three evaluations of div(rho f) - rho div f for
/// the structured density at x: (a) central finite differences of div(rho f)
/// minus rho * div f, (b) the closed form, (c) z' W z. Requires x2 != 0.
inline double structured_divergence_identity_check(const GovernorParams& p, double alpha,
                                                   const Vec3& x, double fd_step = 1e-5) {
    StructuredDensity d{p, alpha};
    const int s = sheet_sign(x[1]);
    const LurieSystem sys = build_system(p);
    const double relay = -s;

    auto rho_f = [&](const Vec3& y, int comp) {
        return eval_structured_density<double>(d, y, s) * vector_field(sys, y, relay)[comp];
    };
    double fd_div = 0.0;
    for (int i = 0; i < 3; ++i) {
        Vec3 hi = x, lo = x;
        hi[i] += fd_step;
        lo[i] -= fd_step;
        fd_div += (rho_f(hi, i) - rho_f(lo, i)) / (2.0 * fd_step);
    }
    const double a = fd_div - eval_structured_density<double>(d, x, s) * divergence_of_field(p);
    const double b = structured_divergence_closed_form<double>(d, x, s);
    const double c = w_form_value<double>(build_w_form<double>(p, alpha), x, s);
    return std::max({std::abs(a - b), std::abs(b - c), std::abs(a - c)});
}

}  // namespace divgov
