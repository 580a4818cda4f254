#include "divgov/analyzer.hpp"

#include "divgov/jacobi.hpp"
#include "divgov/parallel.hpp"
#include "divgov/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace divgov {

namespace {

/// Quadratic-in-x part of the structured density (sheet independent).
Mat3 structured_quadratic_part(const StructuredDensity& d) {
    // rho(x) = x'Px + s * k * q'x + const; P from the analytic gradient,
    // which is affine in x
    Mat3 P;
    const Vec3 g0 = grad_structured_density<double>(d, Vec3::Zero(), +1);
    for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = 1.0;
        P.col(i) = 0.5 * (grad_structured_density<double>(d, e, +1) - g0);
    }
    return 0.5 * (P + P.transpose());
}

struct McAccum {
    double sum = 0.0;
    double sum_sq = 0.0;
    long accepted = 0;
};

template <typename DensityFn, typename IntegrandFn>
LevelEstimate mc_level(double level, double radius, long samples, std::uint64_t seed,
                       const DensityFn& rho, const IntegrandFn& integrand) {
    const int batches = 16;
    std::vector<McAccum> acc(batches);
    const long per_batch = samples / batches + 1;
    parallel_for(batches, [&](std::size_t b) {
        SplitMix64 rng(child_seed(seed, b));
        McAccum& a = acc[b];
        for (long i = 0; i < per_batch; ++i) {
            Vec3 x(rng.uniform(-radius, radius), rng.uniform(-radius, radius),
                   rng.uniform(-radius, radius));
            if (x[1] == 0.0) continue;
            if (rho(x) > level) continue;
            const double v = integrand(x);
            a.sum += v;
            a.sum_sq += v * v;
            ++a.accepted;
        }
    });
    double sum = 0.0, sum_sq = 0.0;
    long total = batches * per_batch;
    long accepted = 0;
    for (const auto& a : acc) {
        sum += a.sum;
        sum_sq += a.sum_sq;
        accepted += a.accepted;
    }
    const double vol = std::pow(2.0 * radius, 3);
    // accept/reject sampling over the box: the rejected points contribute 0
    const double mean = sum / static_cast<double>(total);
    const double var =
        std::max(0.0, sum_sq / static_cast<double>(total) - mean * mean);
    LevelEstimate est;
    est.level = level;
    est.integral = vol * mean;
    est.std_error = vol * std::sqrt(var / static_cast<double>(total));
    (void)accepted;
    return est;
}

template <typename DensityFn, typename IntegrandFn>
Theorem1Result run_theorem1(const Theorem1Options& opts, double quad_min_eig,
                            double linear_bound, const DensityFn& rho,
                            const IntegrandFn& integrand) {
    if (!(quad_min_eig > 0.0))
        throw std::invalid_argument("theorem1_check: density is not positive definite");
    Theorem1Result out;
    bool all_negative = true;
    bool any_positive = false;
    for (double c : opts.levels) {
        // conservative bounding radius of {rho <= c}:
        // lam |x|^2 - b |x| <= c  =>  |x| <= (b + sqrt(b^2 + 4 lam c)) / (2 lam)
        const double lam = quad_min_eig, b = linear_bound;
        const double radius = 1.5 * (b + std::sqrt(b * b + 4.0 * lam * c)) / (2.0 * lam) + 1e-9;
        LevelEstimate est = mc_level(c, radius, opts.samples, opts.seed, rho, integrand);
        out.levels.push_back(est);
        if (!(est.integral < -3.0 * est.std_error)) all_negative = false;
        if (est.integral > 3.0 * est.std_error) any_positive = true;
    }
    out.verdict = all_negative ? Theorem1Verdict::NecessaryConsistent
                  : any_positive ? Theorem1Verdict::Violated
                                 : Theorem1Verdict::Inconclusive;
    return out;
}

}  // namespace

Theorem2Result theorem2_check_structured(const GovernorParams& params, double alpha,
                                         const Theorem2Options& opts) {
    StructuredDensity d{params, alpha};
    d.validate();
    const Mat4 W = build_w_form<double>(params, alpha);
    const double scale = std::max(W.norm(), 1e-30);
    Theorem2Result out;

    if (W.norm() <= 1e-14 * std::max(1.0, params.A + params.B)) {
        out.holds = true;
        out.boundary_case = true;
        return out;
    }

    // analytic route: with the relay coordinate fixed at s = +-1 the form is
    // q(x) = x'W3x + 2 s b'x + W44; eigenvalue analysis of W3 bounds it
    const Mat3 W3 = W.topLeftCorner<3, 3>();
    const Vec3 b = W.topRightCorner<3, 1>();
    const double w44 = W(3, 3);
    const auto eg = eig_symmetric(W3);
    const double tol_zero = 1e-12 * scale;

    bool bounded = true;
    double qmax = w44;
    std::optional<Vec4> witness;
    for (int i = 0; i < 3 && !witness; ++i) {
        const double lam = eg.values[i];
        const Vec3 v = eg.vectors.col(i);
        const double bv = b.dot(v);
        if (lam > tol_zero) {
            bounded = false;
            // grows quadratically along v
            for (double s : {1.0, -1.0}) {
                double t = (1.0 + std::abs(bv) + std::sqrt(std::abs(w44) * lam + 1.0)) / lam;
                for (int it = 0; it < 80; ++it, t *= 2.0) {
                    const double q = lam * t * t + 2.0 * s * bv * t + w44;
                    if (q > tol_zero) {
                        witness = Vec4(t * v[0], t * v[1], t * v[2], s);
                        break;
                    }
                }
                if (witness) break;
            }
        } else if (lam > -tol_zero) {
            if (std::abs(bv) > tol_zero) {
                bounded = false;
                // grows linearly along v on the sheet aligned with b'v
                for (double s : {1.0, -1.0}) {
                    double t = s * bv > 0 ? (1.0 + std::abs(w44)) / std::abs(bv) : 0.0;
                    if (t == 0.0) continue;
                    for (int it = 0; it < 80; ++it, t *= 2.0) {
                        const double q = lam * t * t + 2.0 * s * bv * t + w44;
                        if (q > tol_zero) {
                            witness = Vec4(t * v[0], t * v[1], t * v[2], s);
                            break;
                        }
                    }
                    if (witness) break;
                }
                if (!witness) bounded = true;  // the tiny negative curvature wins
            }
        } else {
            qmax -= (bv * bv) / lam;  // lam < 0: positive contribution
        }
    }
    out.analytic_max = bounded ? qmax : std::numeric_limits<double>::infinity();
    bool analytic_holds = bounded && qmax <= opts.tol * scale;

    // sampling oracle: radii spread around the unit sphere, both relay sheets
    double sampled_max = -std::numeric_limits<double>::infinity();
    Vec4 sampled_arg = Vec4::Zero();
    const double radii[3] = {0.1, 1.0, 10.0};
    SplitMix64 rng(opts.seed);
    for (int i = 0; i < opts.samples; ++i) {
        const Vec3 u = rng.unit_vector() * radii[i % 3];
        for (double s : {1.0, -1.0}) {
            Vec4 z(u[0], u[1], u[2], s);
            const double q = z.dot(W * z);
            if (q > sampled_max) {
                sampled_max = q;
                sampled_arg = z;
            }
        }
    }
    out.sampled_max = sampled_max;
    if (sampled_max > 1e-7 * scale && analytic_holds) {
        // oracle disagrees: trust the explicit counterexample
        analytic_holds = false;
        witness = sampled_arg;
    }
    if (!analytic_holds && !witness) witness = sampled_arg;

    out.holds = analytic_holds;
    out.witness = out.holds ? std::nullopt : witness;
    return out;
}

Theorem1Result theorem1_check_structured(const GovernorParams& params, double alpha,
                                         const Theorem1Options& opts) {
    StructuredDensity d{params, alpha};
    d.validate();
    const Mat4 W = build_w_form<double>(params, alpha);
    const double divf = divergence_of_field(params);
    const Mat3 P = structured_quadratic_part(d);
    const double lam = eig_min(P);
    // |grad of the affine part| <= k * |q|, bounded by the gradient at 0
    const double b = std::max(grad_structured_density<double>(d, Vec3::Zero(), +1).norm(),
                              grad_structured_density<double>(d, Vec3::Zero(), -1).norm());
    auto rho = [&](const Vec3& x) { return eval_structured_density<double>(d, x); };
    auto integrand = [&](const Vec3& x) {
        return w_form_value<double>(W, x) + rho(x) * divf;
    };
    return run_theorem1(opts, lam, b, rho, integrand);
}

Theorem1Result theorem1_check_quadratic(const GovernorParams& params, const QuadraticDensity& q,
                                        const Theorem1Options& opts) {
    q.validate_symmetric();
    const LurieSystem sys = build_system(params);
    const double lam = eig_min(q.Q);
    auto rho = [&](const Vec3& x) { return x.dot(q.Q * x); };
    auto integrand = [&](const Vec3& x) {
        const double phi = relay_off_surface(x[1]);
        return quadratic_divergence_difference(sys, q, x, phi) +
               rho(x) * divergence_of_field(params);
    };
    return run_theorem1(opts, lam, 0.0, rho, integrand);
}

std::string verdict_record_json(const GovernorParams& params, const std::string& method,
                                const std::string& verdict, std::optional<double> alpha,
                                const std::optional<Mat3>& Q,
                                const std::optional<Vec4>& witness) {
    nlohmann::json j;
    j["params"] = {{"A", params.A}, {"B", params.B}, {"C", params.C}, {"k", params.k}};
    j["method"] = method;
    j["verdict"] = verdict;
    if (alpha) j["alpha"] = *alpha;
    if (Q) {
        std::vector<double> upper;
        for (int i = 0; i < 3; ++i)
            for (int k = i; k < 3; ++k) upper.push_back((*Q)(i, k));
        j["Q_upper"] = upper;
    }
    if (witness) j["witness"] = {(*witness)[0], (*witness)[1], (*witness)[2], (*witness)[3]};
    return j.dump(2);
}

}  // namespace divgov
