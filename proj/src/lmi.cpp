#include "divgov/lmi.hpp"

#include "divgov/jacobi.hpp"
#include "divgov/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace divgov {

namespace {

// symmetric 3x3 packed as (00, 01, 02, 11, 12, 22)
constexpr int kIdx[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};

Mat3 unpack(const Eigen::Matrix<double, 6, 1>& q) {
    Mat3 Q;
    for (int n = 0; n < 6; ++n) {
        Q(kIdx[n][0], kIdx[n][1]) = q[n];
        Q(kIdx[n][1], kIdx[n][0]) = q[n];
    }
    return Q;
}

Eigen::Matrix<double, 6, 1> pack(const Mat3& Q) {
    Eigen::Matrix<double, 6, 1> q;
    for (int n = 0; n < 6; ++n) q[n] = Q(kIdx[n][0], kIdx[n][1]);
    return q;
}

struct Penalty {
    double value;
    Eigen::Matrix<double, 7, 1> grad;  // 6 entries of Q, then tau
    double eig_min_q;
    double eig_max_f;
};

Penalty evaluate(const LurieSystem& sys, const Mat3& Q, double tau, double eps_pd,
                 double eps_nd) {
    Penalty out;
    out.grad.setZero();

    Mat4 F = Mat4::Zero();
    F.topLeftCorner<3, 3>() = sys.H.transpose() * Q + Q * sys.H;
    const Vec3 g = Q * sys.G;
    F.topRightCorner<3, 1>() = g;
    F.bottomLeftCorner<1, 3>() = g.transpose();
    F(3, 3) = -tau;

    const auto ef = eig_symmetric(F);
    const auto eq = eig_symmetric(Q);
    out.eig_max_f = ef.values[3];
    out.eig_min_q = eq.values[0];

    double value = 0.0;
    if (out.eig_max_f + eps_nd > 0.0) {
        value += out.eig_max_f + eps_nd;
        const Vec4 v = ef.vectors.col(3);
        const Vec3 u = v.head<3>();
        const double w = v[3];
        const Vec3 Hu = sys.H * u;
        for (int n = 0; n < 6; ++n) {
            const int i = kIdx[n][0], j = kIdx[n][1];
            double d;
            if (i == j)
                d = 2.0 * Hu[i] * u[i] + 2.0 * w * u[i] * sys.G[i];
            else
                d = 2.0 * (Hu[i] * u[j] + Hu[j] * u[i]) +
                    2.0 * w * (u[i] * sys.G[j] + u[j] * sys.G[i]);
            out.grad[n] += d;
        }
        out.grad[6] += -w * w;
    }
    if (eps_pd - out.eig_min_q > 0.0) {
        value += eps_pd - out.eig_min_q;
        const Vec3 p = eq.vectors.col(0);
        for (int n = 0; n < 6; ++n) {
            const int i = kIdx[n][0], j = kIdx[n][1];
            out.grad[n] += (i == j) ? -p[i] * p[i] : -2.0 * p[i] * p[j];
        }
    }
    out.value = value;
    return out;
}

struct RestartOutcome {
    bool feasible = false;
    bool stalled = false;  // positive penalty, no progress for stall_iters
    Mat3 Q;
    double tau = 1.0;
    double best_value = 0.0;
    long iterations = 0;
};

RestartOutcome run_restart(const LmiProblem& p, Mat3 Q, double tau) {
    RestartOutcome out;
    // joint normalization keeps the scale-invariant problem on the unit
    // Frobenius sphere
    auto normalize = [&](Mat3& Qm, double& t) {
        const double n = Qm.norm();
        if (n > 1e-300) {
            Qm /= n;
            t /= n;
        }
        t = std::clamp(t, 0.0, p.scale_cap);
    };
    normalize(Q, tau);

    double best = std::numeric_limits<double>::infinity();
    int since_improve = 0;
    for (int it = 0; it < p.max_iters; ++it) {
        ++out.iterations;
        const Penalty pen = evaluate(p.sys, Q, tau, p.eps_pd, p.eps_nd);
        if (pen.value <= 0.0) {
            out.feasible = true;
            out.Q = Q;
            out.tau = tau;
            out.best_value = 0.0;
            return out;
        }
        if (pen.value < best - 1e-12 * (1.0 + best)) {
            best = pen.value;
            out.Q = Q;
            out.tau = tau;
            since_improve = 0;
        } else if (++since_improve >= p.stall_iters) {
            out.stalled = true;
            out.best_value = best;
            return out;
        }
        const double g2 = pen.grad.squaredNorm();
        if (g2 < 1e-28) {  // flat: nothing to move along
            out.stalled = true;
            out.best_value = best;
            return out;
        }
        const double step = pen.value / g2;  // Polyak step toward target 0
        Eigen::Matrix<double, 6, 1> q = pack(Q) - step * pen.grad.head<6>();
        tau -= step * pen.grad[6];
        Q = unpack(q);
        normalize(Q, tau);
    }
    out.best_value = best;
    return out;  // budget exhausted while still improving
}

}  // namespace

bool lyapunov_candidate(const Mat3& H, Mat3& Q_out) {
    Eigen::Matrix<double, 6, 6> L;
    for (int n = 0; n < 6; ++n) {
        Mat3 E = Mat3::Zero();
        E(kIdx[n][0], kIdx[n][1]) = 1.0;
        E(kIdx[n][1], kIdx[n][0]) = 1.0;
        L.col(n) = pack(H.transpose() * E + E * H);
    }
    const Eigen::Matrix<double, 6, 1> rhs = pack(-Mat3::Identity());
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(L);
    if (!lu.isInvertible()) return false;
    const Eigen::Matrix<double, 6, 1> q = lu.solve(rhs);
    if ((L * q - rhs).norm() > 1e-8 * rhs.norm()) return false;
    Q_out = unpack(q);
    return Q_out.allFinite();
}

bool verify_certificate(const LurieSystem& sys, const Mat3& Q, double tau, double eps_pd,
                        double eps_nd) {
    if (!(tau >= 0.0) || !Q.allFinite()) return false;
    if ((Q - Q.transpose()).norm() > 1e-12 * std::max(1.0, Q.norm())) return false;
    QuadraticDensity qd{0.5 * (Q + Q.transpose())};
    const Mat4 F = build_f_form(sys, qd, tau);
    const double min_q = eig_min(qd.Q);
    const double max_f = eig_max(F);
    return min_q >= eps_pd && max_f <= -eps_nd;
}

LmiResult solve_feasibility(const LmiProblem& p) {
    p.validate();
    LmiResult res;

    // deterministic restart seeds; the Lyapunov candidate solves the strictly
    // feasible cases in one evaluation
    std::array<std::pair<Mat3, double>, 20> seeds;
    int n_seeds = 0;
    seeds[n_seeds++] = {Mat3::Identity(), 1.0};
    {
        Mat3 Qlyap;
        if (lyapunov_candidate(p.sys.H, Qlyap) && eig_min(Qlyap) > 0.0) {
            const Mat3 M = p.sys.H.transpose() * Qlyap + Qlyap * p.sys.H;
            const Vec3 g = Qlyap * p.sys.G;
            // Schur complement: with M < 0 any tau above g' (-M)^-1 g closes F
            const double tau0 = 2.0 * std::abs(g.dot(M.fullPivLu().solve(g))) + 1.0;
            seeds[n_seeds++] = {Qlyap, tau0};
        } else {
            seeds[n_seeds++] = {Mat3::Identity(), 2.0};
        }
    }
    const double diags[4][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}, {1, 4, 0.5}};
    for (const auto& d : diags)
        seeds[n_seeds++] = {Vec3(d[0], d[1], d[2]).asDiagonal().toDenseMatrix(), 1.0};
    while (n_seeds < p.restarts) {
        SplitMix64 rng(child_seed(p.seed, static_cast<std::uint64_t>(n_seeds)));
        Mat3 Lr;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) Lr(i, j) = rng.uniform(-1.0, 1.0);
        Mat3 Qr = Lr * Lr.transpose() + 0.1 * Mat3::Identity();
        seeds[n_seeds++] = {Qr, rng.uniform(0.1, 10.0)};
    }

    bool any_budget_out = false;
    double best_penalty = std::numeric_limits<double>::infinity();
    Mat3 best_Q = Mat3::Identity();
    double best_tau = 1.0;

    // restarts are independent; trying them in seed order with first-success
    // exit gives the same winner as a concurrent merge by seed index
    for (int r = 0; r < p.restarts; ++r) {
        RestartOutcome oc = run_restart(p, seeds[r].first, seeds[r].second);
        res.iterations += oc.iterations;
        if (oc.feasible && verify_certificate(p.sys, oc.Q, oc.tau, p.eps_pd, p.eps_nd)) {
            res.verdict = LmiVerdict::Feasible;
            res.Q = oc.Q;
            res.tau = oc.tau;
            res.winning_restart = r;
            res.margin_q = eig_min(res.Q);
            res.margin_f = eig_max(build_f_form(p.sys, QuadraticDensity{res.Q}, res.tau));
            return res;
        }
        if (!oc.stalled && !oc.feasible) any_budget_out = true;
        if (oc.best_value < best_penalty) {
            best_penalty = oc.best_value;
            best_Q = oc.Q;
            best_tau = oc.tau;
        }
    }

    res.verdict = any_budget_out ? LmiVerdict::Undetermined : LmiVerdict::Infeasible;
    res.Q = best_Q;
    res.tau = best_tau;
    res.margin_q = eig_min(best_Q);
    res.margin_f = eig_max(build_f_form(p.sys, QuadraticDensity{0.5 * (best_Q + best_Q.transpose())}, best_tau));
    return res;
}

}  // namespace divgov
