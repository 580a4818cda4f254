#pragma once

#include "divgov/density.hpp"
#include "divgov/governor.hpp"
#include "divgov/types.hpp"

#include <cstdint>
#include <stdexcept>

namespace divgov {

/// Feasibility problem: find Q = Q' with min eig(Q) >= eps_pd and tau >= 0
/// such that max eig(F(Q, tau)) <= -eps_nd, with Q held at unit Frobenius
/// norm (feasibility is invariant under joint scaling of Q and tau).
struct LmiProblem {
    LurieSystem sys;
    double eps_pd = 1e-6;
    double eps_nd = 1e-8;
    double scale_cap = 1e6;  // bound on tau and Q entries after normalization
    int restarts = 20;
    int max_iters = 2000;    // subgradient iterations per restart
    int stall_iters = 200;   // no-improvement window that declares a stall
    std::uint64_t seed = 0x1c0ffee5eedULL;

    void validate() const {
        if (!(eps_pd > 0.0)) throw std::invalid_argument("LmiProblem: eps_pd must be > 0");
        if (!(eps_nd >= 0.0)) throw std::invalid_argument("LmiProblem: eps_nd must be >= 0");
        if (!(scale_cap >= 1.0)) throw std::invalid_argument("LmiProblem: scale_cap must be >= 1");
        if (restarts < 1 || max_iters < 1 || stall_iters < 1)
            throw std::invalid_argument("LmiProblem: iteration counts must be positive");
    }
};

enum class LmiVerdict { Feasible, Infeasible, Undetermined };

inline const char* to_string(LmiVerdict v) {
    switch (v) {
        case LmiVerdict::Feasible: return "feasible";
        case LmiVerdict::Infeasible: return "infeasible";
        case LmiVerdict::Undetermined: return "undetermined";
    }
    return "?";
}

struct LmiResult {
    LmiVerdict verdict = LmiVerdict::Undetermined;
    Mat3 Q = Mat3::Identity();  // certificate iff feasible
    double tau = 1.0;
    double margin_q = 0.0;      // min eig of Q
    double margin_f = 0.0;      // max eig of F(Q, tau)
    long iterations = 0;
    int winning_restart = -1;

    bool feasible() const { return verdict == LmiVerdict::Feasible; }
};

/// Independent certificate check: rebuilds F from scratch and tests both
/// eigenvalue margins with the Jacobi eigensolver.
bool verify_certificate(const LurieSystem& sys, const Mat3& Q, double tau, double eps_pd,
                        double eps_nd);

/// Spectral-penalty subgradient search over the 6 free entries of Q plus tau,
/// restarted from deterministic seeds. Feasible verdicts always carry a
/// certificate that re-verifies; infeasible means every restart stalled with
/// a positive penalty.
LmiResult solve_feasibility(const LmiProblem& p);

/// Lyapunov-equation seed: solves H'Q + QH = -I for symmetric Q. Returns
/// false if the 6x6 system is ill-conditioned (near-imaginary-axis spectrum).
bool lyapunov_candidate(const Mat3& H, Mat3& Q_out);

}  // namespace divgov
