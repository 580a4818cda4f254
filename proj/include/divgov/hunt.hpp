#pragma once

#include "divgov/governor.hpp"
#include "divgov/integrate.hpp"
#include "divgov/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace divgov {

enum class Outcome { Stationary, Cycle, Divergent, Undecided };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Stationary: return "stationary";
        case Outcome::Cycle: return "cycle";
        case Outcome::Divergent: return "divergent";
        case Outcome::Undecided: return "undecided";
    }
    return "?";
}

enum class StartOrigin { Grid, Random, NearSet, CycleRefined };

inline const char* to_string(StartOrigin o) {
    switch (o) {
        case StartOrigin::Grid: return "grid";
        case StartOrigin::Random: return "random";
        case StartOrigin::NearSet: return "near-set";
        case StartOrigin::CycleRefined: return "cycle-refined";
    }
    return "?";
}

struct StartRecord {
    Vec3 x0;
    StartOrigin origin;
    Outcome outcome;
    double final_distance;  // to the stationary set
};

struct CycleEstimate {
    double period = 0.0;
    double period_dispersion = 0.0;  // stddev of the averaged intervals
    double amplitude = 0.0;          // max |x2| over the final period
    double section_drift = 0.0;      // max pairwise distance of the last section points
    Vec3 section_state;              // point on the cycle at an upward crossing
    std::vector<Eigen::Vector2d> section_points;  // (x1, x3) at upward crossings
};

struct HuntConfig {
    double tol_set = 1e-4;
    double tol_cycle = 1e-5;
    double divergence_cap = 1e4;
    // The dry-friction creep along the sliding band contracts like 1/t, so
    // settling below tol_set needs simulated horizons in the thousands; the
    // sliding segments integrate in closed form, which keeps this cheap.
    double horizon = 20000.0;
    int grid_points_per_axis = 5;
    double grid_extent = 5.0;
    int random_starts = 50;
    double random_radius = 10.0;
    double near_set_offset = 1e-3;
    std::uint64_t seed = 0xd1f09e11ULL;
    unsigned threads = 0;  // 0 = hardware default
    IntegratorConfig integ;

    void validate() const {
        if (!(tol_set > 0.0 && tol_cycle > 0.0 && divergence_cap > 0.0 && horizon > 0.0))
            throw std::invalid_argument("HuntConfig: tolerances must be positive");
        integ.validate();
    }
};

struct OscillationReport {
    GovernorParams params;
    std::vector<StartRecord> starts;
    std::optional<CycleEstimate> cycle;
    bool hidden = false;
    bool all_undecided = false;  // warning flag

    bool any_outcome(Outcome o) const {
        for (const auto& s : starts)
            if (s.outcome == o) return true;
        return false;
    }
};

/// Classifies a finished (or budget-terminated) trajectory:
///   stationary - final state within tol_set of the stationary set, moving
///                slower than tol_set;
///   cycle      - the last 5 upward crossings have section points pairwise
///                within tol_cycle, all further than 10 tol_set from the set;
///   divergent  - the state norm exceeded the cap;
///   undecided  - anything else.
Outcome classify_trajectory(const Trajectory& traj, const GovernorParams& params, double tol_set,
                            double tol_cycle, double divergence_cap = 1e4);

/// Period and amplitude of a detected cycle from the trajectory's upward
/// crossings. Throws if fewer than 5 crossings are present or the section
/// has not converged to tol_cycle.
CycleEstimate estimate_cycle(const Trajectory& traj, double tol_cycle);

/// Multi-start classification plus saddle-cycle refinement. A coexisting
/// oscillation is located by bisecting between a bounded and a divergent
/// start (the basin boundary carries the cycle's stable manifold) and then
/// solving the Poincare return map for its fixed point.
OscillationReport hunt(const GovernorParams& params, const HuntConfig& cfg = {});

}  // namespace divgov
