#include "divgov/hunt.hpp"

#include "divgov/parallel.hpp"
#include "divgov/rng.hpp"

#include <algorithm>
#include <cmath>

namespace divgov {

namespace {

struct CrossingList {
    std::vector<double> times;
    std::vector<Eigen::Vector2d> points;  // (x1, x3)
    std::vector<Vec3> states;
};

CrossingList upward_crossings(const Trajectory& traj) {
    CrossingList c;
    for (const auto& e : traj.events) {
        if (e.kind == EventKind::Crossing && e.upward) {
            c.times.push_back(e.t);
            c.points.emplace_back(e.state[0], e.state[2]);
            c.states.push_back(e.state);
        }
    }
    return c;
}

double max_pairwise(const std::vector<Eigen::Vector2d>& pts, std::size_t lo, std::size_t hi) {
    double m = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
        for (std::size_t j = i + 1; j < hi; ++j)
            m = std::max(m, (pts[i] - pts[j]).norm());
    return m;
}

double final_speed(const LurieSystem& sys, const Trajectory& traj) {
    const Vec3& x = traj.final_state();
    if (traj.final_mode() == Mode::Sliding)
        return std::abs(-x[0] - sys.params.C * x[2]);
    return vector_field(sys, x, relay_off_surface(x[1])).norm();
}

struct RefinedCycle {
    Vec3 section_state;
    double period;
};

/// Newton iteration on the upward-crossing return map, seeded near the
/// basin boundary. Returns nullopt if the map cannot be evaluated (sliding,
/// divergence) or the iteration does not settle.
std::optional<RefinedCycle> refine_cycle_fixed_point(const LurieSystem& sys, Vec3 seed,
                                                     const IntegratorConfig& integ) {
    IntegratorConfig cfg = integ;
    cfg.max_norm = 1e8;
    Eigen::Vector2d s(seed[0], seed[2]);
    double period = 0.0;

    auto map = [&](const Eigen::Vector2d& p, Eigen::Vector2d& out, double& rt) {
        const ReturnMapResult r = poincare_return(sys, Vec3(p[0], 0.0, p[1]), cfg, 100.0);
        if (!r.ok) return false;
        out = Eigen::Vector2d(r.state[0], r.state[2]);
        rt = r.return_time;
        return true;
    };

    for (int it = 0; it < 25; ++it) {
        Eigen::Vector2d Ps;
        if (!map(s, Ps, period)) return std::nullopt;
        const Eigen::Vector2d F = Ps - s;
        if (F.norm() < 1e-11 * (1.0 + s.norm()))
            return RefinedCycle{Vec3(s[0], 0.0, s[1]), period};
        Eigen::Matrix2d J;
        const double h = 1e-7 * (1.0 + s.norm());
        for (int j = 0; j < 2; ++j) {
            Eigen::Vector2d sp = s;
            sp[j] += h;
            Eigen::Vector2d Pp;
            double rt;
            if (!map(sp, Pp, rt)) return std::nullopt;
            J.col(j) = (Pp - Ps) / h;
        }
        const Eigen::Matrix2d A = J - Eigen::Matrix2d::Identity();
        if (std::abs(A.determinant()) < 1e-14) return std::nullopt;
        const Eigen::Vector2d ds = A.partialPivLu().solve(-F);
        if (!ds.allFinite() || ds.norm() > 0.5 * (1.0 + s.norm())) return std::nullopt;
        s += ds;
    }
    return std::nullopt;
}

}  // namespace

Outcome classify_trajectory(const Trajectory& traj, const GovernorParams& params, double tol_set,
                            double tol_cycle, double divergence_cap) {
    if (traj.states.empty()) return Outcome::Undecided;
    if (traj.diverged) return Outcome::Divergent;
    for (const auto& x : traj.states)
        if (x.norm() > divergence_cap) return Outcome::Divergent;

    const StationarySet set = stationary_set(params);
    const LurieSystem sys = build_system(params);
    if (set.distance(traj.final_state()) < tol_set && final_speed(sys, traj) < tol_set)
        return Outcome::Stationary;

    const CrossingList c = upward_crossings(traj);
    if (c.points.size() >= 5) {
        const std::size_t n = c.points.size();
        if (max_pairwise(c.points, n - 5, n) <= tol_cycle) {
            double min_dist = std::numeric_limits<double>::infinity();
            for (std::size_t i = n - 5; i < n; ++i)
                min_dist = std::min(min_dist, set.distance(c.states[i]));
            if (min_dist > 10.0 * tol_set) return Outcome::Cycle;
        }
    }
    return Outcome::Undecided;
}

CycleEstimate estimate_cycle(const Trajectory& traj, double tol_cycle) {
    const CrossingList c = upward_crossings(traj);
    const std::size_t n = c.points.size();
    if (n < 5) throw std::invalid_argument("estimate_cycle: fewer than 5 upward crossings");
    const double drift = max_pairwise(c.points, n - 5, n);
    if (drift > tol_cycle)
        throw std::invalid_argument("estimate_cycle: section points have not converged");

    CycleEstimate est;
    est.section_drift = drift;
    double mean = 0.0;
    std::array<double, 4> intervals{};
    for (int i = 0; i < 4; ++i) {
        intervals[i] = c.times[n - 4 + i] - c.times[n - 5 + i];
        mean += intervals[i];
    }
    mean /= 4.0;
    double var = 0.0;
    for (double iv : intervals) var += (iv - mean) * (iv - mean);
    est.period = mean;
    est.period_dispersion = std::sqrt(var / 4.0);
    est.section_state = c.states[n - 1];
    est.section_points.assign(c.points.end() - std::min<std::size_t>(n, 16), c.points.end());

    // amplitude: max |x2| over the final period
    const double t_end = traj.final_time();
    double amp = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        if (traj.times[i] >= t_end - mean) amp = std::max(amp, std::abs(traj.states[i][1]));
    est.amplitude = amp;
    return est;
}

OscillationReport hunt(const GovernorParams& params, const HuntConfig& cfg) {
    params.validate();
    cfg.validate();
    const LurieSystem sys = build_system(params);
    const StationarySet set = stationary_set(params);

    OscillationReport rep;
    rep.params = params;

    // deterministic start list: grid, seeded random ball, near-set probes
    std::vector<StartRecord> starts;
    const int g = cfg.grid_points_per_axis;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
            for (int l = 0; l < g; ++l) {
                auto coord = [&](int idx) {
                    return g == 1 ? 0.0 : -cfg.grid_extent + 2.0 * cfg.grid_extent * idx / (g - 1);
                };
                starts.push_back({Vec3(coord(i), coord(j), coord(l)), StartOrigin::Grid,
                                  Outcome::Undecided, 0.0});
            }
    SplitMix64 rng(cfg.seed);
    for (int i = 0; i < cfg.random_starts; ++i)
        starts.push_back({rng.in_ball(cfg.random_radius), StartOrigin::Random,
                          Outcome::Undecided, 0.0});
    {
        const double d = cfg.near_set_offset;
        const double m = set.x3_extent();
        const double dx3 = d / std::sqrt(1.0 + params.C * params.C);
        const Vec3 probes[6] = {
            Vec3(d, 0.0, 0.0),  Vec3(-d, 0.0, 0.0), Vec3(0.0, d, 0.0), Vec3(0.0, -d, 0.0),
            Vec3(-params.C * (m + dx3), 0.0, m + dx3),
            Vec3(params.C * (m + dx3), 0.0, -(m + dx3))};
        for (const auto& p : probes)
            starts.push_back({p, StartOrigin::NearSet, Outcome::Undecided, 0.0});
    }

    IntegratorConfig integ = cfg.integ;
    integ.max_time = cfg.horizon;
    integ.max_norm = cfg.divergence_cap;  // stop early once clearly escaping

    parallel_for(starts.size(), [&](std::size_t i) {
        const Trajectory traj = integrate(sys, starts[i].x0, integ);
        starts[i].outcome =
            classify_trajectory(traj, params, cfg.tol_set, cfg.tol_cycle, cfg.divergence_cap);
        starts[i].final_distance = set.distance(traj.final_state());
    }, cfg.threads);

    // saddle-cycle refinement: the basin boundary between a bounded and a
    // divergent start carries the cycle; bisect onto it, then solve the
    // return map for its fixed point
    int i_bounded = -1, i_divergent = -1;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (starts[i].outcome == Outcome::Divergent) {
            if (i_divergent < 0) i_divergent = static_cast<int>(i);
        } else if (i_bounded < 0) {
            i_bounded = static_cast<int>(i);
        }
    }

    std::optional<CycleEstimate> cycle;
    if (i_bounded >= 0 && i_divergent >= 0) {
        IntegratorConfig probe = integ;
        probe.max_time = 600.0;
        const Vec3 a = starts[i_bounded].x0;
        const Vec3 b = starts[i_divergent].x0;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60 && (hi - lo) > 1e-16; ++it) {
            const double mid = 0.5 * (lo + hi);
            const Trajectory t = integrate(sys, a + mid * (b - a), probe);
            const bool esc = t.diverged;
            (esc ? hi : lo) = mid;
        }
        // shadow run along the boundary: its late upward crossings land next
        // to the cycle's section point
        const Trajectory shadow = integrate(sys, a + lo * (b - a), probe);
        const CrossingList sc = upward_crossings(shadow);
        std::optional<RefinedCycle> fixed;
        for (std::size_t back = 0; back < sc.states.size() && !fixed; ++back) {
            const Vec3 seed = sc.states[sc.states.size() - 1 - back];
            if (set.distance(seed) <= 10.0 * cfg.tol_set) continue;
            fixed = refine_cycle_fixed_point(sys, seed, cfg.integ);
        }
        if (fixed) {
            // integrate from the fixed point long enough to certify the
            // section and measure period and amplitude; the residual drift
            // stays far below tol_cycle for tens of turns
            IntegratorConfig vcfg = cfg.integ;
            vcfg.max_time = std::max(45.0 * fixed->period, 50.0);
            vcfg.max_norm = cfg.divergence_cap;
            const Trajectory orbit = integrate(sys, fixed->section_state, vcfg);
            const Outcome oc =
                classify_trajectory(orbit, params, cfg.tol_set, cfg.tol_cycle, cfg.divergence_cap);
            StartRecord rec{fixed->section_state, StartOrigin::CycleRefined, oc,
                            set.distance(orbit.final_state())};
            starts.push_back(rec);
            if (oc == Outcome::Cycle) cycle = estimate_cycle(orbit, cfg.tol_cycle);
        }
    }

    rep.starts = std::move(starts);
    rep.cycle = cycle;

    bool near_set_stationary = false;
    bool any_cycle = false;
    bool any_decided = false;
    for (const auto& s : rep.starts) {
        if (s.origin == StartOrigin::NearSet && s.outcome == Outcome::Stationary)
            near_set_stationary = true;
        if (s.outcome == Outcome::Cycle) any_cycle = true;
        if (s.outcome != Outcome::Undecided) any_decided = true;
    }
    rep.hidden = near_set_stationary && any_cycle;
    rep.all_undecided = !any_decided;
    return rep;
}

}  // namespace divgov
