#include "divgov/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace divgov {

namespace {

constexpr double kOffSurfaceMaxStep = 0.2;  // keeps crossings from being stepped over

struct Driver {
    const LurieSystem& sys;
    IntegratorConfig cfg;
    bool record = true;
    bool stop_at_upward = false;
    double horizon;

    Trajectory traj;
    bool stopped_upward = false;

    double t = 0.0;
    Vec3 x;
    Mode mode = Mode::Above;
    double h = 1e-4;
    double guard_end = -1.0;  // ghost-crossing window after a sliding exit
    std::int64_t steps = 0;

    Driver(const LurieSystem& s, const Vec3& x0, const IntegratorConfig& c, bool rec,
           bool stop_up, double hor)
        : sys(s), cfg(c), record(rec), stop_at_upward(stop_up), horizon(hor), x(x0) {}

    double band_gap(const Vec3& y) const {
        return sys.params.k - std::abs(sys.params.A * y[0] - y[2]);
    }

    void sample() {
        if (!record) return;
        if (!traj.times.empty() && t <= traj.times.back()) {
            // keep sample times strictly increasing; snap events replace the
            // last sample instead of duplicating it
            traj.states.back() = x;
            traj.modes.back() = mode;
            return;
        }
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.modes.push_back(mode);
    }

    void event(EventKind kind, bool upward = false) {
        traj.events.push_back(Event{t, kind, x, upward});
    }

    bool check_divergence() {
        if (!all_finite(x) || x.norm() > cfg.max_norm) {
            traj.diverged = true;
            traj.escape_time = t;
            event(EventKind::Termination);
            sample();
            return true;
        }
        return false;
    }

    void init_mode() {
        if (std::abs(x[1]) <= cfg.event_tol) {
            x[1] = 0.0;
            if (band_gap(x) >= 0.0) {
                mode = Mode::Sliding;
                event(EventKind::SlidingEntry);
            } else {
                // off the band both one-sided fields share the sign of x3 - A*x1
                mode = (x[2] - sys.params.A * x[0] > 0.0) ? Mode::Above : Mode::Below;
            }
        } else {
            mode = x[1] > 0.0 ? Mode::Above : Mode::Below;
        }
    }

    /// Closed-form sliding segment: x1 frozen, x3' = -x1 - C*x3. Returns true
    /// if the run should stop (horizon reached).
    bool run_sliding() {
        const double A = sys.params.A, C = sys.params.C, k = sys.params.k;
        const double x1 = x[0];
        const double x30 = x[2];
        const double remaining = horizon - t;

        auto x3_at = [&](double tau) {
            if (C == 0.0) return x30 - x1 * tau;
            const double xinf = -x1 / C;
            return xinf + (x30 - xinf) * std::exp(-C * tau);
        };

        // exit time: x3 reaches the nearer band edge A*x1 -+ k, if ever
        double tau_exit = -1.0;
        if (C == 0.0) {
            if (x1 != 0.0) {
                const double tgt = (x1 > 0.0) ? A * x1 - k : A * x1 + k;
                tau_exit = (x30 - tgt) / x1;
                if (tau_exit <= 0.0) tau_exit = 0.0;
            }
        } else {
            const double xinf = -x1 / C;
            const double lo = A * x1 - k, hi = A * x1 + k;
            if (xinf < lo - 1e-300 || xinf > hi + 1e-300) {
                const double tgt = (xinf < lo) ? lo : hi;
                const double ratio = (tgt - xinf) / (x30 - xinf);
                if (ratio > 0.0 && ratio < 1.0) tau_exit = -std::log(ratio) / C;
                else if (ratio >= 1.0) tau_exit = 0.0;
            }
            // xinf inside the band: the segment converges into the stationary set
        }

        const bool exits = tau_exit >= 0.0 && tau_exit < remaining;
        const double tau_end = exits ? tau_exit : remaining;
        const double t0 = t;

        if (record && tau_end > 0.0) {
            // a few intermediate samples so exported segments are visible
            const int n = 8;
            for (int i = 1; i < n; ++i) {
                const double tau = tau_end * i / n;
                t = t0 + tau;
                x[2] = x3_at(tau);
                sample();
            }
        }
        t = t0 + tau_end;
        x[2] = x3_at(tau_end);
        x[1] = 0.0;

        sample();
        if (!exits) {
            traj.complete = true;
            event(EventKind::Termination);
            return true;
        }
        // leave tangentially on the side where the equivalent relay saturated
        const double s = A * x[0] - x[2];
        mode = (s >= 0.0) ? Mode::Below : Mode::Above;
        event(EventKind::SlidingExit);
        sample();
        guard_end = t + 10.0 * cfg.event_tol;
        h = std::min(h, 1e-3);
        return false;
    }

    /// One adaptive off-surface step with crossing detection. Returns true if
    /// the run should stop.
    bool run_off_surface() {
        const double phi = (mode == Mode::Above) ? -1.0 : 1.0;
        auto f = [&](const Vec3& y) -> Vec3 { return sys.H * y + sys.G * phi; };

        Vec3 ynew, err;
        for (;;) {
            if (++steps > cfg.max_steps) {
                traj.complete = false;
                event(EventKind::Termination);
                sample();
                return true;
            }
            h = std::min({h, kOffSurfaceMaxStep, horizon - t});
            if (h < 1e-14 * (1.0 + std::abs(t))) h = 1e-14 * (1.0 + std::abs(t));
            dopri5_step(f, x, h, ynew, err);
            double scale = 0.0;
            for (int i = 0; i < 3; ++i) {
                const double s =
                    cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x[i]), std::abs(ynew[i]));
                scale = std::max(scale, std::abs(err[i]) / s);
            }
            if (scale <= 1.0 || h <= 2e-14 * (1.0 + std::abs(t))) {
                const double grow = (scale > 1e-10) ? 0.9 * std::pow(scale, -0.2) : 5.0;
                const double h_used = h;
                h *= std::clamp(grow, 0.2, 5.0);
                return advance(ynew, h_used, f);
            }
            h *= std::clamp(0.9 * std::pow(scale, -0.2), 0.1, 0.9);
        }
    }

    template <typename Rhs>
    bool advance(const Vec3& ynew, double h_used, const Rhs& f) {
        const bool crossed = (mode == Mode::Above) ? (ynew[1] <= 0.0) : (ynew[1] >= 0.0);
        if (!crossed || (x[1] == 0.0 && ynew[1] == 0.0)) {
            t += h_used;
            x = ynew;
            sample();
            return check_divergence();
        }

        // bracket + bisection on the x2 component, re-stepping from the
        // segment start each probe
        auto x2_at = [&](double tau) {
            Vec3 y5, e;
            dopri5_step(f, x, tau, y5, e);
            return y5;
        };
        double a = 0.0, b = h_used;
        const double start_sign = (mode == Mode::Above) ? 1.0 : -1.0;
        if (x[1] == 0.0) a = std::min(h_used * 1e-9, cfg.event_tol);
        for (int it = 0; it < 60 && (b - a) > cfg.event_tol; ++it) {
            const double m = 0.5 * (a + b);
            const Vec3 ym = x2_at(m);
            if (ym[1] * start_sign > 0.0)
                a = m;
            else
                b = m;
        }
        const double tau_c = b;
        Vec3 xc = x2_at(tau_c);
        xc[1] = 0.0;
        const bool upward = (mode == Mode::Below);
        const double tc = t + tau_c;

        if (tc <= guard_end) {
            // just after a sliding exit; re-absorb marginal re-entries and
            // ignore roundoff ghosts
            if (band_gap(xc) >= -1e-12 * std::max(1.0, sys.params.k)) {
                t = tc;
                x = xc;
                mode = Mode::Sliding;
                event(EventKind::SlidingEntry);
                sample();
                if (stop_at_upward) return true;  // sliding: not a section point
            } else {
                t = tc;
                x = xc;
                h = std::max(h * 0.25, 1e-9);
            }
            return check_divergence();
        }

        t = tc;
        x = xc;
        if (band_gap(xc) >= 0.0) {
            mode = Mode::Sliding;
            event(EventKind::SlidingEntry);
            if (stop_at_upward) {
                sample();
                return true;  // sliding segment reached: no upward crossing
            }
        } else {
            mode = (mode == Mode::Above) ? Mode::Below : Mode::Above;
            event(EventKind::Crossing, upward);
            if (stop_at_upward && upward) {
                stopped_upward = true;
                sample();
                return true;
            }
        }
        sample();
        return check_divergence();
    }

    void run() {
        if (!all_finite(x)) throw std::invalid_argument("integrate: initial state not finite");
        init_mode();
        sample();
        if (check_divergence()) return;
        while (t < horizon) {
            bool stop = (mode == Mode::Sliding) ? run_sliding() : run_off_surface();
            if (stop) return;
        }
        traj.complete = true;
        event(EventKind::Termination);
        sample();
    }
};

}  // namespace

SlidingResult sliding_dynamics(const LurieSystem& sys, const StateVector& x) {
    const auto& p = sys.params;
    const double s = p.A * x[0] - x[2];
    if (std::abs(s) > p.k * (1.0 + 1e-12) + 1e-15)
        throw std::domain_error("sliding_dynamics: outside the sliding band (transversal crossing)");
    SlidingResult r;
    r.field = Vec3(0.0, 0.0, -x[0] - p.C * x[2]);
    r.phi_eq = (p.k > 0.0) ? std::clamp(s / p.k, -1.0, 1.0) : 0.0;
    return r;
}

Trajectory integrate(const LurieSystem& sys, const StateVector& x0, const IntegratorConfig& cfg) {
    cfg.validate();
    Driver d(sys, x0, cfg, /*rec=*/true, /*stop_up=*/false, cfg.max_time);
    d.run();
    return std::move(d.traj);
}

ReturnMapResult poincare_return(const LurieSystem& sys, const StateVector& x0,
                                const IntegratorConfig& cfg, double horizon) {
    cfg.validate();
    Driver d(sys, x0, cfg, /*rec=*/false, /*stop_up=*/true, horizon);
    d.run();
    ReturnMapResult r;
    r.diverged = d.traj.diverged;
    if (d.stopped_upward) {
        r.ok = true;
        r.state = d.x;
        r.return_time = d.t;
    }
    return r;
}

}  // namespace divgov
