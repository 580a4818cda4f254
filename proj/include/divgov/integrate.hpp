#pragma once

#include "divgov/governor.hpp"
#include "divgov/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace divgov {

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double event_tol = 1e-10;   // time resolution of event root-finding
    double max_time = 500.0;
    std::int64_t max_steps = 2'000'000;
    double max_norm = 1e12;     // divergence guard on the state norm

    void validate() const {
        if (!(rel_tol > 0.0 && abs_tol > 0.0 && event_tol > 0.0))
            throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
        if (!(max_time > 0.0)) throw std::invalid_argument("IntegratorConfig: max_time must be > 0");
        if (max_steps <= 0) throw std::invalid_argument("IntegratorConfig: max_steps must be > 0");
    }
};

enum class EventKind { Crossing, SlidingEntry, SlidingExit, Termination };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Crossing: return "crossing";
        case EventKind::SlidingEntry: return "sliding-entry";
        case EventKind::SlidingExit: return "sliding-exit";
        case EventKind::Termination: return "termination";
    }
    return "?";
}

struct Event {
    double t;
    EventKind kind;
    Vec3 state;
    bool upward = false;  // for crossings: x2 went - to +
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec3> states;
    std::vector<Mode> modes;
    std::vector<Event> events;
    bool complete = false;   // reached max_time (or exhausted the step budget if false)
    bool diverged = false;
    double escape_time = 0.0;

    const Vec3& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }
    Mode final_mode() const { return modes.back(); }
};

struct SlidingResult {
    Vec3 field;      // (0, 0, -x1 - C*x3)
    double phi_eq;   // equivalent relay value, in [-1, 1] inside the band
};

/// Equivalent-control dynamics on the sliding band of x2 = 0. Throws if the
/// sliding condition |A*x1 - x3| <= k does not hold (transversal crossing).
SlidingResult sliding_dynamics(const LurieSystem& sys, const StateVector& x);

/// Event-driven Filippov integration: relay -sign(x2) off the surface,
/// bisection-located crossings, equivalent-control sliding with exit
/// detection.
Trajectory integrate(const LurieSystem& sys, const StateVector& x0, const IntegratorConfig& cfg);

struct ReturnMapResult {
    bool ok = false;        // found the next upward crossing
    bool diverged = false;
    Vec3 state;             // state at the crossing, x2 snapped to 0
    double return_time = 0.0;
};

/// Integrates from a state until the next upward crossing of x2 = 0
/// (entering a sliding segment or exceeding the horizon counts as failure).
/// Used to evaluate the Poincare return map.
ReturnMapResult poincare_return(const LurieSystem& sys, const StateVector& x0,
                                const IntegratorConfig& cfg, double horizon);

/// One Dormand-Prince 5(4) step from y with step h; returns the 5th-order
/// solution and the embedded error estimate.
template <typename Rhs, typename Vec>
void dopri5_step(const Rhs& f, const Vec& y, double h, Vec& y5, Vec& err) {
    const Vec k1 = f(y);
    const Vec k2 = f(y + h * (1.0 / 5.0) * k1);
    const Vec k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    const Vec k4 = f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    const Vec k5 = f(y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                              64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    const Vec k6 = f(y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                              49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
    y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                  2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
    const Vec k7 = f(y5);
    // difference of the 5th- and 4th-order solutions
    err = h * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 + 71.0 / 1920.0 * k4 -
               17253.0 / 339200.0 * k5 + 22.0 / 525.0 * k6 - 1.0 / 40.0 * k7);
}

/// Generic adaptive integration of y' = f(y) over [t0, t1]; returns the final
/// state. Plumbing shared by tests and the divergence screenings.
template <typename Rhs, typename Vec>
Vec adaptive_rk45(const Rhs& f, Vec y, double t0, double t1, double rel_tol = 1e-10,
                  double abs_tol = 1e-12) {
    double t = t0;
    double h = (t1 - t0) * 1e-4;
    if (h == 0.0) return y;
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    h = dir * std::abs(h);
    Vec y5 = y, err = y;
    int guard = 0;
    while (dir * (t1 - t) > 0.0) {
        if (++guard > 50'000'000) throw std::runtime_error("adaptive_rk45: step budget exceeded");
        if (dir * (t + h - t1) > 0.0) h = t1 - t;
        dopri5_step(f, y, h, y5, err);
        double scale = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            double s = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            scale = std::max(scale, std::abs(err[i]) / s);
        }
        if (scale <= 1.0) {
            t += h;
            y = y5;
            double grow = (scale > 1e-10) ? 0.9 * std::pow(scale, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            h *= std::clamp(0.9 * std::pow(scale, -0.2), 0.1, 1.0);
        }
    }
    return y;
}

}  // namespace divgov
