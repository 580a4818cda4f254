#pragma once

#include "divgov/density.hpp"
#include "divgov/governor.hpp"
#include "divgov/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace divgov {

/// Sufficient-condition check of the structured density: decides whether
/// z' W z <= 0 for every z = (x, phi) with phi = +-1 and free x.
struct Theorem2Options {
    int samples = 100'000;       // sampling oracle size
    std::uint64_t seed = 0x77aa11bbULL;
    double tol = 1e-9;           // slack on the analytic maximum, relative to |W|
};

struct Theorem2Result {
    bool holds = false;
    bool boundary_case = false;       // W vanishes identically (AB = 1, C = alpha = 0)
    double analytic_max = 0.0;        // sup of the form over each relay sheet (0 if bounded)
    double sampled_max = 0.0;         // largest sampled value of z'Wz
    std::optional<Vec4> witness;      // z with z'Wz > 0 when the check fails
};

Theorem2Result theorem2_check_structured(const GovernorParams& params, double alpha,
                                         const Theorem2Options& opts = {});

/// Screening check of the necessary condition: Monte-Carlo estimates of
/// integral of div(rho f) over sublevel sets {rho <= c} must be negative
/// beyond three standard errors at every tested level.
enum class Theorem1Verdict { NecessaryConsistent, Violated, Inconclusive };

inline const char* to_string(Theorem1Verdict v) {
    switch (v) {
        case Theorem1Verdict::NecessaryConsistent: return "necessary-consistent";
        case Theorem1Verdict::Violated: return "violated";
        case Theorem1Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct Theorem1Options {
    std::vector<double> levels = {0.1, 1.0, 10.0};  // log-spaced sublevel constants
    long samples = 200'000;                         // per level
    std::uint64_t seed = 0xd1cebeefULL;
};

struct LevelEstimate {
    double level;
    double integral;
    double std_error;
};

struct Theorem1Result {
    Theorem1Verdict verdict;
    std::vector<LevelEstimate> levels;
};

/// Structured-density variant. Throws if the quadratic part of the density is
/// not positive definite (the sublevel sets are then unbounded).
Theorem1Result theorem1_check_structured(const GovernorParams& params, double alpha,
                                         const Theorem1Options& opts = {});

/// Quadratic-density variant, rho = x'Qx with Q > 0.
Theorem1Result theorem1_check_quadratic(const GovernorParams& params, const QuadraticDensity& q,
                                        const Theorem1Options& opts = {});

/// JSON record {params, alpha/Q, method, verdict, witness?} for verdict files.
std::string verdict_record_json(const GovernorParams& params, const std::string& method,
                                const std::string& verdict, std::optional<double> alpha,
                                const std::optional<Mat3>& Q,
                                const std::optional<Vec4>& witness);

}  // namespace divgov
