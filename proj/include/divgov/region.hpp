#pragma once

#include "divgov/analyzer.hpp"
#include "divgov/governor.hpp"
#include "divgov/hunt.hpp"
#include "divgov/lmi.hpp"
#include "divgov/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace divgov {

struct Axis {
    std::string name;  // "A", "B" or "C"
    double min = 0.2;
    double max = 3.0;
    double step = 0.05;

    int count() const { return static_cast<int>(std::round((max - min) / step)) + 1; }
    double value(int i) const { return min + step * i; }
};

enum class WFormVerdict { Holds, Fails, NotRun };
enum class SimVerdict { ConvergesAll, Coexistence, Diverges, Skipped };
enum class StabilityClass { GloballyStable, LocallyStableWithOscillation, Unstable, Undetermined };

const char* to_string(WFormVerdict v);
const char* to_string(SimVerdict v);
const char* to_string(StabilityClass v);

struct CellVerdict {
    double A = 0.0, B = 0.0, C = 0.0;
    LmiVerdict lmi = LmiVerdict::Undetermined;
    bool lmi_ran = false;
    WFormVerdict w_form = WFormVerdict::NotRun;
    HurwitzVerdict hurwitz = HurwitzVerdict::Marginal;
    bool hurwitz_ran = false;
    SimVerdict simulation = SimVerdict::Skipped;
    StabilityClass fused = StabilityClass::Undetermined;
};

struct Methods {
    bool w_form = true;
    bool lmi = true;
    bool hurwitz = true;
    bool simulation = false;       // near method disagreements only
    bool simulation_full = false;  // force simulation on every cell
};

struct RegionConfig {
    double alpha = 0.0;
    double k = 0.5;
    double eps_pd = 1e-6;
    double eps_nd = 1e-8;
    std::uint64_t seed = 0x9e61d5eedULL;
    unsigned threads = 0;
    HuntConfig sim;  // reduced multistart used for simulation verdicts

    RegionConfig() {
        sim.grid_points_per_axis = 3;
        sim.grid_extent = 3.0;
        sim.random_starts = 8;
        sim.horizon = 20000.0;
    }
};

struct RefinedTransition {
    double fixed_value;  // the B (or secondary-axis) value of the scan line
    double boundary;     // refined A* on the line
};

struct RegionGrid {
    std::vector<Axis> axes;  // 2 or 3 axes; cell index = i + ni*(j + nj*k)
    std::vector<CellVerdict> cells;
    Methods methods;
    RegionConfig config;
    std::vector<RefinedTransition> refined;

    int index2(int i, int j) const { return i + axes[0].count() * j; }
    int index3(int i, int j, int k) const {
        return i + axes[0].count() * (j + axes[1].count() * k);
    }
    const CellVerdict& at2(int i, int j) const { return cells[index2(i, j)]; }
};

/// Evaluates one parameter point with the selected methods and fuses the
/// verdicts. Exposed for cell-level tests.
CellVerdict evaluate_cell(const GovernorParams& p, double alpha, const Methods& m,
                          const RegionConfig& cfg);

/// Dense sweep over an A x B grid at fixed C.
RegionGrid sweep_2d(const Axis& axisA, const Axis& axisB, double C, double alpha,
                    const Methods& methods, const RegionConfig& cfg = {});

struct SurfacePoint {
    double A, B, C;
};

struct Region3d {
    RegionGrid grid;
    std::vector<SurfacePoint> boundary_points;       // feasible cells with infeasible neighbor
    std::vector<std::array<int, 3>> boundary_triangles;  // indices into boundary_points
};

/// LMI-only sweep over A x B x C with boundary-surface extraction.
Region3d sweep_3d(const Axis& axisA, const Axis& axisB, const Axis& axisC,
                  const RegionConfig& cfg = {});

/// Bisection refinement of the boundary along the A axis at each B row of a
/// 2-d grid, down to step / 2^passes. Uses the grid's primary method (lmi if
/// enabled, else the w-form check, else Hurwitz).
RegionGrid refine_boundary(const RegionGrid& grid, int passes);

/// CSV/JSON export. One row per cell; 17-significant-digit numbers.
std::vector<std::string> region_csv(const RegionGrid& grid);
std::string region_json(const RegionGrid& grid);
std::vector<std::string> boundary_csv(const Region3d& region);

}  // namespace divgov
