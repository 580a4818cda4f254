#include "divgov/region.hpp"

#include "divgov/io.hpp"
#include "divgov/parallel.hpp"

#include <json.hpp>

#include <cmath>

namespace divgov {

const char* to_string(WFormVerdict v) {
    switch (v) {
        case WFormVerdict::Holds: return "holds";
        case WFormVerdict::Fails: return "fails";
        case WFormVerdict::NotRun: return "not-run";
    }
    return "?";
}

const char* to_string(SimVerdict v) {
    switch (v) {
        case SimVerdict::ConvergesAll: return "converges-all";
        case SimVerdict::Coexistence: return "coexistence";
        case SimVerdict::Diverges: return "diverges";
        case SimVerdict::Skipped: return "skipped";
    }
    return "?";
}

const char* to_string(StabilityClass v) {
    switch (v) {
        case StabilityClass::GloballyStable: return "GloballyStable";
        case StabilityClass::LocallyStableWithOscillation: return "LocallyStableWithOscillation";
        case StabilityClass::Unstable: return "Unstable";
        case StabilityClass::Undetermined: return "Undetermined";
    }
    return "?";
}

namespace {

SimVerdict simulate_cell(const GovernorParams& p, const RegionConfig& cfg) {
    HuntConfig hc = cfg.sim;
    hc.seed = child_seed(cfg.seed, static_cast<std::uint64_t>(p.A * 1e6) ^
                                       (static_cast<std::uint64_t>(p.B * 1e6) << 20) ^
                                       (static_cast<std::uint64_t>(p.C * 1e6) << 40));
    hc.threads = 1;  // cells are already evaluated in parallel
    const OscillationReport rep = hunt(p, hc);
    if (rep.hidden) return SimVerdict::Coexistence;
    bool any_stat = rep.any_outcome(Outcome::Stationary);
    bool any_div = rep.any_outcome(Outcome::Divergent);
    bool any_cycle = rep.any_outcome(Outcome::Cycle);
    bool any_undec = rep.any_outcome(Outcome::Undecided);
    if (any_stat && !any_div && !any_cycle && !any_undec) return SimVerdict::ConvergesAll;
    if ((any_div || any_cycle) && !any_stat) return SimVerdict::Diverges;
    return SimVerdict::Skipped;  // inconclusive mixes stay unlabeled
}

StabilityClass fuse(const CellVerdict& c) {
    // certificate > observed coexistence > linearization
    if ((c.lmi_ran && c.lmi == LmiVerdict::Feasible) || c.w_form == WFormVerdict::Holds)
        return StabilityClass::GloballyStable;
    if (c.simulation == SimVerdict::Coexistence)
        return StabilityClass::LocallyStableWithOscillation;
    if (c.simulation == SimVerdict::Diverges) return StabilityClass::Unstable;
    if (c.hurwitz_ran && c.hurwitz == HurwitzVerdict::Unstable &&
        c.simulation != SimVerdict::ConvergesAll)
        return StabilityClass::Unstable;
    return StabilityClass::Undetermined;
}

bool methods_disagree(const CellVerdict& c) {
    // a sufficient check failing while the linear part is stable (or the
    // other way around) marks cells worth simulating
    const bool cert = (c.lmi_ran && c.lmi == LmiVerdict::Feasible) ||
                      c.w_form == WFormVerdict::Holds;
    const bool cert_ran = c.lmi_ran || c.w_form != WFormVerdict::NotRun;
    if (c.lmi_ran && c.lmi == LmiVerdict::Undetermined) return true;
    if (!c.hurwitz_ran || !cert_ran) return false;
    return cert != (c.hurwitz == HurwitzVerdict::Stable);
}

}  // namespace

CellVerdict evaluate_cell(const GovernorParams& p, double alpha, const Methods& m,
                          const RegionConfig& cfg) {
    CellVerdict c;
    c.A = p.A;
    c.B = p.B;
    c.C = p.C;
    if (m.w_form) {
        Theorem2Options t2;
        t2.seed = child_seed(cfg.seed, 0x77);
        t2.samples = 20'000;
        c.w_form = theorem2_check_structured(p, alpha, t2).holds ? WFormVerdict::Holds
                                                                 : WFormVerdict::Fails;
    }
    if (m.lmi) {
        LmiProblem lp;
        lp.sys = build_system(p);
        lp.eps_pd = cfg.eps_pd;
        lp.eps_nd = cfg.eps_nd;
        lp.seed = cfg.seed;
        c.lmi = solve_feasibility(lp).verdict;
        c.lmi_ran = true;
    }
    if (m.hurwitz) {
        c.hurwitz = hurwitz_test(p).verdict;
        c.hurwitz_ran = true;
    }
    if (m.simulation_full || (m.simulation && methods_disagree(c)))
        c.simulation = simulate_cell(p, cfg);
    c.fused = fuse(c);
    return c;
}

RegionGrid sweep_2d(const Axis& axisA, const Axis& axisB, double C, double alpha,
                    const Methods& methods, const RegionConfig& cfg) {
    RegionGrid grid;
    grid.axes = {axisA, axisB};
    grid.methods = methods;
    grid.config = cfg;
    grid.config.alpha = alpha;
    const int na = axisA.count(), nb = axisB.count();
    grid.cells.resize(static_cast<std::size_t>(na) * nb);
    parallel_for(grid.cells.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) % na;
        const int j = static_cast<int>(idx) / na;
        GovernorParams p{axisA.value(i), axisB.value(j), C, cfg.k};
        grid.cells[idx] = evaluate_cell(p, alpha, methods, cfg);
    }, cfg.threads);
    return grid;
}

Region3d sweep_3d(const Axis& axisA, const Axis& axisB, const Axis& axisC,
                  const RegionConfig& cfg) {
    Region3d out;
    RegionGrid& grid = out.grid;
    grid.axes = {axisA, axisB, axisC};
    grid.config = cfg;
    Methods m;
    m.w_form = false;
    m.hurwitz = false;
    m.lmi = true;
    grid.methods = m;
    const int na = axisA.count(), nb = axisB.count(), nc = axisC.count();
    grid.cells.resize(static_cast<std::size_t>(na) * nb * nc);
    parallel_for(grid.cells.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) % na;
        const int j = (static_cast<int>(idx) / na) % nb;
        const int k = static_cast<int>(idx) / (na * nb);
        GovernorParams p{axisA.value(i), axisB.value(j), axisC.value(k), cfg.k};
        grid.cells[idx] = evaluate_cell(p, cfg.alpha, m, cfg);
    }, cfg.threads);

    // boundary: feasible cells with an infeasible face neighbor; the feasible
    // set grows with C, so the surface is the graph of the first feasible C
    auto feasible = [&](int i, int j, int k) {
        return grid.cells[grid.index3(i, j, k)].lmi == LmiVerdict::Feasible;
    };
    std::vector<std::vector<int>> first_feasible(na, std::vector<int>(nb, -1));
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) {
            bool on_boundary_added = false;
            for (int k = 0; k < nc; ++k) {
                if (!feasible(i, j, k)) continue;
                const bool boundary =
                    (k > 0 && !feasible(i, j, k - 1)) || (k == 0) ||
                    (i > 0 && !feasible(i - 1, j, k)) || (i + 1 < na && !feasible(i + 1, j, k)) ||
                    (j > 0 && !feasible(i, j - 1, k)) || (j + 1 < nb && !feasible(i, j + 1, k));
                if (boundary && first_feasible[i][j] < 0) {
                    first_feasible[i][j] = static_cast<int>(out.boundary_points.size());
                    out.boundary_points.push_back(
                        {axisA.value(i), axisB.value(j), axisC.value(k)});
                    on_boundary_added = true;
                }
                if (on_boundary_added) break;
            }
        }
    for (int i = 0; i + 1 < na; ++i)
        for (int j = 0; j + 1 < nb; ++j) {
            const int p00 = first_feasible[i][j], p10 = first_feasible[i + 1][j];
            const int p01 = first_feasible[i][j + 1], p11 = first_feasible[i + 1][j + 1];
            if (p00 >= 0 && p10 >= 0 && p11 >= 0)
                out.boundary_triangles.push_back({p00, p10, p11});
            if (p00 >= 0 && p11 >= 0 && p01 >= 0)
                out.boundary_triangles.push_back({p00, p11, p01});
        }
    return out;
}

RegionGrid refine_boundary(const RegionGrid& grid, int passes) {
    if (grid.axes.size() != 2)
        throw std::invalid_argument("refine_boundary: expects a 2-d grid");
    RegionGrid out = grid;
    out.refined.clear();
    const Axis& axA = grid.axes[0];
    const Axis& axB = grid.axes[1];
    const double C = grid.cells.empty() ? 0.0 : grid.cells[0].C;
    const double resolution = axA.step / std::pow(2.0, passes);

    auto positive = [&](const CellVerdict& c) {
        if (grid.methods.lmi) return c.lmi == LmiVerdict::Feasible;
        if (grid.methods.w_form) return c.w_form == WFormVerdict::Holds;
        return c.hurwitz == HurwitzVerdict::Stable;
    };
    auto probe = [&](double A, double B) {
        GovernorParams p{A, B, C, grid.config.k};
        if (grid.methods.lmi) {
            LmiProblem lp;
            lp.sys = build_system(p);
            lp.eps_pd = grid.config.eps_pd;
            lp.eps_nd = grid.config.eps_nd;
            lp.seed = grid.config.seed;
            return solve_feasibility(lp).verdict == LmiVerdict::Feasible;
        }
        if (grid.methods.w_form) {
            Theorem2Options t2;
            t2.seed = child_seed(grid.config.seed, 0x77);
            t2.samples = 20'000;
            return theorem2_check_structured(p, grid.config.alpha, t2).holds;
        }
        return hurwitz_test(p).verdict == HurwitzVerdict::Stable;
    };

    std::vector<RefinedTransition> refined(axB.count());
    std::vector<char> has_transition(axB.count(), 0);
    parallel_for(static_cast<std::size_t>(axB.count()), [&](std::size_t j) {
        const double B = axB.value(static_cast<int>(j));
        int first_pos = -1;
        for (int i = 0; i < axA.count(); ++i)
            if (positive(grid.at2(i, static_cast<int>(j)))) {
                first_pos = i;
                break;
            }
        if (first_pos <= 0) return;  // no transition inside the grid row
        double lo = axA.value(first_pos - 1), hi = axA.value(first_pos);
        while (hi - lo > resolution) {
            const double mid = 0.5 * (lo + hi);
            (probe(mid, B) ? hi : lo) = mid;
        }
        refined[j] = RefinedTransition{B, 0.5 * (lo + hi)};
        has_transition[j] = 1;
    }, grid.config.threads);
    for (std::size_t j = 0; j < refined.size(); ++j)
        if (has_transition[j]) out.refined.push_back(refined[j]);
    return out;
}

std::vector<std::string> region_csv(const RegionGrid& grid) {
    std::vector<std::string> lines;
    lines.push_back("A,B,C,alpha,lmi,wform,hurwitz,simulation,fused");
    for (const auto& c : grid.cells) {
        std::string row = format_full(c.A) + "," + format_full(c.B) + "," + format_full(c.C) +
                          "," + format_full(grid.config.alpha) + ",";
        row += std::string(c.lmi_ran ? to_string(c.lmi) : "not-run");
        row += ",";
        row += to_string(c.w_form);
        row += ",";
        row += std::string(c.hurwitz_ran ? to_string(c.hurwitz) : "not-run");
        row += ",";
        row += to_string(c.simulation);
        row += ",";
        row += to_string(c.fused);
        lines.push_back(row);
    }
    return lines;
}

std::string region_json(const RegionGrid& grid) {
    nlohmann::json j;
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& a : grid.axes)
        axes.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"step", a.step}});
    j["axes"] = axes;
    j["meta"] = {{"alpha", grid.config.alpha},
                 {"k", grid.config.k},
                 {"eps_pd", grid.config.eps_pd},
                 {"eps_nd", grid.config.eps_nd},
                 {"seed", grid.config.seed},
                 {"methods",
                  {{"wform", grid.methods.w_form},
                   {"lmi", grid.methods.lmi},
                   {"hurwitz", grid.methods.hurwitz},
                   {"simulation", grid.methods.simulation || grid.methods.simulation_full}}}};
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : grid.cells) {
        cells.push_back({{"A", c.A},
                         {"B", c.B},
                         {"C", c.C},
                         {"lmi", c.lmi_ran ? to_string(c.lmi) : "not-run"},
                         {"wform", to_string(c.w_form)},
                         {"hurwitz", c.hurwitz_ran ? to_string(c.hurwitz) : "not-run"},
                         {"simulation", to_string(c.simulation)},
                         {"fused", to_string(c.fused)}});
    }
    j["cells"] = cells;
    if (!grid.refined.empty()) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& t : grid.refined)
            r.push_back({{"B", t.fixed_value}, {"A_star", t.boundary}});
        j["refined_boundary"] = r;
    }
    return j.dump(2);
}

std::vector<std::string> boundary_csv(const Region3d& region) {
    std::vector<std::string> lines;
    lines.push_back("A,B,C");
    for (const auto& p : region.boundary_points)
        lines.push_back(format_full(p.A) + "," + format_full(p.B) + "," + format_full(p.C));
    lines.push_back("# triangles: i,j,k");
    for (const auto& t : region.boundary_triangles)
        lines.push_back(std::to_string(t[0]) + "," + std::to_string(t[1]) + "," +
                        std::to_string(t[2]));
    return lines;
}

}  // namespace divgov
