#pragma once

#include "divgov/governor.hpp"

#include <string>

namespace divgov {

/// Renders the x1-x2 and x1-x3 projections of a trajectory CSV
/// (t,x1,x2,x3,mode) with the stationary segment overlaid. Reads the data
/// back from the file so rendering can never change the numeric outputs.
void render_phase_svg(const std::string& trajectory_csv, const GovernorParams& params,
                      const std::string& out_svg);

/// Renders a region-grid CSV as a colored cell map with the reference curve
/// AB = 1 overlaid.
void render_region_svg(const std::string& region_csv, const std::string& out_svg);

}  // namespace divgov
