#pragma once

#include <string>

#include "gta/instances.hpp"

namespace gta {

// Deterministic SVG of a committed tour: one marker per (node, time) with a
// shared hue per node (opacity ramps with time), black arrows along the
// order at the matching slices, a cost title, and a red banner when the
// solution is infeasible. Byte-identical for identical inputs.
std::string render_tour_svg(const DynamicInstance& inst, const Solution& sol);

void write_tour_svg(const std::string& path, const DynamicInstance& inst,
                    const Solution& sol);

}  // namespace gta
