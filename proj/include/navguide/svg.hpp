#pragma once

#include <optional>
#include <string>
#include <vector>

#include "navguide/costmap.hpp"
#include "navguide/geometry.hpp"
#include "navguide/sim.hpp"

namespace navguide {

// Deterministic SVG of a planning scene: cost map shading, obstacles, then
// unguided paths (blue) under guided paths (red), the robot pose and the goal.
// All inputs are world-frame.
std::string render_scene_svg(const World& world, const CostMap& map,
                             const std::vector<Path>& unguided,
                             const std::vector<Path>& guided, const Pose& pose,
                             const std::optional<Vec2>& goal);

}  // namespace navguide
