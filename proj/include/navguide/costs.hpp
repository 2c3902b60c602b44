#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "navguide/costmap.hpp"
#include "navguide/geometry.hpp"

namespace navguide {

struct Goal {
  Vec2 position;  // world frame, meters
};

struct CostConfig {
  double alpha{0.03};          // goal-cost weight
  double beta{0.006};          // collision-cost weight
  double sigma_r{0.25};        // half robot width, meters
  std::vector<double> impact;  // per-waypoint collision weights in [0, 1]
};

// Linear ramp 0 -> 1 over n waypoints, the default impact profile.
std::vector<double> linear_impact(std::size_t n);

struct CostEval {
  double value{0.0};
  std::vector<Vec2> grad;  // one row per waypoint, d(value)/d(waypoint)
};

// Raised when every segment of a path is shorter than 1e-9 m, leaving lateral
// offset directions undefined.
struct DegeneratePathError : std::runtime_error {
  DegeneratePathError() : std::runtime_error("degenerate path: no usable segment direction") {}
};

// Squared Euclidean distance from the final waypoint to the goal. Gradient is
// zero except at the final waypoint.
CostEval goal_cost(const Path& path, const Goal& goal);

// Points at +/- sigma_r along the unit normal of each waypoint's local path
// direction (the last waypoint reuses the preceding segment).
std::pair<std::vector<Vec2>, std::vector<Vec2>> lateral_offsets(const Path& path,
                                                                double sigma_r);

// Impact-weighted sum of cost-map samples at each waypoint and its two lateral
// offsets. Offset directions are treated as constants, so each offset sample's
// gradient is attributed to its center waypoint.
CostEval collision_cost(const Path& path, const CostMap& map, const CostConfig& cfg);

// alpha * goal + beta * collision; the goal term is dropped when no goal is
// given.
CostEval total_cost(const Path& path, const CostMap& map,
                    const std::optional<Goal>& goal, const CostConfig& cfg);

}  // namespace navguide
