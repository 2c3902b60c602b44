#include "navguide/costs.hpp"

#include <cmath>
#include <stdexcept>

namespace navguide {

namespace {
constexpr double kMinSegment = 1e-9;  // meters
}

std::vector<double> linear_impact(std::size_t n) {
  std::vector<double> k(n, 1.0);
  if (n > 1) {
    for (std::size_t t = 0; t < n; ++t) {
      k[t] = static_cast<double>(t) / static_cast<double>(n - 1);
    }
  }
  return k;
}

CostEval goal_cost(const Path& path, const Goal& goal) {
  if (path.size() == 0) throw std::invalid_argument("goal_cost: empty path");
  CostEval eval;
  eval.grad.assign(path.size(), Vec2{});
  const Vec2 d = path.waypoints.back() - goal.position;
  eval.value = d.norm_sq();
  eval.grad.back() = d * 2.0;
  return eval;
}

std::pair<std::vector<Vec2>, std::vector<Vec2>> lateral_offsets(const Path& path,
                                                                double sigma_r) {
  const std::size_t n = path.size();
  if (n < 2) throw std::invalid_argument("lateral_offsets: need at least 2 waypoints");

  // Direction at waypoint t is its incoming segment (so the last waypoint
  // uses the preceding one); the first waypoint takes the first usable
  // segment, and degenerate segments inherit the previous direction.
  std::vector<Vec2> dirs(n);
  std::ptrdiff_t first_valid = -1;
  for (std::size_t t = 1; t < n; ++t) {
    const Vec2 seg = path.waypoints[t] - path.waypoints[t - 1];
    if (seg.norm() > kMinSegment) {
      dirs[t] = seg / seg.norm();
      if (first_valid < 0) first_valid = static_cast<std::ptrdiff_t>(t);
    } else if (t > 1) {
      dirs[t] = dirs[t - 1];
    }
  }
  if (first_valid < 0) throw DegeneratePathError{};
  for (std::size_t t = 0; t <= static_cast<std::size_t>(first_valid); ++t) {
    dirs[t] = dirs[first_valid];
  }

  std::vector<Vec2> left(n), right(n);
  for (std::size_t t = 0; t < n; ++t) {
    const Vec2 normal = dirs[t].perp();
    left[t] = path.waypoints[t] + normal * sigma_r;
    right[t] = path.waypoints[t] - normal * sigma_r;
  }
  return {std::move(left), std::move(right)};
}

CostEval collision_cost(const Path& path, const CostMap& map, const CostConfig& cfg) {
  const std::size_t n = path.size();
  if (cfg.impact.size() != n) {
    throw std::invalid_argument("collision_cost: impact length != path length");
  }
  const auto [left, right] = lateral_offsets(path, cfg.sigma_r);

  CostEval eval;
  eval.grad.assign(n, Vec2{});
  for (std::size_t t = 0; t < n; ++t) {
    const double k = cfg.impact[t];
    const CostSample c0 = sample_cost(map, path.waypoints[t]);
    const CostSample cl = sample_cost(map, left[t]);
    const CostSample cr = sample_cost(map, right[t]);
    eval.value += k * (c0.value + cl.value + cr.value);
    eval.grad[t] = (c0.grad + cl.grad + cr.grad) * k;
  }
  return eval;
}

CostEval total_cost(const Path& path, const CostMap& map,
                    const std::optional<Goal>& goal, const CostConfig& cfg) {
  CostEval eval;
  eval.grad.assign(path.size(), Vec2{});

  const CostEval fc = collision_cost(path, map, cfg);
  eval.value = cfg.beta * fc.value;
  for (std::size_t t = 0; t < path.size(); ++t) eval.grad[t] = fc.grad[t] * cfg.beta;

  if (goal.has_value()) {
    const CostEval fg = goal_cost(path, *goal);
    eval.value += cfg.alpha * fg.value;
    for (std::size_t t = 0; t < path.size(); ++t) {
      eval.grad[t] += fg.grad[t] * cfg.alpha;
    }
  }
  return eval;
}

}  // namespace navguide
