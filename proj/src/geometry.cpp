#include "navguide/geometry.hpp"

#include <algorithm>

namespace navguide {

namespace {

void require_finite(const std::vector<Waypoint>& pts, const char* what) {
  for (const auto& p : pts) {
    if (!p.finite()) {
      throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
    }
  }
}

}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

double angle_diff(double a, double b) { return wrap_angle(a - b); }

NormalizedPath normalize(const Path& path, const NormSpec& spec) {
  if (!(spec.r_max > 0.0)) throw std::invalid_argument("normalize: r_max must be > 0");
  require_finite(path.waypoints, "normalize");
  NormalizedPath out;
  out.waypoints.reserve(path.size());
  for (const auto& p : path.waypoints) out.waypoints.push_back(p / spec.r_max);
  return out;
}

Path denormalize(const NormalizedPath& npath, const NormSpec& spec) {
  if (!(spec.r_max > 0.0)) throw std::invalid_argument("denormalize: r_max must be > 0");
  require_finite(npath.waypoints, "denormalize");
  Path out;
  out.waypoints.reserve(npath.size());
  for (const auto& p : npath.waypoints) {
    out.waypoints.push_back({std::clamp(p.x * spec.r_max, -spec.r_max, spec.r_max),
                             std::clamp(p.y * spec.r_max, -spec.r_max, spec.r_max)});
  }
  return out;
}

Vec2 point_to_world(const Vec2& p, const Pose& pose) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return {pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y};
}

Vec2 point_to_robot(const Vec2& p, const Pose& pose) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double dx = p.x - pose.x;
  const double dy = p.y - pose.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Path robot_to_world(const Path& path, const Pose& pose) {
  require_finite(path.waypoints, "robot_to_world");
  Path out;
  out.waypoints.reserve(path.size());
  for (const auto& p : path.waypoints) out.waypoints.push_back(point_to_world(p, pose));
  return out;
}

Path world_to_robot(const Path& path, const Pose& pose) {
  require_finite(path.waypoints, "world_to_robot");
  Path out;
  out.waypoints.reserve(path.size());
  for (const auto& p : path.waypoints) out.waypoints.push_back(point_to_robot(p, pose));
  return out;
}

std::optional<double> mean_heading(const Path& path, std::size_t m) {
  if (m < 1 || m > path.size()) {
    throw std::invalid_argument("mean_heading: m out of range");
  }
  Vec2 mean{0.0, 0.0};
  for (std::size_t i = 0; i < m; ++i) mean += path.waypoints[i];
  mean = mean / static_cast<double>(m);
  if (mean.norm() < 1e-9) return std::nullopt;
  return std::atan2(mean.y, mean.x);
}

}  // namespace navguide
