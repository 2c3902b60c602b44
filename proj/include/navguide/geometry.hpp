#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace navguide {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Vec2 {
  double x{0.0};
  double y{0.0};

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

  bool operator==(const Vec2&) const = default;

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm_sq() const { return x * x + y * y; }
  // +90 degree rotation (left normal of a direction vector)
  Vec2 perp() const { return {-y, x}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

using Waypoint = Vec2;

// Fixed-horizon waypoint path in the robot frame, metric units.
struct Path {
  std::vector<Waypoint> waypoints;

  std::size_t size() const { return waypoints.size(); }
};

// Same layout, coordinates divided by the scale radius.
struct NormalizedPath {
  std::vector<Waypoint> waypoints;

  std::size_t size() const { return waypoints.size(); }
};

struct Pose {
  double x{0.0};
  double y{0.0};
  double heading{0.0};  // radians, wrapped to (-pi, pi]

  Vec2 position() const { return {x, y}; }
};

struct NormSpec {
  double r_max{5.0};  // meters
};

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

double angle_diff(double a, double b);

NormalizedPath normalize(const Path& path, const NormSpec& spec);

// Coordinates multiplied by r_max, then clamped per axis to [-r_max, r_max];
// inverse of normalize on every path inside that box.
Path denormalize(const NormalizedPath& npath, const NormSpec& spec);

// Rigid transform of a robot-frame path into the world frame of `pose`.
Path robot_to_world(const Path& path, const Pose& pose);
// Inverse transform: world-frame path expressed in the robot frame of `pose`.
Path world_to_robot(const Path& path, const Pose& pose);

Vec2 point_to_world(const Vec2& p, const Pose& pose);
Vec2 point_to_robot(const Vec2& p, const Pose& pose);

// Angle of the vector from the origin to the mean of the first m waypoints.
// nullopt when that mean is within 1e-9 m of the origin (undefined direction).
std::optional<double> mean_heading(const Path& path, std::size_t m);

}  // namespace navguide
