#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "navguide/geometry.hpp"

namespace navguide {

// Planar range scan in the sensor frame. Angles ascend; ranges at max_range
// are misses.
struct DepthScan {
  std::vector<double> angles;  // radians
  std::vector<double> ranges;  // meters, 0 < r <= max_range
  double max_range{6.0};
};

struct GridSpec {
  int width{0};
  int height{0};
  double resolution{0.1};  // meters/cell
  Vec2 origin;             // world position of the corner of cell (0,0)
};

struct OccupancyGrid {
  int width{0};
  int height{0};
  double resolution{0.1};
  Vec2 origin;
  std::vector<std::uint8_t> cells;  // row-major, 1 = occupied

  bool occupied(int ix, int iy) const {
    return cells[static_cast<std::size_t>(iy) * width + ix] != 0;
  }
};

struct CostMap {
  int width{0};
  int height{0};
  double resolution{0.1};
  Vec2 origin;
  std::vector<double> values;  // row-major, in [0, 1]

  double at(int ix, int iy) const {
    return values[static_cast<std::size_t>(iy) * width + ix];
  }
  double& at(int ix, int iy) {
    return values[static_cast<std::size_t>(iy) * width + ix];
  }
  // World position of the center of cell (ix, iy).
  Vec2 cell_center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
  }
};

struct CostSample {
  double value{0.0};
  Vec2 grad;  // d(cost)/d(x,y), per meter; zero along clamped axes
};

// Marks the cell containing each returned ray endpoint as occupied. The scan
// is anchored at `sensor_pose` expressed in the grid's frame; endpoints that
// land outside the grid are ignored.
OccupancyGrid scan_to_occupancy(const DepthScan& scan, const GridSpec& spec,
                                const Pose& sensor_pose);

// Truncated distance-transform cost: occupied cells cost 1, decaying linearly
// to 0 at d_trunc. Distances are exact (cell-center Euclidean metric).
CostMap occupancy_to_cost(const OccupancyGrid& grid, double d_trunc);

// Separable Gaussian blur, kernel radius ceil(3*sigma_g), unit-sum kernel,
// clamp-to-edge borders. sigma_g is in cells.
CostMap gaussian_smooth(const CostMap& map, double sigma_g);

// Bilinear interpolation over the four surrounding cell centers with the
// analytic gradient of that surface. Queries clamp to the map interior; a
// clamped axis contributes zero gradient.
CostSample sample_cost(const CostMap& map, const Vec2& point);

struct CostmapConfig {
  double resolution{0.1};  // meters/cell
  double extent{12.0};     // square side, meters, centered at the robot
  double d_trunc{1.0};     // truncation distance, meters
  double sigma_g{2.0};     // Gaussian smoothing sigma, cells
};

// scan -> occupancy -> truncated distance cost -> Gaussian smoothing, on a
// grid centered at the sensor pose.
CostMap build_costmap(const DepthScan& scan, const Pose& sensor_pose,
                      const CostmapConfig& cfg);

// Flat binary dump (magic "NVCM"): header + row-major f32 payload.
void save_costmap(const CostMap& map, const std::string& path);
CostMap load_costmap(const std::string& path);

}  // namespace navguide
