#include "navguide/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace navguide {

namespace {

constexpr char kMagic[4] = {'N', 'V', 'C', 'M'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_le(std::ofstream& os, T v) {
  // little-endian host assumed; payload layout is fixed by the format
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

OccupancyGrid scan_to_occupancy(const DepthScan& scan, const GridSpec& spec,
                                const Pose& sensor_pose) {
  if (scan.angles.size() != scan.ranges.size()) {
    throw std::invalid_argument("scan_to_occupancy: angles/ranges length mismatch");
  }
  if (spec.width <= 0 || spec.height <= 0 || !(spec.resolution > 0.0)) {
    throw std::invalid_argument("scan_to_occupancy: bad grid spec");
  }
  OccupancyGrid grid;
  grid.width = spec.width;
  grid.height = spec.height;
  grid.resolution = spec.resolution;
  grid.origin = spec.origin;
  grid.cells.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);

  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double r = scan.ranges[i];
    if (!(r < scan.max_range)) continue;  // miss
    const double a = scan.angles[i];
    const Vec2 local{r * std::cos(a), r * std::sin(a)};
    const Vec2 p = point_to_world(local, sensor_pose);
    const int ix = static_cast<int>(std::floor((p.x - spec.origin.x) / spec.resolution));
    const int iy = static_cast<int>(std::floor((p.y - spec.origin.y) / spec.resolution));
    if (ix < 0 || iy < 0 || ix >= spec.width || iy >= spec.height) continue;
    grid.cells[static_cast<std::size_t>(iy) * spec.width + ix] = 1;
  }
  return grid;
}

CostMap occupancy_to_cost(const OccupancyGrid& grid, double d_trunc) {
  if (!(d_trunc > 0.0)) throw std::invalid_argument("occupancy_to_cost: d_trunc must be > 0");
  CostMap map;
  map.width = grid.width;
  map.height = grid.height;
  map.resolution = grid.resolution;
  map.origin = grid.origin;
  const std::size_t n = static_cast<std::size_t>(grid.width) * grid.height;
  map.values.assign(n, 0.0);

  // Truncation lets the transform stay exact while only scanning a window
  // around each occupied cell: anything outside the window is farther than
  // d_trunc and already costs 0.
  const int r_cells = static_cast<int>(std::ceil(d_trunc / grid.resolution));
  const std::int64_t kFar = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> d2(n, kFar);  // squared distance in cell units

  for (int oy = 0; oy < grid.height; ++oy) {
    for (int ox = 0; ox < grid.width; ++ox) {
      if (!grid.occupied(ox, oy)) continue;
      const int x0 = std::max(0, ox - r_cells);
      const int x1 = std::min(grid.width - 1, ox + r_cells);
      const int y0 = std::max(0, oy - r_cells);
      const int y1 = std::min(grid.height - 1, oy + r_cells);
      for (int iy = y0; iy <= y1; ++iy) {
        const std::int64_t dy = iy - oy;
        for (int ix = x0; ix <= x1; ++ix) {
          const std::int64_t dx = ix - ox;
          const std::int64_t dd = dx * dx + dy * dy;
          auto& cur = d2[static_cast<std::size_t>(iy) * grid.width + ix];
          if (dd < cur) cur = dd;
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (d2[i] == kFar) continue;
    const double dist = grid.resolution * std::sqrt(static_cast<double>(d2[i]));
    map.values[i] = std::clamp((d_trunc - dist) / d_trunc, 0.0, 1.0);
  }
  return map;
}

CostMap gaussian_smooth(const CostMap& map, double sigma_g) {
  if (!(sigma_g > 0.0)) throw std::invalid_argument("gaussian_smooth: sigma_g must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_g));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma_g * sigma_g));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  const int w = map.width;
  const int h = map.height;
  CostMap tmp = map;
  CostMap out = map;

  // horizontal pass
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sx = std::clamp(ix + k, 0, w - 1);
        acc += kernel[k + radius] * map.at(sx, iy);
      }
      tmp.at(ix, iy) = acc;
    }
  }
  // vertical pass
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sy = std::clamp(iy + k, 0, h - 1);
        acc += kernel[k + radius] * tmp.at(ix, sy);
      }
      out.at(ix, iy) = acc;
    }
  }
  return out;
}

CostSample sample_cost(const CostMap& map, const Vec2& point) {
  if (!point.finite()) throw std::invalid_argument("sample_cost: non-finite query");
  CostSample s;
  if (map.width < 1 || map.height < 1) return s;

  // continuous coordinates in cell-center units
  double u = (point.x - map.origin.x) / map.resolution - 0.5;
  double v = (point.y - map.origin.y) / map.resolution - 0.5;

  bool clamped_x = false;
  bool clamped_y = false;
  if (u < 0.0) { u = 0.0; clamped_x = true; }
  if (u > map.width - 1) { u = map.width - 1; clamped_x = true; }
  if (v < 0.0) { v = 0.0; clamped_y = true; }
  if (v > map.height - 1) { v = map.height - 1; clamped_y = true; }
  if (map.width == 1) clamped_x = true;
  if (map.height == 1) clamped_y = true;

  const int i0 = std::min(static_cast<int>(u), std::max(0, map.width - 2));
  const int j0 = std::min(static_cast<int>(v), std::max(0, map.height - 2));
  const double fu = u - i0;
  const double fv = v - j0;
  const int i1 = std::min(i0 + 1, map.width - 1);
  const int j1 = std::min(j0 + 1, map.height - 1);

  const double c00 = map.at(i0, j0);
  const double c10 = map.at(i1, j0);
  const double c01 = map.at(i0, j1);
  const double c11 = map.at(i1, j1);

  s.value = (1.0 - fu) * (1.0 - fv) * c00 + fu * (1.0 - fv) * c10 +
            (1.0 - fu) * fv * c01 + fu * fv * c11;
  s.grad.x = clamped_x ? 0.0 : ((c10 - c00) * (1.0 - fv) + (c11 - c01) * fv) / map.resolution;
  s.grad.y = clamped_y ? 0.0 : ((c01 - c00) * (1.0 - fu) + (c11 - c10) * fu) / map.resolution;
  return s;
}

CostMap build_costmap(const DepthScan& scan, const Pose& sensor_pose,
                      const CostmapConfig& cfg) {
  GridSpec spec;
  spec.resolution = cfg.resolution;
  spec.width = static_cast<int>(std::lround(cfg.extent / cfg.resolution));
  spec.height = spec.width;
  spec.origin = {sensor_pose.x - cfg.extent * 0.5, sensor_pose.y - cfg.extent * 0.5};
  const OccupancyGrid occ = scan_to_occupancy(scan, spec, sensor_pose);
  return gaussian_smooth(occupancy_to_cost(occ, cfg.d_trunc), cfg.sigma_g);
}

void save_costmap(const CostMap& map, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_costmap: cannot open " + path);
  os.write(kMagic, 4);
  write_le<std::uint16_t>(os, kVersion);
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(map.width));
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(map.height));
  write_le<double>(os, map.resolution);
  write_le<double>(os, map.origin.x);
  write_le<double>(os, map.origin.y);
  for (double v : map.values) write_le<float>(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("save_costmap: write failed on " + path);
}

CostMap load_costmap(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_costmap: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("load_costmap: bad magic in " + path);
  }
  const auto version = read_le<std::uint16_t>(is);
  if (version != kVersion) throw std::runtime_error("load_costmap: unsupported version");
  CostMap map;
  map.width = static_cast<int>(read_le<std::uint32_t>(is));
  map.height = static_cast<int>(read_le<std::uint32_t>(is));
  map.resolution = read_le<double>(is);
  map.origin.x = read_le<double>(is);
  map.origin.y = read_le<double>(is);
  const std::size_t n = static_cast<std::size_t>(map.width) * map.height;
  map.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) map.values[i] = read_le<float>(is);
  if (!is) throw std::runtime_error("load_costmap: truncated file " + path);
  return map;
}

}  // namespace navguide
