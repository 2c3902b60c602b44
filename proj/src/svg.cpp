#include "navguide/svg.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace navguide {

namespace {

// fixed-format floats keep the output byte-stable
std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void polyline(std::ostringstream& os, const Path& path, const char* color, double width) {
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width)
     << "\" points=\"";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) os << " ";
    os << num(path.waypoints[i].x) << "," << num(-path.waypoints[i].y);
  }
  os << "\"/>\n";
}

}  // namespace

std::string render_scene_svg(const World& world, const CostMap& map,
                             const std::vector<Path>& unguided,
                             const std::vector<Path>& guided, const Pose& pose,
                             const std::optional<Vec2>& goal) {
  std::ostringstream os;
  const double x0 = world.bounds.min.x;
  const double y0 = world.bounds.min.y;
  const double w = world.bounds.max.x - x0;
  const double h = world.bounds.max.y - y0;

  // y axis flipped so +y points up
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(x0) << " "
     << num(-(y0 + h)) << " " << num(w) << " " << num(h) << "\" width=\"800\" height=\"800\">\n";
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(-(y0 + h)) << "\" width=\"" << num(w)
     << "\" height=\"" << num(h) << "\" fill=\"#ffffff\" stroke=\"#333333\" stroke-width=\""
     << num(0.05) << "\"/>\n";

  // cost map shading (skip near-zero cells to keep the file small)
  for (int iy = 0; iy < map.height; ++iy) {
    for (int ix = 0; ix < map.width; ++ix) {
      const double v = map.at(ix, iy);
      if (v < 0.02) continue;
      const Vec2 c = map.cell_center(ix, iy);
      os << "<rect x=\"" << num(c.x - map.resolution / 2) << "\" y=\""
         << num(-(c.y + map.resolution / 2)) << "\" width=\"" << num(map.resolution)
         << "\" height=\"" << num(map.resolution) << "\" fill=\"#cc8800\" fill-opacity=\""
         << num(0.6 * v) << "\"/>\n";
    }
  }

  for (const auto& d : world.discs) {
    os << "<circle cx=\"" << num(d.center.x) << "\" cy=\"" << num(-d.center.y) << "\" r=\""
       << num(d.radius) << "\" fill=\"#555555\"/>\n";
  }
  for (const auto& r : world.rects) {
    os << "<rect x=\"" << num(r.min.x) << "\" y=\"" << num(-r.max.y) << "\" width=\""
       << num(r.max.x - r.min.x) << "\" height=\"" << num(r.max.y - r.min.y)
       << "\" fill=\"#555555\"/>\n";
  }

  for (const auto& p : unguided) polyline(os, p, "#3366cc", 0.03);
  for (const auto& p : guided) polyline(os, p, "#cc3333", 0.03);

  // robot pose triangle
  {
    const double c = std::cos(pose.heading);
    const double s = std::sin(pose.heading);
    const Vec2 tip{pose.x + 0.3 * c, pose.y + 0.3 * s};
    const Vec2 left{pose.x - 0.15 * c - 0.12 * s, pose.y - 0.15 * s + 0.12 * c};
    const Vec2 right{pose.x - 0.15 * c + 0.12 * s, pose.y - 0.15 * s - 0.12 * c};
    os << "<polygon fill=\"#118811\" points=\"" << num(tip.x) << "," << num(-tip.y) << " "
       << num(left.x) << "," << num(-left.y) << " " << num(right.x) << "," << num(-right.y)
       << "\"/>\n";
  }

  if (goal) {
    os << "<circle cx=\"" << num(goal->x) << "\" cy=\"" << num(-goal->y)
       << "\" r=\"0.15\" fill=\"none\" stroke=\"#118811\" stroke-width=\"0.06\"/>\n";
    os << "<circle cx=\"" << num(goal->x) << "\" cy=\"" << num(-goal->y)
       << "\" r=\"0.03\" fill=\"#118811\"/>\n";
  }

  os << "</svg>\n";
  return os.str();
}

}  // namespace navguide
