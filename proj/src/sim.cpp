#include "navguide/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

namespace navguide {

namespace {

constexpr int kGenAttempts = 100;

double point_rect_distance(const Vec2& p, const Rect& r) {
  const double dx = std::max({r.min.x - p.x, 0.0, p.x - r.max.x});
  const double dy = std::max({r.min.y - p.y, 0.0, p.y - r.max.y});
  if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);
  // inside: negative distance to the closest edge
  const double inner = std::min({p.x - r.min.x, r.max.x - p.x, p.y - r.min.y, r.max.y - p.y});
  return -inner;
}

double rect_rect_distance(const Rect& a, const Rect& b) {
  const double dx = std::max({b.min.x - a.max.x, 0.0, a.min.x - b.max.x});
  const double dy = std::max({b.min.y - a.max.y, 0.0, a.min.y - b.max.y});
  return std::hypot(dx, dy);
}

double disc_rect_distance(const Disc& d, const Rect& r) {
  return point_rect_distance(d.center, r) - d.radius;
}

}  // namespace

double clearance(const World& world, const Vec2& p) {
  double c = std::min({p.x - world.bounds.min.x, world.bounds.max.x - p.x,
                       p.y - world.bounds.min.y, world.bounds.max.y - p.y});
  for (const auto& d : world.discs) {
    c = std::min(c, (p - d.center).norm() - d.radius);
  }
  for (const auto& r : world.rects) {
    c = std::min(c, point_rect_distance(p, r));
  }
  return c;
}

double polyline_clearance(const World& world, const std::vector<Vec2>& pts, double step) {
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 seg = pts[i + 1] - pts[i];
    const double len = seg.norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int k = 0; k <= n; ++k) {
      const Vec2 q = pts[i] + seg * (static_cast<double>(k) / n);
      c = std::min(c, clearance(world, q));
    }
  }
  if (pts.size() == 1) c = clearance(world, pts[0]);
  return c;
}

// ---------------------------------------------------------------------------
// raycasting

namespace {

// nearest positive hit of ray o + t*dir against a disc
std::optional<double> ray_disc(const Vec2& o, const Vec2& dir, const Disc& disc) {
  const Vec2 oc = o - disc.center;
  const double b = oc.dot(dir);
  const double c = oc.norm_sq() - disc.radius * disc.radius;
  const double disc_term = b * b - c;
  if (disc_term < 0.0) return std::nullopt;
  const double root = std::sqrt(disc_term);
  const double t1 = -b - root;
  if (t1 > 0.0) return t1;
  const double t2 = -b + root;
  if (t2 > 0.0) return 0.0;  // origin inside the disc
  return std::nullopt;
}

// slab method; ray origin assumed outside the rect
std::optional<double> ray_rect(const Vec2& o, const Vec2& dir, const Rect& rect) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  const double od[2] = {o.x, o.y};
  const double dd[2] = {dir.x, dir.y};
  const double lo[2] = {rect.min.x, rect.min.y};
  const double hi[2] = {rect.max.x, rect.max.y};
  for (int a = 0; a < 2; ++a) {
    if (std::abs(dd[a]) < 1e-15) {
      if (od[a] < lo[a] || od[a] > hi[a]) return std::nullopt;
      continue;
    }
    double t0 = (lo[a] - od[a]) / dd[a];
    double t1 = (hi[a] - od[a]) / dd[a];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return std::nullopt;
  }
  if (tmax < 0.0) return std::nullopt;
  return std::max(tmin, 0.0);
}

// exit distance through the bounds walls, viewed from inside
double ray_bounds_exit(const Vec2& o, const Vec2& dir, const Rect& bounds) {
  double t = std::numeric_limits<double>::infinity();
  if (dir.x > 1e-15) t = std::min(t, (bounds.max.x - o.x) / dir.x);
  if (dir.x < -1e-15) t = std::min(t, (bounds.min.x - o.x) / dir.x);
  if (dir.y > 1e-15) t = std::min(t, (bounds.max.y - o.y) / dir.y);
  if (dir.y < -1e-15) t = std::min(t, (bounds.min.y - o.y) / dir.y);
  return std::max(t, 0.0);
}

}  // namespace

DepthScan raycast_depth(const World& world, const Pose& pose, const SensorConfig& sensor) {
  if (sensor.rays < 2) throw std::invalid_argument("raycast_depth: need at least 2 rays");
  DepthScan scan;
  scan.max_range = sensor.max_range;
  scan.angles.reserve(sensor.rays);
  scan.ranges.reserve(sensor.rays);
  const Vec2 o = pose.position();

  for (int i = 0; i < sensor.rays; ++i) {
    const double local = -sensor.fov * 0.5 + sensor.fov * i / (sensor.rays - 1);
    const double a = pose.heading + local;
    const Vec2 dir{std::cos(a), std::sin(a)};

    double t = ray_bounds_exit(o, dir, world.bounds);
    for (const auto& d : world.discs) {
      if (const auto hit = ray_disc(o, dir, d)) t = std::min(t, *hit);
    }
    for (const auto& r : world.rects) {
      if (const auto hit = ray_rect(o, dir, r)) t = std::min(t, *hit);
    }
    scan.angles.push_back(local);
    scan.ranges.push_back(std::min(t, sensor.max_range));
  }
  return scan;
}

// ---------------------------------------------------------------------------
// grid reachability helpers

namespace {

struct FreeGrid {
  int width{0}, height{0};
  double resolution{0.1};
  Vec2 origin;
  std::vector<std::uint8_t> free;

  bool is_free(int ix, int iy) const {
    if (ix < 0 || iy < 0 || ix >= width || iy >= height) return false;
    return free[static_cast<std::size_t>(iy) * width + ix] != 0;
  }
  std::pair<int, int> cell_of(const Vec2& p) const {
    return {static_cast<int>(std::floor((p.x - origin.x) / resolution)),
            static_cast<int>(std::floor((p.y - origin.y) / resolution))};
  }
  Vec2 center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
  }
  std::size_t idx(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * width + ix;
  }
};

FreeGrid make_free_grid(const World& world, double inflate, double resolution = 0.1) {
  FreeGrid g;
  g.resolution = resolution;
  g.origin = world.bounds.min;
  g.width = static_cast<int>(std::ceil((world.bounds.max.x - world.bounds.min.x) / resolution));
  g.height = static_cast<int>(std::ceil((world.bounds.max.y - world.bounds.min.y) / resolution));
  g.free.assign(static_cast<std::size_t>(g.width) * g.height, 0);
  for (int iy = 0; iy < g.height; ++iy) {
    for (int ix = 0; ix < g.width; ++ix) {
      if (clearance(world, g.center(ix, iy)) >= inflate) g.free[g.idx(ix, iy)] = 1;
    }
  }
  return g;
}

bool grid_reachable(const FreeGrid& g, const Vec2& from, const Vec2& to) {
  auto [sx, sy] = g.cell_of(from);
  auto [gx, gy] = g.cell_of(to);
  if (!g.is_free(sx, sy) || !g.is_free(gx, gy)) return false;
  std::vector<std::uint8_t> seen(g.free.size(), 0);
  std::deque<std::pair<int, int>> queue{{sx, sy}};
  seen[g.idx(sx, sy)] = 1;
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    if (x == gx && y == gy) return true;
    static constexpr int off[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                      {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
    for (const auto& d : off) {
      const int nx = x + d[0];
      const int ny = y + d[1];
      if (!g.is_free(nx, ny) || seen[g.idx(nx, ny)]) continue;
      seen[g.idx(nx, ny)] = 1;
      queue.emplace_back(nx, ny);
    }
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// world generation

namespace {

Rect region_around(const Vec2& center, double half) {
  return {{center.x - half, center.y - half}, {center.x + half, center.y + half}};
}

bool region_clear(const World& world, const Rect& region, double margin) {
  for (const auto& d : world.discs) {
    if (disc_rect_distance(d, region) < margin) return false;
  }
  for (const auto& r : world.rects) {
    if (rect_rect_distance(r, region) < margin) return false;
  }
  if (region.min.x - world.bounds.min.x < margin ||
      world.bounds.max.x - region.max.x < margin ||
      region.min.y - world.bounds.min.y < margin ||
      world.bounds.max.y - region.max.y < margin) {
    return false;
  }
  return true;
}

std::optional<World> try_outdoor_world(std::uint64_t seed, std::uint64_t attempt,
                                       const WorldGenConfig& cfg) {
  Rng rng(mix_seed(seed, attempt));
  World w;
  w.kind = WorldKind::kOutdoor;
  w.seed = seed;
  w.bounds = {{0.0, 0.0}, {18.0, 18.0}};

  const double margin = 1.5;
  const Vec2 spawn_c{rng.uniform(margin, 18.0 - margin), rng.uniform(margin, 18.0 - margin)};
  const double dist = rng.uniform(cfg.goal_dist_min, cfg.goal_dist_max);
  const double theta = rng.uniform(-kPi, kPi);
  const Vec2 goal_c = spawn_c + Vec2{dist * std::cos(theta), dist * std::sin(theta)};
  if (goal_c.x < margin || goal_c.x > 18.0 - margin || goal_c.y < margin ||
      goal_c.y > 18.0 - margin) {
    return std::nullopt;
  }
  w.spawn = region_around(spawn_c, 0.6);
  w.goal_region = region_around(goal_c, 0.6);

  const int n_discs = static_cast<int>(rng.uniform_int(8, 20));
  const double clear_margin = cfg.robot_radius + 0.1;
  for (int i = 0; i < n_discs; ++i) {
    for (int tries = 0; tries < 20; ++tries) {
      Disc d;
      d.radius = rng.uniform(0.2, 0.8);
      d.center = {rng.uniform(d.radius, 18.0 - d.radius),
                  rng.uniform(d.radius, 18.0 - d.radius)};
      if (disc_rect_distance(d, w.spawn) < clear_margin) continue;
      if (disc_rect_distance(d, w.goal_region) < clear_margin) continue;
      w.discs.push_back(d);
      break;
    }
  }
  if (static_cast<int>(w.discs.size()) < 8) return std::nullopt;

  const FreeGrid g = make_free_grid(w, cfg.robot_radius + 0.05);
  if (!grid_reachable(g, w.spawn.center(), w.goal_region.center())) return std::nullopt;
  return w;
}

// Parallel walls with door gaps; doors cannot collide with other walls, so
// connectivity only needs verification, not repair.
std::optional<World> try_indoor_world(std::uint64_t seed, std::uint64_t attempt,
                                      const WorldGenConfig& cfg) {
  Rng rng(mix_seed(seed, attempt ^ 0x1d00ULL));
  World w;
  w.kind = WorldKind::kIndoor;
  w.seed = seed;
  w.bounds = {{0.0, 0.0}, {12.0, 12.0}};

  const bool vertical = rng.uniform01() < 0.5;
  const int n_walls = static_cast<int>(rng.uniform_int(1, 3));
  const double wall_half = 0.1;
  std::vector<double> positions;
  for (int i = 0; i < n_walls; ++i) {
    const double lo = 12.0 * (i + 1) / (n_walls + 1) - 1.0;
    positions.push_back(rng.uniform(lo, lo + 2.0));
  }
  for (double pos : positions) {
    const int n_doors = static_cast<int>(rng.uniform_int(1, 2));
    std::vector<std::pair<double, double>> doors;
    for (int d = 0; d < n_doors; ++d) {
      const double width = rng.uniform(1.2, 1.8);
      const double start = rng.uniform(0.5, 11.5 - width);
      doors.emplace_back(start, start + width);
    }
    std::sort(doors.begin(), doors.end());
    // merge overlapping doors
    std::vector<std::pair<double, double>> merged;
    for (const auto& d : doors) {
      if (!merged.empty() && d.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, d.second);
      } else {
        merged.push_back(d);
      }
    }
    double cursor = 0.0;
    merged.emplace_back(12.0, 12.0);  // sentinel closes the final segment
    for (const auto& door : merged) {
      if (door.first - cursor > 0.05) {
        Rect seg;
        if (vertical) {
          seg = {{pos - wall_half, cursor}, {pos + wall_half, door.first}};
        } else {
          seg = {{cursor, pos - wall_half}, {door.first, pos + wall_half}};
        }
        w.rects.push_back(seg);
      }
      cursor = door.second;
    }
  }

  // a few free-standing pillars away from the walls
  const int n_pillars = static_cast<int>(rng.uniform_int(0, 3));
  for (int i = 0; i < n_pillars; ++i) {
    for (int tries = 0; tries < 20; ++tries) {
      const double side = rng.uniform(0.3, 0.6);
      const Vec2 c{rng.uniform(1.0, 11.0), rng.uniform(1.0, 11.0)};
      Rect pillar = {{c.x - side / 2, c.y - side / 2}, {c.x + side / 2, c.y + side / 2}};
      bool ok = true;
      for (const auto& r : w.rects) {
        if (rect_rect_distance(r, pillar) < 1.2) { ok = false; break; }
      }
      if (!ok) continue;
      w.rects.push_back(pillar);
      break;
    }
  }

  // spawn/goal centers in clear space at the requested separation
  const double clear_margin = cfg.robot_radius + 0.1;
  for (int tries = 0; tries < 200; ++tries) {
    const Vec2 spawn_c{rng.uniform(1.0, 11.0), rng.uniform(1.0, 11.0)};
    const double dist = rng.uniform(cfg.goal_dist_min, cfg.goal_dist_max);
    const double theta = rng.uniform(-kPi, kPi);
    const Vec2 goal_c = spawn_c + Vec2{dist * std::cos(theta), dist * std::sin(theta)};
    const Rect spawn = region_around(spawn_c, 0.5);
    const Rect goal = region_around(goal_c, 0.5);
    if (!region_clear(w, spawn, clear_margin) || !region_clear(w, goal, clear_margin)) {
      continue;
    }
    w.spawn = spawn;
    w.goal_region = goal;

    const FreeGrid inflated = make_free_grid(w, cfg.robot_radius + 0.05);
    if (!grid_reachable(inflated, spawn_c, goal_c)) continue;

    // all free space must connect to the spawn region
    const FreeGrid open = make_free_grid(w, 0.01);
    auto [sx, sy] = open.cell_of(spawn_c);
    if (!open.is_free(sx, sy)) continue;
    std::vector<std::uint8_t> seen(open.free.size(), 0);
    std::deque<std::pair<int, int>> queue{{sx, sy}};
    seen[open.idx(sx, sy)] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
      auto [x, y] = queue.front();
      queue.pop_front();
      static constexpr int off[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                        {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
      for (const auto& d : off) {
        const int nx = x + d[0];
        const int ny = y + d[1];
        if (!open.is_free(nx, ny) || seen[open.idx(nx, ny)]) continue;
        seen[open.idx(nx, ny)] = 1;
        ++reached;
        queue.emplace_back(nx, ny);
      }
    }
    std::size_t total_free = 0;
    for (auto f : open.free) total_free += f;
    if (reached != total_free) continue;
    return w;
  }
  return std::nullopt;
}

}  // namespace

World gen_world(WorldKind kind, std::uint64_t seed, const WorldGenConfig& cfg) {
  for (std::uint64_t attempt = 0; attempt < kGenAttempts; ++attempt) {
    const auto w = (kind == WorldKind::kOutdoor) ? try_outdoor_world(seed, attempt, cfg)
                                                 : try_indoor_world(seed, attempt, cfg);
    if (w) return *w;
  }
  throw GenerationFailedError(seed);
}

void add_random_obstacles(World& world, int count, Rng& rng, double robot_radius) {
  const Vec2 a = world.spawn.center();
  const Vec2 b = world.goal_region.center();
  const Vec2 ab = b - a;
  const double span = ab.norm();
  const double clear_margin = robot_radius + 0.1;

  int placed = 0;
  for (int tries = 0; tries < 200 && placed < count; ++tries) {
    Disc d;
    d.radius = rng.uniform(0.25, 0.5);
    // somewhere along the corridor, offset laterally
    const double along = rng.uniform(0.25, 0.85);
    const double lateral = rng.uniform(-1.5, 1.5);
    const Vec2 n = span > 1e-9 ? (ab / span).perp() : Vec2{0.0, 1.0};
    d.center = a + ab * along + n * lateral;
    if (d.center.x < d.radius + 0.2 || d.center.x > world.bounds.max.x - d.radius - 0.2 ||
        d.center.y < d.radius + 0.2 || d.center.y > world.bounds.max.y - d.radius - 0.2) {
      continue;
    }
    if (disc_rect_distance(d, world.spawn) < clear_margin) continue;
    if (disc_rect_distance(d, world.goal_region) < clear_margin) continue;

    world.discs.push_back(d);
    const FreeGrid g = make_free_grid(world, robot_radius + 0.05);
    if (!grid_reachable(g, a, b)) {
      world.discs.pop_back();
      continue;
    }
    ++placed;
  }
}

World make_trial_world(Suite suite, std::uint64_t seed, double robot_radius) {
  WorldGenConfig cfg;
  cfg.robot_radius = robot_radius;
  if (suite == Suite::kLong) {
    cfg.goal_dist_min = 7.0;
    cfg.goal_dist_max = 10.0;
  }
  World w = gen_world(WorldKind::kOutdoor, seed, cfg);
  if (suite == Suite::kObstacle) {
    Rng rng(mix_seed(seed, 0x0b57ULL));
    const int extras = static_cast<int>(rng.uniform_int(2, 5));
    add_random_obstacles(w, extras, rng, robot_radius);
  }
  return w;
}

// ---------------------------------------------------------------------------
// waypoint following

namespace {

// exact-arc unicycle step
Pose integrate_unicycle(const Pose& pose, double v, double omega, double dt) {
  Pose next = pose;
  const double h = pose.heading;
  if (std::abs(omega) < 1e-9) {
    next.x += v * dt * std::cos(h);
    next.y += v * dt * std::sin(h);
  } else {
    const double radius = v / omega;
    const double h_new = h + omega * dt;
    next.x += radius * (std::sin(h_new) - std::sin(h));
    next.y += radius * (std::cos(h) - std::cos(h_new));
    next.heading = wrap_angle(h_new);
  }
  return next;
}

}  // namespace

RobotState follow_step(const RobotState& state, const Path& path_robot, double dt,
                       const FollowConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("follow_step: dt must be > 0");

  // lookahead target: first polyline point at distance >= lookahead from the
  // robot (origin in this frame), interpolated on the crossing segment
  Vec2 target;
  bool have_target = false;
  const auto& pts = path_robot.waypoints;
  for (std::size_t i = 0; i + 1 < pts.size() && !have_target; ++i) {
    const Vec2 a = pts[i];
    const Vec2 b = pts[i + 1];
    if (b.norm() < cfg.lookahead) continue;
    // walk the segment to the lookahead circle
    const Vec2 d = b - a;
    const double len = d.norm();
    if (len < 1e-12) continue;
    double t_lo = 0.0, t_hi = 1.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      ((a + d * mid).norm() < cfg.lookahead ? t_lo : t_hi) = mid;
    }
    target = a + d * t_hi;
    have_target = true;
  }
  if (!have_target) {
    if (pts.empty()) return {state.pose, 0.0, 0.0};
    target = pts.back();
    if (target.norm() < 1e-6) return {state.pose, 0.0, 0.0};  // degenerate
  }

  const double d2 = target.norm_sq();
  const double curvature = (d2 > 1e-12) ? 2.0 * target.y / d2 : 0.0;
  const double v = cfg.v_max;
  const double omega = std::clamp(curvature * v, -cfg.omega_max, cfg.omega_max);

  RobotState next = state;
  next.v = v;
  next.omega = omega;
  next.pose = integrate_unicycle(state.pose, v, omega, dt);
  return next;
}

// ---------------------------------------------------------------------------
// trials

std::string suite_name(Suite s) {
  switch (s) {
    case Suite::kBasic: return "basic";
    case Suite::kObstacle: return "obstacle";
    case Suite::kLong: return "long";
  }
  return "?";
}

PlannerConfig default_planner_config(const PlannerModel& model) {
  PlannerConfig cfg;
  cfg.cost.impact = linear_impact(static_cast<std::size_t>(model.params.arch.n_w));
  cfg.guidance.cost_cfg = cfg.cost;
  cfg.guidance.scale = constant_scale(model.sched.T, 1.0);
  return cfg;
}

namespace {

Vec2 sample_in_region(const Rect& region, Rng& rng) {
  return {rng.uniform(region.min.x, region.max.x), rng.uniform(region.min.y, region.max.y)};
}

}  // namespace

TrialResult run_trial(const World& world, const PlannerModel& model, const TrialConfig& cfg,
                      const PlannerConfig& pcfg, std::vector<Pose>* trace) {
  TrialResult result;
  result.seed = cfg.seed;
  result.suite = suite_name(cfg.suite);
  result.guided = cfg.guided;

  Rng rng(mix_seed(cfg.seed, 0x7121a1ULL));
  const Vec2 start = sample_in_region(world.spawn, rng);
  const Vec2 goal_pos = sample_in_region(world.goal_region, rng);
  const double bearing = std::atan2(goal_pos.y - start.y, goal_pos.x - start.x);

  RobotState robot;
  robot.pose = {start.x, start.y, wrap_angle(bearing + rng.uniform(-kPi / 6.0, kPi / 6.0))};

  const Goal goal{goal_pos};
  const int max_steps = static_cast<int>(std::ceil(cfg.time_limit / cfg.control_dt));
  const int stuck_steps = static_cast<int>(std::lround(10.0 / cfg.control_dt));
  const double sigma_r = pcfg.cost.sigma_r;

  SelectionState sel_state;
  std::optional<Path> committed_world;   // committed path, world frame
  std::optional<Path> history_world;     // selection history, world frame
  std::deque<Vec2> recent;               // positions for stuck detection
  bool in_contact = clearance(world, robot.pose.position()) < sigma_r;
  std::uint64_t replan_counter = 0;

  if (trace) trace->push_back(robot.pose);

  for (int step = 0; step < max_steps; ++step) {
    if ((robot.pose.position() - goal_pos).norm() <= cfg.goal_radius) {
      result.success = true;
      break;
    }

    if (step % cfg.replan_period == 0) {
      try {
        const DepthScan scan = raycast_depth(world, robot.pose, pcfg.sensor);
        const ContextVector ctx =
            context_from_scan(scan, pcfg.ctx_bins, model.params.arch.ctx_dim);
        const CostMap map = build_costmap(scan, robot.pose, pcfg.costmap);
        const std::uint64_t sample_seed = mix_seed(cfg.seed, ++replan_counter);

        std::vector<Path> candidates;
        if (cfg.guided) {
          candidates = sample_guided(model.params, ctx, model.sched, sample_seed,
                                     cfg.num_candidates, map, goal, pcfg.guidance,
                                     robot.pose, model.norm);
        } else {
          candidates = sample_unguided(model.params, ctx, model.sched, sample_seed,
                                       cfg.num_candidates, model.norm);
        }

        std::vector<double> costs;
        costs.reserve(candidates.size());
        for (const auto& c : candidates) {
          const Path in_world = robot_to_world(c, robot.pose);
          costs.push_back(total_cost(in_world, map, goal, pcfg.cost).value);
        }

        sel_state.history.reset();
        if (history_world) {
          sel_state.history = world_to_robot(*history_world, robot.pose);
        }
        const SelectResult sel = select(candidates, costs, sel_state, pcfg.selection);
        committed_world = robot_to_world(sel.path, robot.pose);
        history_world = committed_world;
      } catch (const std::exception&) {
        result.failure_reason = FailureReason::kPlannerError;
        result.sim_time = step * cfg.control_dt;
        return result;
      }
    }

    // command at the control rate, integrate in substeps so contact blocks
    // translation (rotation stays free) instead of tunneling through
    const Path path_robot = world_to_robot(*committed_world, robot.pose);
    const RobotState cmd = follow_step(robot, path_robot, cfg.control_dt, pcfg.follow);

    const double sub_dt = cfg.control_dt / kTrialSubsteps;
    RobotState integrated = robot;
    bool blocked = false;
    for (int sub = 0; sub < kTrialSubsteps; ++sub) {
      if (!blocked) {
        const Pose next = integrate_unicycle(integrated.pose, cmd.v, cmd.omega, sub_dt);
        if (clearance(world, next.position()) < sigma_r - 0.01) {
          blocked = true;
        } else {
          result.length += (next.position() - integrated.pose.position()).norm();
          integrated.pose = next;
          if (trace) trace->push_back(integrated.pose);
          continue;
        }
      }
      integrated.pose.heading = wrap_angle(integrated.pose.heading + cmd.omega * sub_dt);
      if (trace) trace->push_back(integrated.pose);
    }
    robot = integrated;
    robot.v = blocked ? 0.0 : cmd.v;
    robot.omega = cmd.omega;

    const bool contact_now = clearance(world, robot.pose.position()) < sigma_r;
    if (contact_now && !in_contact) ++result.collisions;
    in_contact = contact_now;

    recent.push_back(robot.pose.position());
    if (static_cast<int>(recent.size()) > stuck_steps + 1) recent.pop_front();
    if (static_cast<int>(recent.size()) == stuck_steps + 1 &&
        (recent.back() - recent.front()).norm() < 0.1) {
      result.failure_reason = FailureReason::kStuck;
      result.sim_time = (step + 1) * cfg.control_dt;
      return result;
    }

    result.sim_time = (step + 1) * cfg.control_dt;
  }

  if (!result.success) {
    result.failure_reason = FailureReason::kTimeout;
    result.sim_time = cfg.time_limit;
  }
  return result;
}

// ---------------------------------------------------------------------------
// expert data generation

namespace {

struct AStarNode {
  double f{0.0};
  double g{0.0};
  int x{0}, y{0};
  bool operator>(const AStarNode& o) const { return f > o.f; }
};

// Optional vertical mirror of the search grid. Grid discretization gives one
// of two geometrically-tied detours a slightly shorter cell path; mirroring
// half the queries restores both directions without losing optimality.
struct GridView {
  const FreeGrid& grid;
  bool mirror{false};

  int row(int iy) const { return mirror ? grid.height - 1 - iy : iy; }
  bool is_free(int ix, int iy) const { return grid.is_free(ix, row(iy)); }
  Vec2 center(int ix, int iy) const { return grid.center(ix, row(iy)); }
  std::pair<int, int> cell_of(const Vec2& p) const {
    auto [cx, cy] = grid.cell_of(p);
    return {cx, row(cy)};
  }
  std::size_t idx(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * grid.width + ix;
  }
};

std::optional<std::vector<Vec2>> grid_path(const FreeGrid& raw_grid, const Vec2& start,
                                           const Vec2& goal, std::uint64_t jitter_seed) {
  const GridView grid{raw_grid, (mix_seed(jitter_seed, 0xF11bULL) & 1) != 0};
  auto [sx, sy] = grid.cell_of(start);
  auto [gx, gy] = grid.cell_of(goal);
  if (!grid.is_free(sx, sy) || !grid.is_free(gx, gy)) return std::nullopt;

  const std::size_t n = raw_grid.free.size();
  std::vector<double> g_cost(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::priority_queue<AStarNode, std::vector<AStarNode>, std::greater<>> open;

  const auto heuristic = [&](int x, int y) {
    const double h = std::hypot(static_cast<double>(x - gx), static_cast<double>(y - gy));
    // deterministic per-sample jitter breaks exact ties
    const double j = static_cast<double>(mix_seed(jitter_seed, grid.idx(x, y)) & 0xffff) * 1e-9;
    return h + j;
  };

  g_cost[grid.idx(sx, sy)] = 0.0;
  open.push({heuristic(sx, sy), 0.0, sx, sy});
  static constexpr int off[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                    {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
  static const double step_cost[8] = {1, 1, 1, 1, std::sqrt(2.0), std::sqrt(2.0),
                                      std::sqrt(2.0), std::sqrt(2.0)};

  bool found = false;
  while (!open.empty()) {
    const AStarNode cur = open.top();
    open.pop();
    if (cur.g > g_cost[grid.idx(cur.x, cur.y)]) continue;
    if (cur.x == gx && cur.y == gy) {
      found = true;
      break;
    }
    for (int k = 0; k < 8; ++k) {
      const int nx = cur.x + off[k][0];
      const int ny = cur.y + off[k][1];
      if (!grid.is_free(nx, ny)) continue;
      const double ng = cur.g + step_cost[k];
      if (ng < g_cost[grid.idx(nx, ny)]) {
        g_cost[grid.idx(nx, ny)] = ng;
        parent[grid.idx(nx, ny)] = static_cast<int>(grid.idx(cur.x, cur.y));
        open.push({ng + heuristic(nx, ny), ng, nx, ny});
      }
    }
  }
  if (!found) return std::nullopt;

  std::vector<Vec2> pts;
  int idx = static_cast<int>(grid.idx(gx, gy));
  while (idx >= 0) {
    const int y = idx / raw_grid.width;
    const int x = idx % raw_grid.width;
    pts.push_back(grid.center(x, y));
    idx = parent[idx];
  }
  std::reverse(pts.begin(), pts.end());
  if (pts.size() == 1) return std::vector<Vec2>{start, goal};
  pts.front() = start;
  pts.back() = goal;
  return pts;
}

// greedy string pulling: jump to the farthest directly-reachable point
std::vector<Vec2> shortcut(const World& world, const std::vector<Vec2>& pts,
                           double min_clearance) {
  if (pts.size() <= 2) return pts;
  std::vector<Vec2> out{pts.front()};
  std::size_t i = 0;
  while (i + 1 < pts.size()) {
    std::size_t best = i + 1;
    for (std::size_t j = pts.size() - 1; j > i + 1; --j) {
      if (polyline_clearance(world, {pts[i], pts[j]}, 0.02) >= min_clearance) {
        best = j;
        break;
      }
    }
    out.push_back(pts[best]);
    i = best;
  }
  return out;
}

double polyline_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) len += (pts[i + 1] - pts[i]).norm();
  return len;
}

std::vector<Vec2> resample_polyline(const std::vector<Vec2>& pts, int n, double max_len) {
  const double len = std::min(polyline_length(pts), max_len);
  std::vector<Vec2> out;
  out.reserve(n);
  double walked = 0.0;
  std::size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double s = len * k / (n - 1);
    while (seg + 1 < pts.size() - 1 &&
           walked + (pts[seg + 1] - pts[seg]).norm() < s) {
      walked += (pts[seg + 1] - pts[seg]).norm();
      ++seg;
    }
    const Vec2 d = pts[seg + 1] - pts[seg];
    const double seg_len = d.norm();
    const double frac = seg_len > 1e-12 ? std::clamp((s - walked) / seg_len, 0.0, 1.0) : 0.0;
    out.push_back(pts[seg] + d * frac);
  }
  return out;
}

Vec2 sample_free_position(const World& world, Rng& rng, double min_clearance) {
  for (int tries = 0; tries < 1000; ++tries) {
    const Vec2 p{rng.uniform(world.bounds.min.x, world.bounds.max.x),
                 rng.uniform(world.bounds.min.y, world.bounds.max.y)};
    if (clearance(world, p) >= min_clearance) return p;
  }
  throw GenerationFailedError(world.seed);
}

}  // namespace

namespace {

// core of the oracle, shared by the dataset generator and the single-path
// entry point; returns nullopt on unreachable, false-bool on clearance reject
std::optional<std::vector<Vec2>> expert_points_on_grid(const World& world,
                                                       const FreeGrid& grid,
                                                       const Vec2& start, const Vec2& goal,
                                                       const ExpertGenConfig& cfg,
                                                       std::uint64_t jitter_seed,
                                                       bool* rejected) {
  if (rejected) *rejected = false;
  const auto raw = grid_path(grid, start, goal, jitter_seed);
  if (!raw) return std::nullopt;
  const auto pulled = shortcut(world, *raw, cfg.sigma_r + 0.02);
  const auto resampled = resample_polyline(pulled, cfg.n_w, cfg.horizon_frac * cfg.r_max);
  if (polyline_clearance(world, resampled, 0.01) < cfg.sigma_r) {
    if (rejected) *rejected = true;
    return std::nullopt;
  }
  return resampled;
}

}  // namespace

std::optional<std::vector<Vec2>> expert_path_points(const World& world, const Vec2& start,
                                                    const Vec2& goal,
                                                    const ExpertGenConfig& cfg,
                                                    std::uint64_t seed) {
  const FreeGrid grid = make_free_grid(world, cfg.sigma_r + 0.08);
  return expert_points_on_grid(world, grid, start, goal, cfg, seed, nullptr);
}

ExpertDataset gen_expert_dataset(int worlds, int samples_per_world, std::uint64_t seed,
                                 const ExpertGenConfig& cfg) {
  if (worlds < 1 || samples_per_world < 1) {
    throw std::invalid_argument("gen_expert_dataset: counts must be >= 1");
  }
  ExpertDataset out;
  out.samples.reserve(static_cast<std::size_t>(worlds) * samples_per_world);

  for (int w = 0; w < worlds; ++w) {
    const std::uint64_t world_seed = mix_seed(seed, static_cast<std::uint64_t>(w));
    const World world = gen_world(cfg.kind, world_seed);
    // inflation slightly over sigma_r + half cell diagonal keeps grid paths
    // clear of the final verification threshold
    const FreeGrid grid = make_free_grid(world, cfg.sigma_r + 0.08);

    for (int s = 0; s < samples_per_world; ++s) {
      const std::uint64_t sample_seed = mix_seed(world_seed, static_cast<std::uint64_t>(s));
      Rng rng(sample_seed);

      bool emitted = false;
      for (int attempt = 0; attempt < 50 && !emitted; ++attempt) {
        const Vec2 start = sample_free_position(world, rng, cfg.sigma_r + 0.1);
        const double dist = rng.uniform(cfg.goal_dist_min, cfg.goal_dist_max);
        const double theta = rng.uniform(-kPi, kPi);
        const Vec2 goal = start + Vec2{dist * std::cos(theta), dist * std::sin(theta)};
        if (clearance(world, goal) < cfg.sigma_r + 0.1) continue;

        bool rejected = false;
        const auto resampled = expert_points_on_grid(world, grid, start, goal, cfg,
                                                     mix_seed(sample_seed, attempt), &rejected);
        if (!resampled) {
          if (rejected) ++out.rejected;
          continue;
        }

        Pose pose;
        pose.x = start.x;
        pose.y = start.y;
        const double bearing = std::atan2(goal.y - start.y, goal.x - start.x);
        pose.heading = wrap_angle(bearing + rng.uniform(-kPi / 4.0, kPi / 4.0));

        Path robot_frame = world_to_robot(Path{*resampled}, pose);
        const DepthScan scan = raycast_depth(world, pose, cfg.sensor);

        ExpertSample sample;
        sample.ctx = context_from_scan(scan, cfg.ctx_bins, cfg.ctx_dim);
        sample.npath = normalize(robot_frame, NormSpec{cfg.r_max});
        sample.world_id = world_seed;
        sample.pose = pose;
        sample.goal = goal;
        out.samples.push_back(std::move(sample));
        emitted = true;
      }
    }
  }
  return out;
}

}  // namespace navguide
