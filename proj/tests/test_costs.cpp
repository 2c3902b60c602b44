#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "navguide/costs.hpp"
#include "navguide/rng.hpp"

using namespace navguide;

namespace {

CostMap random_map(Rng& rng, int w, int h, double res, Vec2 origin) {
  CostMap map;
  map.width = w;
  map.height = h;
  map.resolution = res;
  map.origin = origin;
  map.values.resize(static_cast<std::size_t>(w) * h);
  for (auto& v : map.values) v = rng.uniform01();
  return map;
}

Path random_path(Rng& rng, std::size_t n, double span) {
  Path p;
  for (std::size_t i = 0; i < n; ++i) {
    p.waypoints.push_back({rng.uniform(-span, span), rng.uniform(-span, span)});
  }
  return p;
}

bool off_cell_boundaries(const CostMap& map, const Vec2& p, double margin = 2e-3) {
  const double u = (p.x - map.origin.x) / map.resolution - 0.5;
  const double v = (p.y - map.origin.y) / map.resolution - 0.5;
  return std::abs(u - std::round(u)) > margin && std::abs(v - std::round(v)) > margin;
}

// The collision gradient treats offset directions as constants, so the
// reference function differenced here moves each offset rigidly with its
// center waypoint.
double frozen_offset_collision(const Path& base, const Path& eval, const CostMap& map,
                               const CostConfig& cfg) {
  const auto [left, right] = lateral_offsets(base, cfg.sigma_r);
  double value = 0.0;
  for (std::size_t t = 0; t < base.size(); ++t) {
    const Vec2 dl = left[t] - base.waypoints[t];
    const Vec2 dr = right[t] - base.waypoints[t];
    value += cfg.impact[t] * (sample_cost(map, eval.waypoints[t]).value +
                              sample_cost(map, eval.waypoints[t] + dl).value +
                              sample_cost(map, eval.waypoints[t] + dr).value);
  }
  return value;
}

CostConfig default_cfg(std::size_t n) {
  CostConfig cfg;
  cfg.impact = linear_impact(n);
  return cfg;
}

}  // namespace

TEST_CASE("goal_cost examples") {
  Path p{{{0, 0}, {0.5, 0.5}, {1, 1}}};
  const auto hit = goal_cost(p, Goal{{1, 1}});
  CHECK(hit.value == 0.0);
  for (const auto& g : hit.grad) {
    CHECK(g.x == 0.0);
    CHECK(g.y == 0.0);
  }

  Path q{{{1, 1}, {0.5, 0.5}, {0, 0}}};
  const auto far = goal_cost(q, Goal{{3, 4}});
  CHECK(far.value == doctest::Approx(25.0));
  CHECK(far.grad.back().x == doctest::Approx(-6.0));
  CHECK(far.grad.back().y == doctest::Approx(-8.0));
  CHECK(far.grad[0].x == 0.0);
  CHECK(far.grad[1].x == 0.0);
}

TEST_CASE("goal_cost gradient matches finite differences") {
  Rng rng(17);
  const double h = 1e-5;
  for (int rep = 0; rep < 200; ++rep) {
    Path p = random_path(rng, 8, 4.0);
    const Goal goal{{rng.uniform(-4, 4), rng.uniform(-4, 4)}};
    const auto eval = goal_cost(p, goal);
    for (std::size_t w = 0; w < p.size(); ++w) {
      for (int axis = 0; axis < 2; ++axis) {
        Path plus = p, minus = p;
        (axis == 0 ? plus.waypoints[w].x : plus.waypoints[w].y) += h;
        (axis == 0 ? minus.waypoints[w].x : minus.waypoints[w].y) -= h;
        const double fd = (goal_cost(plus, goal).value - goal_cost(minus, goal).value) / (2 * h);
        const double analytic = axis == 0 ? eval.grad[w].x : eval.grad[w].y;
        CHECK(std::abs(analytic - fd) / std::max(1.0, std::abs(fd)) < 1e-6);
      }
    }
  }
}

TEST_CASE("lateral offsets for axis-aligned paths") {
  Path px{{{0, 0}, {1, 0}, {2, 0}, {3, 0}}};
  const auto [left_x, right_x] = lateral_offsets(px, 0.25);
  for (std::size_t t = 0; t < px.size(); ++t) {
    CHECK(left_x[t].x == doctest::Approx(px.waypoints[t].x));
    CHECK(left_x[t].y == doctest::Approx(0.25));
    CHECK(right_x[t].y == doctest::Approx(-0.25));
  }

  Path py{{{0, 0}, {0, 1}, {0, 2}}};
  const auto [left_y, right_y] = lateral_offsets(py, 0.25);
  for (std::size_t t = 0; t < py.size(); ++t) {
    CHECK(left_y[t].x == doctest::Approx(-0.25));
    CHECK(left_y[t].y == doctest::Approx(py.waypoints[t].y));
    CHECK(right_y[t].x == doctest::Approx(0.25));
  }
}

TEST_CASE("lateral offsets at a right-angle bend follow the incoming segment") {
  // +x then +y; hand-computed: the corner keeps the incoming (+x) direction,
  // the final point uses its own incoming (+y) segment
  Path bend{{{0, 0}, {1, 0}, {1, 1}}};
  const auto [left, right] = lateral_offsets(bend, 0.25);

  // waypoint 0 heads +x: normal +y
  CHECK(left[0].x == doctest::Approx(0.0));
  CHECK(left[0].y == doctest::Approx(0.25));
  CHECK(right[0].y == doctest::Approx(-0.25));
  // corner waypoint 1, incoming +x: offsets straight up/down from (1, 0)
  CHECK(left[1].x == doctest::Approx(1.0));
  CHECK(left[1].y == doctest::Approx(0.25));
  CHECK(right[1].y == doctest::Approx(-0.25));
  // waypoint 2, incoming +y: normal -x
  CHECK(left[2].x == doctest::Approx(0.75));
  CHECK(left[2].y == doctest::Approx(1.0));
  CHECK(right[2].x == doctest::Approx(1.25));
}

TEST_CASE("lateral offsets reject a fully degenerate path") {
  Path p{{{1, 1}, {1, 1}, {1, 1}}};
  CHECK_THROWS_AS(lateral_offsets(p, 0.25), DegeneratePathError);
}

TEST_CASE("collision_cost is zero far from obstacles") {
  OccupancyGrid g;
  g.width = 120;
  g.height = 120;
  g.resolution = 0.1;
  g.origin = {-6, -6};
  g.cells.assign(120 * 120, 0);
  g.cells[60 * 120 + 110] = 1;  // obstacle near +x edge at ~ (5.05, 0.05)
  const auto map = gaussian_smooth(occupancy_to_cost(g, 1.0), 2.0);

  // path on the other side, comfortably outside d_trunc + 3 sigma + sigma_r
  Path p{{{-4, 0}, {-3.5, 0}, {-3, 0}, {-2.5, 0}, {-2, 0}, {-1.5, 0}, {-1, 0}, {-0.5, 0}}};
  const auto eval = collision_cost(p, map, default_cfg(8));
  CHECK(eval.value == 0.0);
  for (const auto& grad : eval.grad) {
    CHECK(grad.x == 0.0);
    CHECK(grad.y == 0.0);
  }
}

TEST_CASE("collision_cost single-term composition") {
  // unsmoothed map with d_trunc = one cell: only the occupied cell has cost
  OccupancyGrid g;
  g.width = 40;
  g.height = 40;
  g.resolution = 0.1;
  g.origin = {-2, -2};
  g.cells.assign(1600, 0);
  g.cells[20 * 40 + 30] = 1;  // cell center (1.05, 0.05)
  const auto map = occupancy_to_cost(g, 0.1);

  CostConfig cfg = default_cfg(2);
  cfg.impact = {0.0, 1.0};
  cfg.sigma_r = 0.25;
  // waypoint 1 on the occupied cell center, heading +x so offsets are lateral
  Path p{{{0.05, 0.05}, {1.05, 0.05}}};
  const auto eval = collision_cost(p, map, cfg);
  CHECK(eval.value == doctest::Approx(sample_cost(map, {1.05, 0.05}).value));
  CHECK(eval.value == doctest::Approx(1.0));
}

TEST_CASE("collision_cost equals term-by-term direct summation") {
  Rng rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    const auto map = random_map(rng, 60, 60, 0.1, {-3, -3});
    const Path p = random_path(rng, 8, 2.5);
    const auto cfg = default_cfg(8);
    const auto eval = collision_cost(p, map, cfg);
    const double direct = frozen_offset_collision(p, p, map, cfg);
    CHECK(eval.value == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("collision_cost gradient matches finite differences") {
  Rng rng(101);
  const double h = 1e-5;
  int probes = 0;
  while (probes < 1000) {
    const auto map = random_map(rng, 60, 60, 0.1, {-3, -3});
    const Path p = random_path(rng, 8, 2.5);
    const auto cfg = default_cfg(8);

    const auto [left, right] = lateral_offsets(p, cfg.sigma_r);
    bool clean = true;
    for (std::size_t t = 0; t < p.size() && clean; ++t) {
      clean = off_cell_boundaries(map, p.waypoints[t]) &&
              off_cell_boundaries(map, left[t]) && off_cell_boundaries(map, right[t]);
    }
    if (!clean) continue;

    const auto eval = collision_cost(p, map, cfg);
    for (std::size_t w = 0; w < p.size(); ++w) {
      for (int axis = 0; axis < 2; ++axis) {
        Path plus = p, minus = p;
        (axis == 0 ? plus.waypoints[w].x : plus.waypoints[w].y) += h;
        (axis == 0 ? minus.waypoints[w].x : minus.waypoints[w].y) -= h;
        const double fd = (frozen_offset_collision(p, plus, map, cfg) -
                           frozen_offset_collision(p, minus, map, cfg)) /
                          (2 * h);
        const double analytic = axis == 0 ? eval.grad[w].x : eval.grad[w].y;
        CHECK(std::abs(analytic - fd) / std::max(1.0, std::abs(fd)) < 1e-3);
        ++probes;
      }
    }
  }
}

TEST_CASE("total_cost weights compose linearly") {
  Rng rng(7);
  const auto map = random_map(rng, 60, 60, 0.1, {-3, -3});
  const Path p = random_path(rng, 8, 2.5);
  const Goal goal{{2.0, 1.0}};

  CostConfig cfg = default_cfg(8);
  cfg.alpha = 0.0;
  cfg.beta = 0.006;
  const auto only_c = total_cost(p, map, goal, cfg);
  const auto fc = collision_cost(p, map, cfg);
  CHECK(only_c.value == cfg.beta * fc.value);

  cfg.alpha = 0.03;
  cfg.beta = 0.0;
  const auto only_g = total_cost(p, map, goal, cfg);
  const auto fg = goal_cost(p, goal);
  CHECK(only_g.value == cfg.alpha * fg.value);

  // the paper-configured weights equal the independently composed sum
  cfg.alpha = 0.03;
  cfg.beta = 0.006;
  const auto both = total_cost(p, map, goal, cfg);
  CHECK(both.value == doctest::Approx(0.03 * fg.value + 0.006 * fc.value).epsilon(1e-12));

  // exact homogeneity under doubled weights
  CostConfig doubled = cfg;
  doubled.alpha *= 2.0;
  doubled.beta *= 2.0;
  const auto twice = total_cost(p, map, goal, doubled);
  CHECK(twice.value == 2.0 * both.value);
  for (std::size_t w = 0; w < p.size(); ++w) {
    CHECK(twice.grad[w].x == 2.0 * both.grad[w].x);
    CHECK(twice.grad[w].y == 2.0 * both.grad[w].y);
  }
}

TEST_CASE("total_cost without a goal drops the goal term") {
  Rng rng(8);
  const auto map = random_map(rng, 40, 40, 0.1, {-2, -2});
  const Path p = random_path(rng, 8, 1.5);
  const auto cfg = default_cfg(8);
  const auto eval = total_cost(p, map, std::nullopt, cfg);
  const auto fc = collision_cost(p, map, cfg);
  CHECK(eval.value == cfg.beta * fc.value);
  CHECK(eval.grad.back().x == cfg.beta * fc.grad.back().x);
}

TEST_CASE("total_cost gradient matches finite differences") {
  Rng rng(202);
  const double h = 1e-5;
  int probes = 0;
  while (probes < 500) {
    const auto map = random_map(rng, 60, 60, 0.1, {-3, -3});
    const Path p = random_path(rng, 8, 2.5);
    const Goal goal{{rng.uniform(-2, 2), rng.uniform(-2, 2)}};
    const auto cfg = default_cfg(8);

    const auto [left, right] = lateral_offsets(p, cfg.sigma_r);
    bool clean = true;
    for (std::size_t t = 0; t < p.size() && clean; ++t) {
      clean = off_cell_boundaries(map, p.waypoints[t]) &&
              off_cell_boundaries(map, left[t]) && off_cell_boundaries(map, right[t]);
    }
    if (!clean) continue;

    const auto eval = total_cost(p, map, goal, cfg);
    const auto f = [&](const Path& q) {
      return cfg.alpha * goal_cost(q, goal).value +
             cfg.beta * frozen_offset_collision(p, q, map, cfg);
    };
    for (std::size_t w = 0; w < p.size(); ++w) {
      for (int axis = 0; axis < 2; ++axis) {
        Path plus = p, minus = p;
        (axis == 0 ? plus.waypoints[w].x : plus.waypoints[w].y) += h;
        (axis == 0 ? minus.waypoints[w].x : minus.waypoints[w].y) -= h;
        const double fd = (f(plus) - f(minus)) / (2 * h);
        const double analytic = axis == 0 ? eval.grad[w].x : eval.grad[w].y;
        CHECK(std::abs(analytic - fd) / std::max(1.0, std::abs(fd)) < 1e-3);
        ++probes;
      }
    }
  }
}

TEST_CASE("collision_cost is non-negative") {
  Rng rng(303);
  for (int rep = 0; rep < 50; ++rep) {
    const auto map = random_map(rng, 40, 40, 0.1, {-2, -2});
    const Path p = random_path(rng, 8, 1.8);
    CHECK(collision_cost(p, map, default_cfg(8)).value >= 0.0);
  }
}
