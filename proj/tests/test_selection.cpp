#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "navguide/rng.hpp"
#include "navguide/selection.hpp"

using namespace navguide;

namespace {

Path straight(double heading, double step = 0.5, std::size_t n = 8) {
  Path p;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = step * (i + 1);
    p.waypoints.push_back({s * std::cos(heading), s * std::sin(heading)});
  }
  return p;
}

Path random_path(Rng& rng, std::size_t n = 8) {
  Path p;
  for (std::size_t i = 0; i < n; ++i) {
    p.waypoints.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4)});
  }
  return p;
}

SelectionConfig cfg_default() { return SelectionConfig{}; }

}  // namespace

TEST_CASE("direction_difference basics") {
  const Path px = straight(0.0);
  CHECK(*direction_difference(px, px, 4) == doctest::Approx(0.0));

  const Path py = straight(kPi / 2);
  CHECK(*direction_difference(px, py, 4) == doctest::Approx(kPi / 2));

  const Path pneg = straight(kPi);
  CHECK(*direction_difference(px, pneg, 4) == doctest::Approx(kPi));
}

TEST_CASE("direction_difference flags degenerate paths") {
  Path zero;
  zero.waypoints.assign(8, {0, 0});
  CHECK_FALSE(direction_difference(zero, straight(0.0), 4).has_value());
}

TEST_CASE("consistent_subset without history returns everything") {
  const std::vector<Path> cands{straight(0.0), straight(1.0), straight(-2.0)};
  const auto out = consistent_subset(cands, SelectionState{}, cfg_default());
  REQUIRE(out.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out[i].waypoints[0].x == cands[i].waypoints[0].x);
  }
}

TEST_CASE("consistent_subset filters by the direction threshold") {
  SelectionState state;
  state.history = straight(0.0);
  const std::vector<Path> cands{straight(0.1), straight(kPi / 2)};
  const auto out = consistent_subset(cands, state, cfg_default());
  REQUIRE(out.size() == 1);
  CHECK(*direction_difference(out[0], *state.history, 4) < kPi / 4);
}

TEST_CASE("consistent_subset can be empty") {
  SelectionState state;
  state.history = straight(0.0);
  const std::vector<Path> cands{straight(kPi / 2), straight(-kPi / 2), straight(kPi)};
  CHECK(consistent_subset(cands, state, cfg_default()).empty());
}

TEST_CASE("select picks the single candidate") {
  const std::vector<Path> cands{straight(0.3)};
  const auto r = select(cands, {5.0}, SelectionState{}, cfg_default());
  CHECK(r.index == 0);
  CHECK(r.path.waypoints == cands[0].waypoints);
  REQUIRE(r.state.history.has_value());
}

TEST_CASE("select takes the cheapest consistent candidate") {
  SelectionState state;
  state.history = straight(0.0);
  const std::vector<Path> cands{straight(0.05), straight(-0.05)};
  const auto r = select(cands, {2.0, 1.0}, state, cfg_default());
  CHECK(r.index == 1);
}

TEST_CASE("select falls back to the global argmin when nothing is consistent") {
  SelectionState state;
  state.history = straight(0.0);
  const std::vector<Path> cands{straight(kPi), straight(kPi / 2), straight(-kPi / 2)};
  const auto r = select(cands, {3.0, 1.0, 2.0}, state, cfg_default());
  CHECK(r.index == 1);
}

TEST_CASE("select breaks ties toward the lower index") {
  const std::vector<Path> cands{straight(0.1), straight(0.2), straight(0.3)};
  const auto r = select(cands, {1.0, 1.0, 1.0}, SelectionState{}, cfg_default());
  CHECK(r.index == 0);
}

TEST_CASE("select is deterministic") {
  Rng rng(4);
  SelectionState state;
  state.history = straight(0.2);
  std::vector<Path> cands;
  std::vector<double> costs;
  for (int i = 0; i < 16; ++i) {
    cands.push_back(random_path(rng));
    costs.push_back(rng.uniform01());
  }
  const auto a = select(cands, costs, state, cfg_default());
  const auto b = select(cands, costs, state, cfg_default());
  CHECK(a.index == b.index);
  CHECK(a.path.waypoints == b.path.waypoints);
}

TEST_CASE("pre-blend choice stays within epsilon of history when possible") {
  Rng rng(9);
  const auto cfg = cfg_default();
  for (int rep = 0; rep < 200; ++rep) {
    SelectionState state;
    state.history = straight(rng.uniform(-kPi, kPi));
    std::vector<Path> cands;
    std::vector<double> costs;
    for (int i = 0; i < 12; ++i) {
      cands.push_back(random_path(rng));
      costs.push_back(rng.uniform01());
    }
    const auto subset = consistent_subset(cands, state, cfg);
    const auto r = select(cands, costs, state, cfg);
    if (!subset.empty()) {
      const auto delta = direction_difference(cands[r.index], *state.history, cfg.m);
      REQUIRE(delta.has_value());
      CHECK(*delta < cfg.epsilon);
    }
  }
}

TEST_CASE("blend examples") {
  const Path cur{{{1, 0}, {2, 0}}};
  const Path hist{{{0, 0}, {0, 0}}};

  const auto unchanged = blend(cur, hist, 0.0);
  CHECK(unchanged.waypoints[0].x == 1.0);

  const auto mixed = blend(cur, hist, 0.3);
  CHECK(mixed.waypoints[0].x == doctest::Approx(0.7));
  CHECK(mixed.waypoints[1].x == doctest::Approx(1.4));

  const auto fixed_point = blend(cur, cur, 0.42);
  for (std::size_t i = 0; i < cur.size(); ++i) {
    CHECK(fixed_point.waypoints[i].x == doctest::Approx(cur.waypoints[i].x).epsilon(1e-15));
  }
}

TEST_CASE("blend is a convex combination") {
  Rng rng(12);
  for (int rep = 0; rep < 1000; ++rep) {
    const Path a = random_path(rng);
    const Path b = random_path(rng);
    const double alpha = 0.3;
    const auto m = blend(a, b, alpha);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Vec2 expect = a.waypoints[i] * (1.0 - alpha) + b.waypoints[i] * alpha;
      CHECK(std::abs(m.waypoints[i].x - expect.x) < 1e-12);
      CHECK(std::abs(m.waypoints[i].y - expect.y) < 1e-12);
      CHECK(m.waypoints[i].x <= std::max(a.waypoints[i].x, b.waypoints[i].x) + 1e-12);
      CHECK(m.waypoints[i].x >= std::min(a.waypoints[i].x, b.waypoints[i].x) - 1e-12);
      CHECK(m.waypoints[i].y <= std::max(a.waypoints[i].y, b.waypoints[i].y) + 1e-12);
      CHECK(m.waypoints[i].y >= std::min(a.waypoints[i].y, b.waypoints[i].y) - 1e-12);
    }
  }
}

TEST_CASE("select blends the choice against history and stores it") {
  SelectionState state;
  state.history = straight(0.0);
  const std::vector<Path> cands{straight(0.1)};
  const auto cfg = cfg_default();
  const auto r = select(cands, {1.0}, state, cfg);
  const auto expect = blend(cands[0], *state.history, cfg.blend_alpha);
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(r.path.waypoints[i].x == doctest::Approx(expect.waypoints[i].x));
    CHECK(r.path.waypoints[i].y == doctest::Approx(expect.waypoints[i].y));
  }
  REQUIRE(r.state.history.has_value());
  CHECK(r.state.history->waypoints == r.path.waypoints);
}
