#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "navguide/diffusion.hpp"
#include "navguide/rng.hpp"

using namespace navguide;

namespace {

ArchDescriptor toy_arch() {
  ArchDescriptor a;
  a.n_w = 8;
  a.ctx_dim = 6;
  a.temb_dim = 8;
  a.hidden_width = 64;
  a.hidden_depth = 2;
  return a;
}

ContextVector fixed_ctx(int dim) {
  ContextVector c;
  c.features.assign(static_cast<std::size_t>(dim), 0.5);
  return c;
}

NormalizedPath straight_mode() {
  NormalizedPath p;
  for (int i = 0; i < 8; ++i) p.waypoints.push_back({0.08 * (i + 1), 0.02 * (i + 1)});
  return p;
}

// gentle arcs ending at (+-0.24 lateral, 0.64 forward) in normalized space
NormalizedPath arc_mode(double side) {
  NormalizedPath p;
  for (int i = 0; i < 8; ++i) {
    const double s = (i + 1) / 8.0;
    p.waypoints.push_back({0.64 * s, side * 0.24 * s * s});
  }
  return p;
}

std::vector<TrainBatchItem> repeated_dataset(const std::vector<NormalizedPath>& modes,
                                             int copies, int ctx_dim) {
  std::vector<TrainBatchItem> data;
  for (int i = 0; i < copies; ++i) {
    for (const auto& m : modes) data.push_back({fixed_ctx(ctx_dim), m});
  }
  return data;
}

DenoiserParams train_toy(const std::vector<NormalizedPath>& modes, int epochs,
                         std::uint64_t seed) {
  const auto arch = toy_arch();
  DenoiserParams params = init_params(arch, seed);
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.epochs = epochs;
  cfg.seed = seed;
  cfg.opt.weight_decay = 0.0;
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  train_model(params, repeated_dataset(modes, 256 / static_cast<int>(modes.size()), arch.ctx_dim),
              sched, cfg);
  return params;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / (static_cast<double>(v.size()) - 1.0) / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("cosine schedule shape at T = 10") {
  const auto s = make_schedule(10, ScheduleKind::kCosine);
  CHECK(s.alpha_bar.front() > 0.9);
  CHECK(s.alpha_bar.back() < 0.1);
  for (int t = 1; t < 10; ++t) {
    CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);
    CHECK(s.beta[t - 1] > 0.0);
    CHECK(s.beta[t - 1] < 1.0);
  }
  // posterior variance is zero at the first step and non-negative after
  CHECK(s.posterior_var[0] == 0.0);
  for (double v : s.posterior_var) CHECK(v >= 0.0);
}

TEST_CASE("single-step schedule is noise-dominated") {
  const auto s = make_schedule(1, ScheduleKind::kCosine);
  CHECK(s.T == 1);
  CHECK(s.alpha_bar[0] < 0.05);

  NormalizedPath p0;
  for (int i = 0; i < 8; ++i) p0.waypoints.push_back({0.5, -0.25});
  Eigen::VectorXd eps(16);
  Rng rng(3);
  for (int i = 0; i < 16; ++i) eps(i) = rng.normal();
  const auto pt = q_sample(p0, 1, eps, s);
  // the noise term dominates the signal term
  const double signal = std::sqrt(s.alpha_bar[0]) * flatten(p0).norm();
  const double noise = std::sqrt(1.0 - s.alpha_bar[0]) * eps.norm();
  CHECK(noise > 5.0 * signal);
  CHECK(pt.size() == 8);
}

TEST_CASE("linear schedule betas are equally spaced") {
  const auto s = make_schedule(10, ScheduleKind::kLinear);
  CHECK(s.beta.front() == doctest::Approx(1e-4));
  CHECK(s.beta.back() == doctest::Approx(0.5));
  const double step = s.beta[1] - s.beta[0];
  for (int t = 1; t < 10; ++t) {
    CHECK(s.beta[t] - s.beta[t - 1] == doctest::Approx(step).epsilon(1e-12));
  }
}

TEST_CASE("make_schedule rejects T < 1") {
  CHECK_THROWS_AS(make_schedule(0, ScheduleKind::kCosine), std::invalid_argument);
}

TEST_CASE("q_sample without noise scales by sqrt(alpha_bar)") {
  const auto s = make_schedule(10, ScheduleKind::kCosine);
  NormalizedPath p0;
  for (int i = 0; i < 8; ++i) p0.waypoints.push_back({0.1 * i, -0.05 * i});
  const auto pt = q_sample(p0, 4, Eigen::VectorXd::Zero(16), s);
  const double k = std::sqrt(s.abar(4));
  for (int i = 0; i < 8; ++i) {
    CHECK(pt.waypoints[i].x == doctest::Approx(k * p0.waypoints[i].x).epsilon(1e-15));
    CHECK(pt.waypoints[i].y == doctest::Approx(k * p0.waypoints[i].y).epsilon(1e-15));
  }
}

TEST_CASE("q_sample approaches identity as alpha_bar approaches 1") {
  const auto s = schedule_from_betas({1e-8}, ScheduleKind::kLinear);
  NormalizedPath p0;
  for (int i = 0; i < 8; ++i) p0.waypoints.push_back({0.4, 0.2});
  Eigen::VectorXd eps(16);
  Rng rng(5);
  for (int i = 0; i < 16; ++i) eps(i) = rng.normal();
  const auto pt = q_sample(p0, 1, eps, s);
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(pt.waypoints[i].x - p0.waypoints[i].x) < 1e-3);
    CHECK(std::abs(pt.waypoints[i].y - p0.waypoints[i].y) < 1e-3);
  }
}

TEST_CASE("q_sample inverts algebraically") {
  const auto s = make_schedule(10, ScheduleKind::kCosine);
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    NormalizedPath p0;
    for (int i = 0; i < 8; ++i) p0.waypoints.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const int t = static_cast<int>(rng.uniform_int(1, 10));
    Eigen::VectorXd eps(16);
    for (int i = 0; i < 16; ++i) eps(i) = rng.normal();
    const auto pt = q_sample(p0, t, eps, s);
    const double abar = s.abar(t);
    const Eigen::VectorXd back =
        (flatten(pt) - std::sqrt(1.0 - abar) * eps) / std::sqrt(abar);
    CHECK((back - flatten(p0)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("train_step loss is zero under a perfect predictor stub") {
  const auto arch = toy_arch();
  auto params = init_params(arch, 1);
  auto state = make_adamw_state(params);
  Rng rng(2);
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const auto data = repeated_dataset({straight_mode()}, 8, arch.ctx_dim);

  const PredictorOverride perfect = [](const Eigen::MatrixXd&, const Eigen::MatrixXd& eps) {
    return eps;
  };
  const auto r = train_step(params, data, sched, rng, state, AdamWConfig{}, &perfect);
  CHECK(r.loss == 0.0);
  CHECK_FALSE(r.applied);
}

TEST_CASE("zero model loss sits near the unit-Gaussian energy") {
  const auto arch = toy_arch();
  auto params = init_params(arch, 1);
  for (auto& w : params.weights) w.setZero();
  for (auto& b : params.biases) b.setZero();
  auto state = make_adamw_state(params);
  Rng rng(3);
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const auto data = repeated_dataset({straight_mode()}, 1024, arch.ctx_dim);

  AdamWConfig opt;
  opt.lr = 0.0;  // loss measurement only
  const auto r = train_step(params, data, sched, rng, state, opt);
  // E||eps||^2 per coordinate is 1
  CHECK(r.loss == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("training converges on a single-mode dataset") {
  const auto arch = toy_arch();
  DenoiserParams params = init_params(arch, 7);
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.epochs = 250;  // 8 batches/epoch -> 2000 steps
  cfg.seed = 7;
  cfg.opt.weight_decay = 0.0;
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const auto report =
      train_model(params, repeated_dataset({straight_mode()}, 256, arch.ctx_dim), sched, cfg);
  CHECK(report.epoch_losses.back() < 0.05);

  // samples should sit tightly on the mode
  const NormSpec norm{5.0};
  const auto paths = sample_unguided(params, fixed_ctx(arch.ctx_dim), sched, 99, 20, norm);
  const Path mode = denormalize(straight_mode(), norm);
  for (const auto& p : paths) {
    double sq = 0.0;
    for (int i = 0; i < 8; ++i) sq += (p.waypoints[i] - mode.waypoints[i]).norm_sq();
    CHECK(std::sqrt(sq / 8.0) < 0.2);  // meters
  }
}

TEST_CASE("sampling is seed-deterministic and in-bounds") {
  const auto arch = toy_arch();
  const auto params = init_params(arch, 21);
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const NormSpec norm{5.0};
  const auto a = sample_unguided(params, fixed_ctx(arch.ctx_dim), sched, 1234, 7, norm);
  const auto b = sample_unguided(params, fixed_ctx(arch.ctx_dim), sched, 1234, 7, norm);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].size() == 8);
    for (std::size_t w = 0; w < 8; ++w) {
      CHECK(a[i].waypoints[w].x == b[i].waypoints[w].x);  // bitwise
      CHECK(a[i].waypoints[w].y == b[i].waypoints[w].y);
      CHECK(std::isfinite(a[i].waypoints[w].x));
      CHECK(std::abs(a[i].waypoints[w].x) <= norm.r_max);
      CHECK(std::abs(a[i].waypoints[w].y) <= norm.r_max);
    }
  }
}

TEST_CASE("candidate streams do not depend on the batch size") {
  const auto arch = toy_arch();
  const auto params = init_params(arch, 22);
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const NormSpec norm{5.0};
  const auto batch = sample_unguided(params, fixed_ctx(arch.ctx_dim), sched, 500, 5, norm);
  // candidate i alone, seeded at base + i, must reproduce the batched result
  for (int i = 0; i < 5; ++i) {
    const auto solo = sample_unguided(params, fixed_ctx(arch.ctx_dim), sched,
                                      500 + static_cast<std::uint64_t>(i), 1, norm);
    for (std::size_t w = 0; w < 8; ++w) {
      CHECK(solo[0].waypoints[w].x == batch[i].waypoints[w].x);
      CHECK(solo[0].waypoints[w].y == batch[i].waypoints[w].y);
    }
  }
}

namespace {

CostMap empty_map() {
  CostMap map;
  map.width = 120;
  map.height = 120;
  map.resolution = 0.1;
  map.origin = {-6, -6};
  map.values.assign(120 * 120, 0.0);
  return map;
}

GuidanceConfig default_guidance(int T, double scale) {
  GuidanceConfig g;
  g.scale = constant_scale(T, scale);
  g.cost_cfg.impact = linear_impact(8);
  return g;
}

}  // namespace

TEST_CASE("guidance at scale zero is bit-identical to unguided sampling") {
  const auto arch = toy_arch();
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const NormSpec norm{5.0};
  const auto map = empty_map();
  Rng seeder(101);
  for (int rep = 0; rep < 10; ++rep) {
    const auto params = init_params(arch, 3000 + rep);
    const std::uint64_t seed = seeder.next_u64();
    const auto unguided = sample_unguided(params, fixed_ctx(arch.ctx_dim), sched, seed, 4, norm);
    const auto guided =
        sample_guided(params, fixed_ctx(arch.ctx_dim), sched, seed, 4, map,
                      Goal{{2.0, 1.0}}, default_guidance(10, 0.0), Pose{}, norm);
    for (std::size_t i = 0; i < unguided.size(); ++i) {
      for (std::size_t w = 0; w < 8; ++w) {
        CHECK(guided[i].waypoints[w].x == unguided[i].waypoints[w].x);
        CHECK(guided[i].waypoints[w].y == unguided[i].waypoints[w].y);
      }
    }
  }
}

TEST_CASE("goal guidance pulls terminal waypoints monotonically") {
  const auto arch = toy_arch();
  const auto params = train_toy({arc_mode(+1.0), arc_mode(-1.0)}, 150, 31);
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const NormSpec norm{5.0};
  const auto map = empty_map();
  const Goal goal{{3.2, 1.2}};

  std::vector<double> means;
  std::vector<double> ses;
  for (double scale : {0.0, 1.0, 2.0, 4.0}) {
    std::vector<double> dists;
    const auto paths =
        sample_guided(params, fixed_ctx(arch.ctx_dim), sched, 777, 200, map, goal,
                      default_guidance(10, scale), Pose{}, norm);
    for (const auto& p : paths) dists.push_back((p.waypoints.back() - goal.position).norm());
    means.push_back(mean_of(dists));
    ses.push_back(stderr_of(dists));
  }
  CHECK(means[1] < means[0]);
  CHECK(means[2] < means[1]);
  CHECK(means[3] < means[2]);
  // separation between no guidance and the strongest scale
  const double sep = std::sqrt(ses[0] * ses[0] + ses[3] * ses[3]);
  CHECK(means[0] - means[3] > 3.0 * sep);
}

TEST_CASE("goal guidance concentrates a bimodal prior on the goal mode") {
  const auto arch = toy_arch();
  const auto params = train_toy({arc_mode(+1.0), arc_mode(-1.0)}, 150, 31);
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const NormSpec norm{5.0};
  const auto map = empty_map();
  // goal placed inside the left (positive-y) mode
  const Goal goal{{3.2, 1.2}};

  const auto unguided =
      sample_unguided(params, fixed_ctx(arch.ctx_dim), sched, 4242, 100, norm);
  const auto guided =
      sample_guided(params, fixed_ctx(arch.ctx_dim), sched, 4242, 100, map, goal,
                    default_guidance(10, 1.0), Pose{}, norm);

  const auto left_share = [](const std::vector<Path>& paths) {
    int left = 0;
    for (const auto& p : paths) {
      if (p.waypoints.back().y > 0.0) ++left;
    }
    return static_cast<double>(left) / static_cast<double>(paths.size());
  };
  CHECK(left_share(unguided) > 0.2);
  CHECK(left_share(unguided) < 0.8);
  CHECK(left_share(guided) >= 0.9);
}

TEST_CASE("unguided sampling keeps both modes of a symmetric prior") {
  const auto arch = toy_arch();
  const auto params = train_toy({arc_mode(+1.0), arc_mode(-1.0)}, 150, 31);
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const auto paths = sample_unguided(params, fixed_ctx(arch.ctx_dim), sched, 555, 50,
                                     NormSpec{5.0});
  int left = 0;
  for (const auto& p : paths) {
    if (p.waypoints.back().y > 0.0) ++left;
  }
  CHECK(left >= 5);        // >= 10 percent share
  CHECK(50 - left >= 5);
}

TEST_CASE("collision guidance moves samples off obstacles") {
  const auto arch = toy_arch();
  const auto params = train_toy({straight_mode()}, 150, 77);
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const NormSpec norm{5.0};

  // disc-like obstacle straight ahead at ~2.2 m
  OccupancyGrid g;
  g.width = 120;
  g.height = 120;
  g.resolution = 0.1;
  g.origin = {-6, -6};
  g.cells.assign(120 * 120, 0);
  for (int dy = -3; dy <= 3; ++dy) {
    for (int dx = -3; dx <= 3; ++dx) {
      if (dx * dx + dy * dy <= 9) {
        g.cells[static_cast<std::size_t>(60 + dy) * 120 + (82 + dx)] = 1;
      }
    }
  }
  const auto map = gaussian_smooth(occupancy_to_cost(g, 1.0), 2.0);

  GuidanceConfig gc = default_guidance(10, 1.0);
  const auto unguided = sample_unguided(params, fixed_ctx(arch.ctx_dim), sched, 888, 100, norm);
  const auto guided = sample_guided(params, fixed_ctx(arch.ctx_dim), sched, 888, 100, map,
                                    std::nullopt, gc, Pose{}, norm);

  const auto mean_fc = [&](const std::vector<Path>& paths) {
    double acc = 0.0;
    for (const auto& p : paths) acc += collision_cost(p, map, gc.cost_cfg).value;
    return acc / static_cast<double>(paths.size());
  };
  const double fc_unguided = mean_fc(unguided);
  const double fc_guided = mean_fc(guided);
  CHECK(fc_unguided > 0.0);
  CHECK(fc_guided < 0.5 * fc_unguided);
}

TEST_CASE("train_model reports one loss per epoch and decays the rate") {
  const auto arch = toy_arch();
  DenoiserParams params = init_params(arch, 5);
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.epochs = 5;
  cfg.seed = 5;
  const auto sched = make_schedule(10, ScheduleKind::kCosine);
  const auto report =
      train_model(params, repeated_dataset({straight_mode()}, 64, arch.ctx_dim), sched, cfg);
  CHECK(report.epoch_losses.size() == 5);
  CHECK(report.epoch_lr.size() == 5);
  CHECK(report.epoch_lr.back() < report.epoch_lr.front());
}
