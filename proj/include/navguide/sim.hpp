#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "navguide/costmap.hpp"
#include "navguide/costs.hpp"
#include "navguide/denoiser.hpp"
#include "navguide/diffusion.hpp"
#include "navguide/eval.hpp"
#include "navguide/geometry.hpp"
#include "navguide/rng.hpp"
#include "navguide/selection.hpp"

namespace navguide {

struct Disc {
  Vec2 center;
  double radius{0.0};
};

struct Rect {
  Vec2 min;
  Vec2 max;

  bool contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  Vec2 center() const { return {(min.x + max.x) * 0.5, (min.y + max.y) * 0.5}; }
};

enum class WorldKind { kIndoor, kOutdoor };

struct World {
  Rect bounds;
  std::vector<Disc> discs;
  std::vector<Rect> rects;
  Rect spawn;        // obstacle-free start region
  Rect goal_region;  // obstacle-free goal region
  WorldKind kind{WorldKind::kOutdoor};
  std::uint64_t seed{0};
};

struct WorldGenConfig {
  double goal_dist_min{2.5};
  double goal_dist_max{4.5};
  double robot_radius{0.25};  // clearance radius used for reachability checks
};

struct GenerationFailedError : std::runtime_error {
  explicit GenerationFailedError(std::uint64_t seed)
      : std::runtime_error("world generation failed after 100 attempts, seed " +
                           std::to_string(seed)) {}
};

World gen_world(WorldKind kind, std::uint64_t seed, const WorldGenConfig& cfg = {});

// Drops `count` discs into the corridor between the spawn and goal regions,
// keeping both regions clear and the goal reachable.
void add_random_obstacles(World& world, int count, Rng& rng, double robot_radius);

// Signed clearance: distance from p to the nearest obstacle surface or bounds
// wall (negative inside an obstacle or outside the bounds).
double clearance(const World& world, const Vec2& p);

// Minimum clearance along a polyline, sampled every `step` meters.
double polyline_clearance(const World& world, const std::vector<Vec2>& pts, double step);

struct SensorConfig {
  double fov{2.0 * kPi / 3.0};
  int rays{96};
  double max_range{6.0};
};

// Exact analytic raycast against discs, rectangles, and the world bounds.
DepthScan raycast_depth(const World& world, const Pose& pose, const SensorConfig& sensor);

struct RobotState {
  Pose pose;
  double v{0.0};
  double omega{0.0};
};

struct FollowConfig {
  double lookahead{0.6};
  double v_max{0.5};
  double omega_max{0.4};
};

// One pure-pursuit control step on a robot-frame path, exact-arc unicycle
// integration. Degenerate paths command zero motion.
RobotState follow_step(const RobotState& state, const Path& path_robot, double dt,
                       const FollowConfig& cfg);

enum class Suite { kBasic, kObstacle, kLong };

std::string suite_name(Suite s);

struct TrialConfig {
  Suite suite{Suite::kBasic};
  double time_limit{120.0};
  double goal_radius{0.5};
  double control_dt{0.1};
  int replan_period{3};
  int num_candidates{50};
  bool guided{true};
  std::uint64_t seed{0};
};

// Everything the planning loop needs besides the model itself.
struct PlannerConfig {
  CostmapConfig costmap;
  CostConfig cost;          // impact sized to the model's n_w
  GuidanceConfig guidance;  // scale sized to the schedule's T
  SelectionConfig selection;
  SensorConfig sensor;
  FollowConfig follow;
  int ctx_bins{32};
};

struct PlannerModel {
  DenoiserParams params;
  NoiseSchedule sched;
  NormSpec norm;
};

// Builds the default planner configuration for a model (impact ramp and
// constant unit guidance scale sized to fit).
PlannerConfig default_planner_config(const PlannerModel& model);

// Contact handling integrates each control step in this many substeps.
inline constexpr int kTrialSubsteps = 5;

// Closed-loop trial: sense, replan every replan_period steps, track, count
// collision onsets, stop on goal/timeout/stuck. Deterministic given cfg.seed.
// `trace` (optional) receives the initial pose and then one pose per
// integration substep.
TrialResult run_trial(const World& world, const PlannerModel& model, const TrialConfig& cfg,
                      const PlannerConfig& pcfg, std::vector<Pose>* trace = nullptr);

// World used by a trial cell: outdoor base; the obstacle suite adds 2-5 discs
// near the start-goal corridor, the long suite stretches the goal distance.
World make_trial_world(Suite suite, std::uint64_t seed, double robot_radius);

struct ExpertSample {
  ContextVector ctx;
  NormalizedPath npath;
  std::uint64_t world_id{0};
  Pose pose;
  Vec2 goal;
};

struct ExpertGenConfig {
  WorldKind kind{WorldKind::kOutdoor};
  int n_w{8};
  double r_max{5.0};
  double horizon_frac{0.8};  // expert paths truncated at horizon_frac * r_max
  double sigma_r{0.25};
  double goal_dist_min{2.0};
  double goal_dist_max{5.0};
  SensorConfig sensor;
  int ctx_bins{32};
  int ctx_dim{34};
};

struct ExpertDataset {
  std::vector<ExpertSample> samples;
  std::size_t rejected{0};  // attempts discarded by the clearance verifier
};

// Synthetic training data: grid-searched shortest paths, shortcut-smoothed,
// resampled to n_w waypoints, paired with the pose's depth context.
ExpertDataset gen_expert_dataset(int worlds, int samples_per_world, std::uint64_t seed,
                                 const ExpertGenConfig& cfg);

// One expert polyline (world frame, n_w points, horizon-capped) between fixed
// endpoints. nullopt when the goal is unreachable or the smoothed path fails
// the clearance verifier.
std::optional<std::vector<Vec2>> expert_path_points(const World& world, const Vec2& start,
                                                    const Vec2& goal,
                                                    const ExpertGenConfig& cfg,
                                                    std::uint64_t seed);

}  // namespace navguide
