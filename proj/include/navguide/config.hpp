#pragma once

#include <string>

#include "navguide/costmap.hpp"
#include "navguide/diffusion.hpp"
#include "navguide/geometry.hpp"
#include "navguide/selection.hpp"
#include "navguide/sim.hpp"

namespace navguide {

// All tunables in one place; JSON files may override any subset. Unknown keys
// are rejected with their full path.
struct Config {
  struct Geometry {
    int n_w{8};
    double r_max{5.0};
  } geometry;

  CostmapConfig costmap;

  struct Costs {
    double alpha{0.03};
    double beta{0.006};
    double sigma_r{0.25};
  } costs;

  struct Denoiser {
    int ctx_bins{32};
    int ctx_dim{34};
    int temb_dim{16};
    int hidden_width{256};
    int hidden_depth{3};
  } denoiser;

  struct Diffusion {
    int steps{10};
    std::string schedule{"cosine"};
    double guidance_scale{1.0};
    double grad_clip{0.2};
    bool guide_at_clean_estimate{false};
    int batch_size{64};
    int epochs{30};
    double lr{1e-3};
    double lr_final{1e-5};
    double weight_decay{1e-4};
  } diffusion;

  struct Selection {
    double epsilon{kPi / 4.0};
    int m{4};
    double blend_alpha{0.3};
  } selection;

  struct Sim {
    double fov{2.0 * kPi / 3.0};
    int rays{96};
    double max_range{6.0};
    double v_max{0.5};
    double omega_max{0.4};
    double lookahead{0.6};
    double control_dt{0.1};
    int replan_period{3};
    int num_candidates{50};
    double time_limit{120.0};
    double goal_radius{0.5};
    double horizon_frac{0.8};
    double goal_dist_min{2.0};
    double goal_dist_max{5.0};
  } sim;

  struct Eval {
    int trials{50};
  } eval;
};

Config load_config(const std::string& path);
void validate_config(const Config& cfg);

ArchDescriptor make_arch(const Config& cfg);
CostConfig make_cost_config(const Config& cfg);
PlannerConfig make_planner_config(const Config& cfg, const PlannerModel& model);
TrialConfig make_trial_config(const Config& cfg);
TrainConfig make_train_config(const Config& cfg);
ExpertGenConfig make_expert_config(const Config& cfg);
SensorConfig make_sensor_config(const Config& cfg);

}  // namespace navguide
