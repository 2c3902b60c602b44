#include "navguide/config.hpp"

#include <exception>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace navguide {

namespace {

using nlohmann::json;

struct Section {
  const json& obj;
  std::string path;
  std::set<std::string> seen;
  int exceptions_at_entry{std::uncaught_exceptions()};

  Section(const json& o, std::string p) : obj(o), path(std::move(p)) {
    if (!obj.is_object()) {
      throw std::runtime_error("config: " + path + " must be an object");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen.insert(key);
    if (const auto it = obj.find(key); it != obj.end()) {
      try {
        out = it->get<T>();
      } catch (const json::exception&) {
        throw std::runtime_error("config: bad value type at " + path + "." + key);
      }
    }
  }

  json sub(const char* key) {
    seen.insert(key);
    if (const auto it = obj.find(key); it != obj.end()) return *it;
    return json::object();
  }

  // unknown-key rejection happens on scope exit; stays silent if an error is
  // already propagating
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > exceptions_at_entry) return;
    for (const auto& [key, value] : obj.items()) {
      if (!seen.count(key)) {
        throw std::runtime_error("config: unknown key " + path + "." + key);
      }
    }
  }
};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error("config: invalid value: " + what);
}

}  // namespace

Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  json root;
  try {
    root = json::parse(is);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: parse error in " + path + ": " + e.what());
  }

  Config cfg;
  {
    Section top(root, "$");
    {
      Section s(top.sub("geometry"), "geometry");
      s.get("n_w", cfg.geometry.n_w);
      s.get("r_max", cfg.geometry.r_max);
    }
    {
      Section s(top.sub("costmap"), "costmap");
      s.get("resolution", cfg.costmap.resolution);
      s.get("extent", cfg.costmap.extent);
      s.get("d_trunc", cfg.costmap.d_trunc);
      s.get("sigma_g", cfg.costmap.sigma_g);
    }
    {
      Section s(top.sub("costs"), "costs");
      s.get("alpha", cfg.costs.alpha);
      s.get("beta", cfg.costs.beta);
      s.get("sigma_r", cfg.costs.sigma_r);
    }
    {
      Section s(top.sub("denoiser"), "denoiser");
      s.get("ctx_bins", cfg.denoiser.ctx_bins);
      s.get("ctx_dim", cfg.denoiser.ctx_dim);
      s.get("temb_dim", cfg.denoiser.temb_dim);
      s.get("hidden_width", cfg.denoiser.hidden_width);
      s.get("hidden_depth", cfg.denoiser.hidden_depth);
    }
    {
      Section s(top.sub("diffusion"), "diffusion");
      s.get("steps", cfg.diffusion.steps);
      s.get("schedule", cfg.diffusion.schedule);
      s.get("guidance_scale", cfg.diffusion.guidance_scale);
      s.get("grad_clip", cfg.diffusion.grad_clip);
      s.get("guide_at_clean_estimate", cfg.diffusion.guide_at_clean_estimate);
      s.get("batch_size", cfg.diffusion.batch_size);
      s.get("epochs", cfg.diffusion.epochs);
      s.get("lr", cfg.diffusion.lr);
      s.get("lr_final", cfg.diffusion.lr_final);
      s.get("weight_decay", cfg.diffusion.weight_decay);
    }
    {
      Section s(top.sub("selection"), "selection");
      s.get("epsilon", cfg.selection.epsilon);
      s.get("m", cfg.selection.m);
      s.get("blend_alpha", cfg.selection.blend_alpha);
    }
    {
      Section s(top.sub("sim"), "sim");
      s.get("fov", cfg.sim.fov);
      s.get("rays", cfg.sim.rays);
      s.get("max_range", cfg.sim.max_range);
      s.get("v_max", cfg.sim.v_max);
      s.get("omega_max", cfg.sim.omega_max);
      s.get("lookahead", cfg.sim.lookahead);
      s.get("control_dt", cfg.sim.control_dt);
      s.get("replan_period", cfg.sim.replan_period);
      s.get("num_candidates", cfg.sim.num_candidates);
      s.get("time_limit", cfg.sim.time_limit);
      s.get("goal_radius", cfg.sim.goal_radius);
      s.get("horizon_frac", cfg.sim.horizon_frac);
      s.get("goal_dist_min", cfg.sim.goal_dist_min);
      s.get("goal_dist_max", cfg.sim.goal_dist_max);
    }
    {
      Section s(top.sub("eval"), "eval");
      s.get("trials", cfg.eval.trials);
    }
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const Config& cfg) {
  require(cfg.geometry.n_w >= 2, "geometry.n_w >= 2");
  require(cfg.geometry.r_max > 0.0, "geometry.r_max > 0");
  require(cfg.costmap.resolution > 0.0, "costmap.resolution > 0");
  require(cfg.costmap.extent > 0.0, "costmap.extent > 0");
  require(cfg.costmap.d_trunc > 0.0, "costmap.d_trunc > 0");
  require(cfg.costmap.sigma_g > 0.0, "costmap.sigma_g > 0");
  require(cfg.costs.alpha >= 0.0, "costs.alpha >= 0");
  require(cfg.costs.beta >= 0.0, "costs.beta >= 0");
  require(cfg.costs.sigma_r > 0.0, "costs.sigma_r > 0");
  require(cfg.denoiser.ctx_bins >= 1, "denoiser.ctx_bins >= 1");
  require(cfg.denoiser.ctx_dim >= cfg.denoiser.ctx_bins, "denoiser.ctx_dim >= ctx_bins");
  require(cfg.denoiser.temb_dim >= 2 && cfg.denoiser.temb_dim % 2 == 0,
          "denoiser.temb_dim even and >= 2");
  require(cfg.denoiser.hidden_width >= 1, "denoiser.hidden_width >= 1");
  require(cfg.denoiser.hidden_depth >= 1, "denoiser.hidden_depth >= 1");
  require(cfg.diffusion.steps >= 1, "diffusion.steps >= 1");
  require(cfg.diffusion.schedule == "cosine" || cfg.diffusion.schedule == "linear",
          "diffusion.schedule in {cosine, linear}");
  require(cfg.diffusion.guidance_scale >= 0.0, "diffusion.guidance_scale >= 0");
  require(cfg.diffusion.grad_clip > 0.0, "diffusion.grad_clip > 0");
  require(cfg.diffusion.batch_size >= 1, "diffusion.batch_size >= 1");
  require(cfg.diffusion.epochs >= 1, "diffusion.epochs >= 1");
  require(cfg.selection.epsilon > 0.0 && cfg.selection.epsilon <= kPi,
          "selection.epsilon in (0, pi]");
  require(cfg.selection.m >= 1 && cfg.selection.m <= cfg.geometry.n_w,
          "selection.m in [1, n_w]");
  require(cfg.selection.blend_alpha >= 0.0 && cfg.selection.blend_alpha < 1.0,
          "selection.blend_alpha in [0, 1)");
  require(cfg.sim.rays >= 2, "sim.rays >= 2");
  require(cfg.sim.fov > 0.0 && cfg.sim.fov <= 2.0 * kPi, "sim.fov in (0, 2pi]");
  require(cfg.sim.max_range > 0.0, "sim.max_range > 0");
  require(cfg.sim.control_dt > 0.0, "sim.control_dt > 0");
  require(cfg.sim.replan_period >= 1, "sim.replan_period >= 1");
  require(cfg.sim.num_candidates >= 1, "sim.num_candidates >= 1");
  require(cfg.sim.time_limit > 0.0, "sim.time_limit > 0");
  require(cfg.sim.goal_radius > 0.0, "sim.goal_radius > 0");
  require(cfg.sim.horizon_frac > 0.0 && cfg.sim.horizon_frac <= 1.0,
          "sim.horizon_frac in (0, 1]");
  require(cfg.eval.trials >= 1, "eval.trials >= 1");
}

ArchDescriptor make_arch(const Config& cfg) {
  ArchDescriptor arch;
  arch.n_w = cfg.geometry.n_w;
  arch.ctx_dim = cfg.denoiser.ctx_dim;
  arch.temb_dim = cfg.denoiser.temb_dim;
  arch.hidden_width = cfg.denoiser.hidden_width;
  arch.hidden_depth = cfg.denoiser.hidden_depth;
  return arch;
}

CostConfig make_cost_config(const Config& cfg) {
  CostConfig cc;
  cc.alpha = cfg.costs.alpha;
  cc.beta = cfg.costs.beta;
  cc.sigma_r = cfg.costs.sigma_r;
  cc.impact = linear_impact(static_cast<std::size_t>(cfg.geometry.n_w));
  return cc;
}

SensorConfig make_sensor_config(const Config& cfg) {
  SensorConfig s;
  s.fov = cfg.sim.fov;
  s.rays = cfg.sim.rays;
  s.max_range = cfg.sim.max_range;
  return s;
}

PlannerConfig make_planner_config(const Config& cfg, const PlannerModel& model) {
  PlannerConfig pc;
  pc.costmap = cfg.costmap;
  pc.cost = make_cost_config(cfg);
  pc.guidance.cost_cfg = pc.cost;
  pc.guidance.scale = constant_scale(model.sched.T, cfg.diffusion.guidance_scale);
  pc.guidance.grad_clip = cfg.diffusion.grad_clip;
  pc.guidance.guide_at_clean_estimate = cfg.diffusion.guide_at_clean_estimate;
  pc.selection.epsilon = cfg.selection.epsilon;
  pc.selection.m = static_cast<std::size_t>(cfg.selection.m);
  pc.selection.blend_alpha = cfg.selection.blend_alpha;
  pc.sensor = make_sensor_config(cfg);
  pc.follow.lookahead = cfg.sim.lookahead;
  pc.follow.v_max = cfg.sim.v_max;
  pc.follow.omega_max = cfg.sim.omega_max;
  pc.ctx_bins = cfg.denoiser.ctx_bins;
  return pc;
}

TrialConfig make_trial_config(const Config& cfg) {
  TrialConfig tc;
  tc.time_limit = cfg.sim.time_limit;
  tc.goal_radius = cfg.sim.goal_radius;
  tc.control_dt = cfg.sim.control_dt;
  tc.replan_period = cfg.sim.replan_period;
  tc.num_candidates = cfg.sim.num_candidates;
  return tc;
}

TrainConfig make_train_config(const Config& cfg) {
  TrainConfig tc;
  tc.batch_size = cfg.diffusion.batch_size;
  tc.epochs = cfg.diffusion.epochs;
  tc.opt.lr = cfg.diffusion.lr;
  tc.opt.weight_decay = cfg.diffusion.weight_decay;
  tc.lr_final = cfg.diffusion.lr_final;
  tc.schedule_kind = cfg.diffusion.schedule == "cosine" ? ScheduleKind::kCosine
                                                        : ScheduleKind::kLinear;
  return tc;
}

ExpertGenConfig make_expert_config(const Config& cfg) {
  ExpertGenConfig ec;
  ec.n_w = cfg.geometry.n_w;
  ec.r_max = cfg.geometry.r_max;
  ec.horizon_frac = cfg.sim.horizon_frac;
  ec.sigma_r = cfg.costs.sigma_r;
  ec.goal_dist_min = cfg.sim.goal_dist_min;
  ec.goal_dist_max = cfg.sim.goal_dist_max;
  ec.sensor = make_sensor_config(cfg);
  ec.ctx_bins = cfg.denoiser.ctx_bins;
  ec.ctx_dim = cfg.denoiser.ctx_dim;
  return ec;
}

}  // namespace navguide
