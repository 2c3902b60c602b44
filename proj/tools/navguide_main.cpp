// navguide: cost-guided diffusion local path planning in a 2D simulator.
//
// verbs: gen-data, train, sample, eval

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "navguide/ablation.hpp"
#include "navguide/checkpoint.hpp"
#include "navguide/config.hpp"
#include "navguide/io.hpp"
#include "navguide/log.hpp"
#include "navguide/sim.hpp"
#include "navguide/svg.hpp"

namespace {

using namespace navguide;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Config load_config_or_default(const std::string& path) {
  if (path.empty()) return Config{};
  return load_config(path);
}

int cmd_gen_data(const std::string& config_path, int worlds, int samples,
                 const std::string& kind, std::uint64_t seed, const std::string& out) {
  const Config cfg = load_config_or_default(config_path);
  ExpertGenConfig ec = make_expert_config(cfg);
  ec.kind = kind == "indoor" ? WorldKind::kIndoor : WorldKind::kOutdoor;

  const ExpertDataset dataset = gen_expert_dataset(worlds, samples, seed, ec);
  save_dataset(dataset, out);

  const double attempts = static_cast<double>(dataset.samples.size() + dataset.rejected);
  const double rejection_rate =
      attempts > 0.0 ? static_cast<double>(dataset.rejected) / attempts : 0.0;
  std::cout << "samples=" << dataset.samples.size() << " rejected=" << dataset.rejected
            << " rejection_rate=" << fmt("%.4f", rejection_rate) << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              std::uint64_t seed, const std::string& out) {
  const Config cfg = load_config_or_default(config_path);
  const ArchDescriptor arch = make_arch(cfg);
  const auto data = load_dataset(data_path, arch.n_w, arch.ctx_dim);
  log_info("loaded " + std::to_string(data.size()) + " samples from " + data_path);

  TrainConfig tc = make_train_config(cfg);
  tc.seed = seed;
  const NoiseSchedule sched = make_schedule(cfg.diffusion.steps, tc.schedule_kind);

  DenoiserParams params = init_params(arch, seed);
  const TrainRunReport report = train_model(params, data, sched, tc);

  Checkpoint ckpt;
  ckpt.arch = arch;
  ckpt.norm.r_max = cfg.geometry.r_max;
  ckpt.sched = sched;
  ckpt.params = std::move(params);
  save_checkpoint(ckpt, out);
  write_text_file(out + ".loss.csv", loss_log_csv(report));

  std::cout << "final_loss=" << fmt("%.6f", report.epoch_losses.back()) << " epochs="
            << report.epoch_losses.size() << " ckpt=" << out << "\n";
  return 0;
}

int cmd_sample(const std::string& config_path, const std::string& model_path,
               const std::string& world_path, const std::string& pose_str,
               const std::string& goal_str, int num, double scale,
               const std::string& svg_path, const std::string& out) {
  const Config cfg = load_config_or_default(config_path);
  const Checkpoint ckpt = load_checkpoint(model_path);
  const World world = load_world(world_path);

  Pose pose;
  if (std::sscanf(pose_str.c_str(), "%lf,%lf,%lf", &pose.x, &pose.y, &pose.heading) != 3) {
    throw std::runtime_error("--pose expects X,Y,THETA");
  }
  pose.heading = wrap_angle(pose.heading);
  if (!world.bounds.contains(pose.position())) {
    throw std::runtime_error("pose lies outside the world bounds");
  }
  std::optional<Goal> goal;
  if (!goal_str.empty()) {
    Vec2 g;
    if (std::sscanf(goal_str.c_str(), "%lf,%lf", &g.x, &g.y) != 2) {
      throw std::runtime_error("--goal expects X,Y");
    }
    goal = Goal{g};
  }

  PlannerModel model{ckpt.params, ckpt.sched, ckpt.norm};
  PlannerConfig pc = make_planner_config(cfg, model);
  GuidanceConfig gc = pc.guidance;
  gc.scale = constant_scale(model.sched.T, scale);

  const DepthScan scan = raycast_depth(world, pose, pc.sensor);
  const ContextVector ctx = context_from_scan(scan, pc.ctx_bins, model.params.arch.ctx_dim);
  const CostMap map = build_costmap(scan, pose, pc.costmap);

  const std::uint64_t seed = world.seed;
  const auto unguided = sample_unguided(model.params, ctx, model.sched, seed, num, model.norm);
  const auto guided = sample_guided(model.params, ctx, model.sched, seed, num, map, goal, gc,
                                    pose, model.norm);

  nlohmann::json j;
  const auto paths_to_json = [&](const std::vector<Path>& paths) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : paths) {
      nlohmann::json flat = nlohmann::json::array();
      const Path in_world = robot_to_world(p, pose);
      for (const auto& wp : in_world.waypoints) {
        flat.push_back(wp.x);
        flat.push_back(wp.y);
      }
      arr.push_back(std::move(flat));
    }
    return arr;
  };
  j["pose"] = {pose.x, pose.y, pose.heading};
  if (goal) j["goal"] = {goal->position.x, goal->position.y};
  j["scale"] = scale;
  j["unguided"] = paths_to_json(unguided);
  j["guided"] = paths_to_json(guided);
  const std::string payload = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << payload;
  } else {
    write_text_file(out, payload);
  }

  if (!svg_path.empty()) {
    std::vector<Path> unguided_world, guided_world;
    for (const auto& p : unguided) unguided_world.push_back(robot_to_world(p, pose));
    for (const auto& p : guided) guided_world.push_back(robot_to_world(p, pose));
    const std::optional<Vec2> goal_pos =
        goal ? std::optional<Vec2>(goal->position) : std::nullopt;
    write_text_file(svg_path,
                    render_scene_svg(world, map, unguided_world, guided_world, pose, goal_pos));
  }
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& model_path,
             const std::string& suite_str, int trials, std::optional<bool> arm,
             std::uint64_t seed, int jobs, const std::string& out) {
  const Config cfg = load_config_or_default(config_path);
  const Checkpoint ckpt = load_checkpoint(model_path);
  PlannerModel model{ckpt.params, ckpt.sched, ckpt.norm};
  const PlannerConfig pc = make_planner_config(cfg, model);
  TrialConfig tc = make_trial_config(cfg);

  Suite suite = Suite::kBasic;
  if (suite_str == "obstacle") suite = Suite::kObstacle;
  else if (suite_str == "long") suite = Suite::kLong;
  else if (suite_str != "basic") throw std::runtime_error("--suite must be basic|obstacle|long");

  const int n = trials > 0 ? trials : cfg.eval.trials;
  const AblationTable table = run_ablation(model, {suite}, n, seed, pc, tc, jobs, arm);

  const std::string csv = summary_csv(table);
  if (!out.empty()) {
    write_text_file(out, results_json(table));
    write_text_file(out + ".summary.csv", csv);
  }
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cost-guided diffusion local path planner"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file")->capture_default_str();

  auto* gen = app.add_subcommand("gen-data", "generate an expert-path training dataset");
  int gen_worlds = 50;
  int gen_samples = 400;
  std::string gen_kind = "outdoor";
  std::uint64_t gen_seed = 1;
  std::string gen_out = "dataset.ndjson";
  gen->add_option("--worlds", gen_worlds, "number of worlds");
  gen->add_option("--samples", gen_samples, "samples per world");
  gen->add_option("--kind", gen_kind, "indoor|outdoor")
      ->check(CLI::IsMember({"indoor", "outdoor"}));
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--out", gen_out, "output NDJSON path")->required();

  auto* train = app.add_subcommand("train", "train the denoiser on a dataset");
  std::string train_data;
  std::uint64_t train_seed = 1;
  std::string train_out = "model.ndif";
  train->add_option("--data", train_data, "dataset NDJSON")->required();
  train->add_option("--seed", train_seed, "training seed");
  train->add_option("--out", train_out, "checkpoint output path")->required();

  auto* sample = app.add_subcommand("sample", "sample guided and unguided paths");
  std::string sample_model, sample_world, sample_pose = "0,0,0", sample_goal;
  int sample_num = 50;
  double sample_scale = 1.0;
  std::string sample_svg, sample_out;
  sample->add_option("--model", sample_model, "checkpoint")->required();
  sample->add_option("--world", sample_world, "world JSON")->required();
  sample->add_option("--pose", sample_pose, "robot pose X,Y,THETA");
  sample->add_option("--goal", sample_goal, "goal X,Y (world frame)");
  sample->add_option("--num", sample_num, "paths per set");
  sample->add_option("--scale", sample_scale, "guidance scale");
  sample->add_option("--svg", sample_svg, "SVG output path");
  sample->add_option("--out", sample_out, "JSON output path (default stdout)");

  auto* eval = app.add_subcommand("eval", "run closed-loop trials and report metrics");
  std::string eval_model, eval_suite = "basic", eval_out;
  int eval_trials = 0;
  std::uint64_t eval_seed = 1;
  int eval_jobs = 1;
  bool eval_guided = false, eval_no_guided = false;
  eval->add_option("--model", eval_model, "checkpoint")->required();
  eval->add_option("--suite", eval_suite, "basic|obstacle|long")
      ->check(CLI::IsMember({"basic", "obstacle", "long"}));
  eval->add_option("--trials", eval_trials, "trials per arm (default from config)");
  eval->add_flag("--guided", eval_guided, "guided arm only");
  eval->add_flag("--no-guided", eval_no_guided, "unguided arm only");
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_option("--jobs", eval_jobs, "concurrent trials");
  eval->add_option("--out", eval_out, "results JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_gen_data(config_path, gen_worlds, gen_samples, gen_kind, gen_seed, gen_out);
    }
    if (train->parsed()) {
      return cmd_train(config_path, train_data, train_seed, train_out);
    }
    if (sample->parsed()) {
      return cmd_sample(config_path, sample_model, sample_world, sample_pose, sample_goal,
                        sample_num, sample_scale, sample_svg, sample_out);
    }
    if (eval->parsed()) {
      std::optional<bool> arm;
      if (eval_guided && !eval_no_guided) arm = true;
      if (eval_no_guided && !eval_guided) arm = false;
      return cmd_eval(config_path, eval_model, eval_suite, eval_trials, arm, eval_seed,
                      eval_jobs, eval_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
