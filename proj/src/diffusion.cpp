#include "navguide/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace navguide {

namespace {

double cosine_abar(double t, double T) {
  constexpr double s = 0.008;
  const double f = std::cos((t / T + s) / (1.0 + s) * kPi * 0.5);
  return f * f;
}

}  // namespace

NoiseSchedule schedule_from_betas(std::vector<double> betas, ScheduleKind kind) {
  if (betas.empty()) throw std::invalid_argument("schedule_from_betas: empty");
  const int T = static_cast<int>(betas.size());
  NoiseSchedule s;
  s.T = T;
  s.kind = kind;
  s.beta = std::move(betas);
  s.alpha.resize(T);
  s.alpha_bar.resize(T);
  s.posterior_var.resize(T);
  s.mean_scale.resize(T);
  s.eps_scale.resize(T);
  s.noise_std.resize(T);
  double abar = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double beta = s.beta[t - 1];
    if (!(beta > 0.0 && beta < 1.0)) {
      throw std::invalid_argument("schedule_from_betas: beta out of (0, 1)");
    }
    const double abar_prev = abar;
    s.alpha[t - 1] = 1.0 - beta;
    abar *= s.alpha[t - 1];
    s.alpha_bar[t - 1] = abar;
    s.posterior_var[t - 1] = beta * (1.0 - abar_prev) / (1.0 - abar);
    s.mean_scale[t - 1] = 1.0 / std::sqrt(s.alpha[t - 1]);
    s.eps_scale[t - 1] = beta / std::sqrt(1.0 - abar);
    s.noise_std[t - 1] = std::sqrt(s.posterior_var[t - 1]);
  }
  return s;
}

NoiseSchedule make_schedule(int T, ScheduleKind kind, double linear_beta_start,
                            double linear_beta_end) {
  if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
  std::vector<double> betas(static_cast<std::size_t>(T));

  if (kind == ScheduleKind::kCosine) {
    const double f0 = cosine_abar(0.0, T);
    double abar_prev = 1.0;
    for (int t = 1; t <= T; ++t) {
      const double abar_t = cosine_abar(static_cast<double>(t), T) / f0;
      betas[t - 1] = std::clamp(1.0 - abar_t / abar_prev, 1e-4, 0.999);
      abar_prev = abar_t;
    }
  } else {
    for (int t = 1; t <= T; ++t) {
      const double frac = (T > 1) ? static_cast<double>(t - 1) / (T - 1) : 0.0;
      betas[t - 1] = linear_beta_start + frac * (linear_beta_end - linear_beta_start);
    }
  }
  return schedule_from_betas(std::move(betas), kind);
}

std::vector<double> constant_scale(int T, double s) {
  return std::vector<double>(static_cast<std::size_t>(T), s);
}

Eigen::VectorXd flatten(const NormalizedPath& p) {
  Eigen::VectorXd v(2 * static_cast<int>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    v(2 * i) = p.waypoints[i].x;
    v(2 * i + 1) = p.waypoints[i].y;
  }
  return v;
}

NormalizedPath unflatten(const Eigen::VectorXd& v) {
  NormalizedPath p;
  p.waypoints.resize(static_cast<std::size_t>(v.size() / 2));
  for (std::size_t i = 0; i < p.waypoints.size(); ++i) {
    p.waypoints[i] = {v(2 * i), v(2 * i + 1)};
  }
  return p;
}

NormalizedPath q_sample(const NormalizedPath& p0, int t, const Eigen::VectorXd& eps,
                        const NoiseSchedule& sched) {
  if (t < 1 || t > sched.T) throw std::invalid_argument("q_sample: t out of range");
  if (eps.size() != 2 * static_cast<int>(p0.size())) {
    throw std::invalid_argument("q_sample: eps shape mismatch");
  }
  const double abar = sched.abar(t);
  const Eigen::VectorXd v =
      std::sqrt(abar) * flatten(p0) + std::sqrt(1.0 - abar) * eps;
  return unflatten(v);
}

TrainStepResult train_step(DenoiserParams& params, std::span<const TrainBatchItem> batch,
                           const NoiseSchedule& sched, Rng& rng, AdamWState& opt_state,
                           const AdamWConfig& opt_cfg, const PredictorOverride* predictor) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const auto& arch = params.arch;
  const int B = static_cast<int>(batch.size());
  const int D = arch.output_dim();

  Eigen::MatrixXd input(B, arch.input_dim());
  Eigen::MatrixXd eps(B, D);
  for (int i = 0; i < B; ++i) {
    const int t = static_cast<int>(rng.uniform_int(1, sched.T));
    for (int j = 0; j < D; ++j) eps(i, j) = rng.normal();
    const double abar = sched.abar(t);
    const Eigen::VectorXd noisy = std::sqrt(abar) * flatten(batch[i].npath) +
                                  std::sqrt(1.0 - abar) * eps.row(i).transpose();
    input.row(i) = assemble_input(arch, unflatten(noisy), t, sched.T, batch[i].ctx).transpose();
  }

  const double denom = static_cast<double>(B) * D;
  TrainStepResult result;

  if (predictor != nullptr) {
    result.loss = ((*predictor)(input, eps) - eps).squaredNorm() / denom;
    return result;
  }

  ForwardCache cache;
  const Eigen::MatrixXd pred = forward_batch(params, input, &cache);
  const Eigen::MatrixXd resid = pred - eps;
  result.loss = resid.squaredNorm() / denom;
  if (!std::isfinite(result.loss)) return result;

  DenoiserGrads grads;
  backward_batch(params, cache, Eigen::MatrixXd(2.0 * resid / denom), grads);
  result.applied = adamw_step(params, grads, opt_state, opt_cfg);
  return result;
}

TrainRunReport train_model(DenoiserParams& params, std::vector<TrainBatchItem> data,
                           const NoiseSchedule& sched, const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("train_model: empty dataset");
  if (cfg.batch_size < 1 || cfg.epochs < 1) {
    throw std::invalid_argument("train_model: batch_size and epochs must be >= 1");
  }
  TrainRunReport report;
  Rng rng(mix_seed(cfg.seed, 0x7e41ULL));
  AdamWState opt_state = make_adamw_state(params);
  AdamWConfig opt = cfg.opt;

  const std::size_t batches_per_epoch =
      (data.size() + cfg.batch_size - 1) / static_cast<std::size_t>(cfg.batch_size);
  const std::size_t total_steps = batches_per_epoch * static_cast<std::size_t>(cfg.epochs);
  std::size_t step = 0;

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<TrainBatchItem> batch;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the run's own stream
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    double lr_last = opt.lr;
    for (std::size_t pos = 0; pos < data.size(); pos += cfg.batch_size) {
      const std::size_t end = std::min(pos + cfg.batch_size, data.size());
      batch.clear();
      for (std::size_t i = pos; i < end; ++i) batch.push_back(data[order[i]]);

      const double frac =
          total_steps > 1 ? static_cast<double>(step) / (total_steps - 1) : 0.0;
      AdamWConfig step_opt = opt;
      step_opt.lr = cfg.lr_final +
                    0.5 * (opt.lr - cfg.lr_final) * (1.0 + std::cos(kPi * frac));
      lr_last = step_opt.lr;

      const TrainStepResult r = train_step(params, batch, sched, rng, opt_state, step_opt);
      loss_sum += r.loss;
      ++n_batches;
      ++step;
    }
    report.epoch_losses.push_back(loss_sum / static_cast<double>(n_batches));
    report.epoch_lr.push_back(lr_last);
  }

  quantize_params_f32(params);
  return report;
}

namespace {

struct GuidanceContext {
  const CostMap* map{nullptr};
  const std::optional<Goal>* goal{nullptr};
  const GuidanceConfig* cfg{nullptr};
  Pose pose;
};

// Subtracts s_t * clip(r_max * R^T grad F) from the posterior mean row.
void apply_guidance(Eigen::Ref<Eigen::RowVectorXd> mean_row,
                    const Eigen::RowVectorXd& eval_row, double s_t,
                    const GuidanceContext& g, const NormSpec& norm) {
  const Path metric = denormalize(unflatten(eval_row.transpose()), norm);
  const Path world = robot_to_world(metric, g.pose);
  const CostEval eval = total_cost(world, *g.map, *g.goal, g.cfg->cost_cfg);

  const double c = std::cos(g.pose.heading);
  const double s = std::sin(g.pose.heading);
  const double cap = g.cfg->grad_clip / norm.r_max;
  for (std::size_t w = 0; w < eval.grad.size(); ++w) {
    const Vec2 gw = eval.grad[w];
    // rotate the world-frame gradient back into the robot frame, then chain
    // through denormalization
    Vec2 gn{(c * gw.x + s * gw.y) * norm.r_max, (-s * gw.x + c * gw.y) * norm.r_max};
    const double mag = gn.norm();
    if (mag > cap) gn = gn * (cap / mag);
    mean_row(2 * w) -= s_t * gn.x;
    mean_row(2 * w + 1) -= s_t * gn.y;
  }
}

std::vector<Path> sample_core(const DenoiserParams& params, const ContextVector& ctx,
                              const NoiseSchedule& sched, std::uint64_t seed, int count,
                              const GuidanceContext* guidance, const NormSpec& norm,
                              bool allow_retry) {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  const auto& arch = params.arch;
  const int D = arch.output_dim();

  std::vector<Rng> streams;
  streams.reserve(count);
  for (int i = 0; i < count; ++i) streams.emplace_back(seed + static_cast<std::uint64_t>(i));

  Eigen::MatrixXd x(count, D);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < D; ++j) x(i, j) = streams[i].normal();
  }

  Eigen::RowVectorXd ctx_row(arch.ctx_dim);
  for (int i = 0; i < arch.ctx_dim; ++i) ctx_row(i) = ctx.features[i];

  Eigen::MatrixXd input(count, arch.input_dim());
  std::vector<bool> needs_retry(count, false);  // guidance hit a degenerate path

  for (int t = sched.T; t >= 1; --t) {
    const Eigen::RowVectorXd temb = time_embedding(t, sched.T, arch.temb_dim).transpose();
    input.leftCols(D) = x;
    input.middleCols(D, arch.temb_dim) = temb.replicate(count, 1);
    input.rightCols(arch.ctx_dim) = ctx_row.replicate(count, 1);

    const Eigen::MatrixXd eps_hat = forward_batch(params, input);
    Eigen::MatrixXd mean =
        (x - sched.eps_scale[t - 1] * eps_hat) * sched.mean_scale[t - 1];

    if (guidance != nullptr) {
      const double s_t = guidance->cfg->scale[t - 1];
      if (s_t != 0.0) {
        for (int i = 0; i < count; ++i) {
          Eigen::RowVectorXd eval_point = x.row(i);
          if (guidance->cfg->guide_at_clean_estimate) {
            const double abar = sched.abar(t);
            eval_point =
                (x.row(i) - std::sqrt(1.0 - abar) * eps_hat.row(i)) / std::sqrt(abar);
          }
          try {
            apply_guidance(mean.row(i), eval_point, s_t, *guidance, norm);
          } catch (const DegeneratePathError&) {
            needs_retry[i] = true;
          }
        }
      }
    }

    if (t > 1) {
      const double std_t = sched.noise_std[t - 1];
      for (int i = 0; i < count; ++i) {
        for (int j = 0; j < D; ++j) x(i, j) = mean(i, j) + std_t * streams[i].normal();
      }
    } else {
      x = mean;
    }
    if (!x.allFinite()) throw DivergedSampleError{};
  }

  std::vector<Path> paths;
  paths.reserve(count);
  for (int i = 0; i < count; ++i) {
    paths.push_back(denormalize(unflatten(x.row(i).transpose()), norm));
  }

  for (int i = 0; i < count; ++i) {
    if (!needs_retry[i]) continue;
    if (!allow_retry) throw DegeneratePathError{};
    const std::uint64_t retry_seed = mix_seed(seed, 0xD0D0ULL + static_cast<std::uint64_t>(i));
    paths[i] = sample_core(params, ctx, sched, retry_seed, 1, guidance, norm, false)[0];
  }
  return paths;
}

}  // namespace

std::vector<Path> sample_unguided(const DenoiserParams& params, const ContextVector& ctx,
                                  const NoiseSchedule& sched, std::uint64_t seed, int count,
                                  const NormSpec& norm) {
  return sample_core(params, ctx, sched, seed, count, nullptr, norm, true);
}

std::vector<Path> sample_guided(const DenoiserParams& params, const ContextVector& ctx,
                                const NoiseSchedule& sched, std::uint64_t seed, int count,
                                const CostMap& map, const std::optional<Goal>& goal,
                                const GuidanceConfig& gcfg, const Pose& pose,
                                const NormSpec& norm) {
  if (gcfg.scale.size() != static_cast<std::size_t>(sched.T)) {
    throw std::invalid_argument("sample_guided: scale length != T");
  }
  GuidanceContext g;
  g.map = &map;
  g.goal = &goal;
  g.cfg = &gcfg;
  g.pose = pose;
  return sample_core(params, ctx, sched, seed, count, &g, norm, true);
}

}  // namespace navguide
