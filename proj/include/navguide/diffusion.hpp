#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "navguide/costs.hpp"
#include "navguide/denoiser.hpp"
#include "navguide/geometry.hpp"
#include "navguide/rng.hpp"

namespace navguide {

enum class ScheduleKind { kCosine, kLinear };

// Per-step coefficients of the denoising process, 1-based step index t.
struct NoiseSchedule {
  int T{0};
  ScheduleKind kind{ScheduleKind::kCosine};
  std::vector<double> beta;           // beta_t
  std::vector<double> alpha;          // 1 - beta_t
  std::vector<double> alpha_bar;      // prod alpha_1..t
  std::vector<double> posterior_var;  // beta_t (1 - abar_{t-1}) / (1 - abar_t)
  std::vector<double> mean_scale;     // 1 / sqrt(alpha_t)
  std::vector<double> eps_scale;      // beta_t / sqrt(1 - abar_t)
  std::vector<double> noise_std;      // sqrt(posterior_var)

  double abar(int t) const { return alpha_bar[static_cast<std::size_t>(t) - 1]; }
};

NoiseSchedule make_schedule(int T, ScheduleKind kind, double linear_beta_start = 1e-4,
                            double linear_beta_end = 0.5);

// Derives all per-step coefficients from a raw beta sequence.
NoiseSchedule schedule_from_betas(std::vector<double> betas, ScheduleKind kind);

struct GuidanceConfig {
  std::vector<double> scale;  // s_t per step (1-based index t-1)
  CostConfig cost_cfg;
  double grad_clip{0.2};  // max per-waypoint displacement at unit scale, meters
  bool guide_at_clean_estimate{false};
};

std::vector<double> constant_scale(int T, double s);

struct TrainConfig {
  int batch_size{64};
  int epochs{30};
  std::uint64_t seed{0};
  AdamWConfig opt;
  double lr_final{1e-5};
  ScheduleKind schedule_kind{ScheduleKind::kCosine};
};

struct DivergedSampleError : std::runtime_error {
  DivergedSampleError() : std::runtime_error("diverged sample: non-finite intermediate") {}
};

Eigen::VectorXd flatten(const NormalizedPath& p);
NormalizedPath unflatten(const Eigen::VectorXd& v);

// Forward noising: sqrt(abar_t) p0 + sqrt(1 - abar_t) eps.
NormalizedPath q_sample(const NormalizedPath& p0, int t, const Eigen::VectorXd& eps,
                        const NoiseSchedule& sched);

struct TrainBatchItem {
  ContextVector ctx;
  NormalizedPath npath;
};

struct TrainStepResult {
  double loss{0.0};
  bool applied{false};  // false when a non-finite loss/gradient skipped the step
};

// Test-only seam: replaces the network prediction given (input rows, true
// noise); the optimizer step is skipped when set.
using PredictorOverride =
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd& input, const Eigen::MatrixXd& eps)>;

// One noise-prediction step: draws (t, eps) per element, regresses the noise,
// applies one optimizer update.
TrainStepResult train_step(DenoiserParams& params, std::span<const TrainBatchItem> batch,
                           const NoiseSchedule& sched, Rng& rng, AdamWState& opt_state,
                           const AdamWConfig& opt_cfg,
                           const PredictorOverride* predictor = nullptr);

struct TrainRunReport {
  std::vector<double> epoch_losses;
  std::vector<double> epoch_lr;
};

// Full training run: per-epoch shuffling, cosine learning-rate decay from
// opt.lr to lr_final, one optimizer step per batch. Parameters are quantized
// through f32 at the end so checkpoints round-trip losslessly.
TrainRunReport train_model(DenoiserParams& params, std::vector<TrainBatchItem> data,
                           const NoiseSchedule& sched, const TrainConfig& cfg);

// Reverse diffusion from unit Gaussian noise; candidate i draws all its noise
// from a stream seeded with seed + i, so results do not depend on batching or
// threading. Returned paths are denormalized (robot frame, meters).
std::vector<Path> sample_unguided(const DenoiserParams& params, const ContextVector& ctx,
                                  const NoiseSchedule& sched, std::uint64_t seed, int count,
                                  const NormSpec& norm);

// Cost-guided reverse diffusion: each step subtracts s_t times the (clipped,
// normalization-chained) cost gradient from the posterior mean before noise is
// added. With scale identically 0 the output is bit-identical to
// sample_unguided under the same seed.
std::vector<Path> sample_guided(const DenoiserParams& params, const ContextVector& ctx,
                                const NoiseSchedule& sched, std::uint64_t seed, int count,
                                const CostMap& map, const std::optional<Goal>& goal,
                                const GuidanceConfig& gcfg, const Pose& pose,
                                const NormSpec& norm);

}  // namespace navguide
