#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "navguide/costmap.hpp"
#include "navguide/geometry.hpp"

namespace navguide {

struct ArchDescriptor {
  int n_w{8};
  int ctx_dim{34};
  int temb_dim{16};
  int hidden_width{256};
  int hidden_depth{3};

  int input_dim() const { return 2 * n_w + temb_dim + ctx_dim; }
  int output_dim() const { return 2 * n_w; }
  std::int64_t param_count() const;
  bool operator==(const ArchDescriptor&) const = default;
};

// Observation encoding: min-pooled depth histogram (bins normalized by
// max_range) padded with zeros up to the model's context width.
struct ContextVector {
  std::vector<double> features;
};

ContextVector context_from_scan(const DepthScan& scan, int bins, int dim);

// Noise-prediction network: input layer, (hidden_depth - 1) residual
// equal-width blocks, linear output. GELU on hidden activations.
struct DenoiserParams {
  ArchDescriptor arch;
  // weights[0]: hidden x input; weights[1..depth-1]: hidden x hidden
  // (residual); weights[depth]: output x hidden
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

struct DenoiserGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  bool finite() const;
};

DenoiserParams init_params(const ArchDescriptor& arch, std::uint64_t seed);

// Rounds every parameter through f32 so checkpoint serialization is lossless.
void quantize_params_f32(DenoiserParams& params);

// Sinusoidal features of t/T at geometric frequencies; dim must be even.
Eigen::VectorXd time_embedding(int t, int T, int dim);

// One input row: [flattened npath | time embedding | context].
Eigen::VectorXd assemble_input(const ArchDescriptor& arch, const NormalizedPath& npath,
                               int t, int T, const ContextVector& ctx);

// Cached activations for the backward pass.
struct ForwardCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> preact;  // pre-activation per hidden layer
  std::vector<Eigen::MatrixXd> hidden;  // post-residual per hidden layer
};

Eigen::MatrixXd forward_batch(const DenoiserParams& params, const Eigen::MatrixXd& input,
                              ForwardCache* cache = nullptr);

Eigen::VectorXd denoiser_forward(const DenoiserParams& params, const NormalizedPath& npath,
                                 int t, int T, const ContextVector& ctx);

// Reverse-mode gradients of forward_batch; returns d(loss)/d(input).
Eigen::MatrixXd backward_batch(const DenoiserParams& params, const ForwardCache& cache,
                               const Eigen::MatrixXd& output_grad, DenoiserGrads& grads);

struct BackwardResult {
  DenoiserGrads grads;
  Eigen::VectorXd input_grad;
};

BackwardResult denoiser_backward(const DenoiserParams& params, const NormalizedPath& npath,
                                 int t, int T, const ContextVector& ctx,
                                 const Eigen::VectorXd& output_grad);

struct AdamWConfig {
  double lr{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  double weight_decay{1e-4};
};

struct AdamWState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  std::int64_t step{0};
};

AdamWState make_adamw_state(const DenoiserParams& params);

// Decoupled weight-decay Adam update. Returns false (and leaves params and
// moments untouched) when the gradients are not finite.
bool adamw_step(DenoiserParams& params, const DenoiserGrads& grads, AdamWState& state,
                const AdamWConfig& cfg);

}  // namespace navguide
