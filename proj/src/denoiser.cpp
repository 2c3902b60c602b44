#include "navguide/denoiser.hpp"

#include <cmath>
#include <stdexcept>

#include "navguide/rng.hpp"

namespace navguide {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_deriv(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

void check_arch(const ArchDescriptor& arch) {
  if (arch.n_w < 1 || arch.ctx_dim < 0 || arch.temb_dim < 2 || arch.temb_dim % 2 != 0 ||
      arch.hidden_width < 1 || arch.hidden_depth < 1) {
    throw std::invalid_argument("invalid architecture descriptor");
  }
}

}  // namespace

std::int64_t ArchDescriptor::param_count() const {
  const std::int64_t in = input_dim();
  const std::int64_t h = hidden_width;
  const std::int64_t out = output_dim();
  std::int64_t count = h * in + h;                       // input layer
  count += static_cast<std::int64_t>(hidden_depth - 1) * (h * h + h);  // residual blocks
  count += out * h + out;                                // output layer
  return count;
}

ContextVector context_from_scan(const DepthScan& scan, int bins, int dim) {
  if (bins < 1 || dim < bins) throw std::invalid_argument("context_from_scan: dim < bins");
  if (scan.angles.empty() || !(scan.max_range > 0.0)) {
    throw std::invalid_argument("context_from_scan: empty scan");
  }
  ContextVector ctx;
  ctx.features.assign(static_cast<std::size_t>(dim), 0.0);

  const double a_min = scan.angles.front();
  const double a_max = scan.angles.back();
  const double span = std::max(a_max - a_min, 1e-12);
  std::vector<double> min_range(static_cast<std::size_t>(bins), scan.max_range);
  for (std::size_t i = 0; i < scan.angles.size(); ++i) {
    int b = static_cast<int>((scan.angles[i] - a_min) / span * bins);
    b = std::clamp(b, 0, bins - 1);
    min_range[b] = std::min(min_range[b], scan.ranges[i]);
  }
  for (int b = 0; b < bins; ++b) ctx.features[b] = min_range[b] / scan.max_range;
  return ctx;
}

DenoiserParams init_params(const ArchDescriptor& arch, std::uint64_t seed) {
  check_arch(arch);
  DenoiserParams params;
  params.arch = arch;

  std::vector<std::pair<int, int>> shapes;  // (rows, cols)
  shapes.emplace_back(arch.hidden_width, arch.input_dim());
  for (int i = 1; i < arch.hidden_depth; ++i) {
    shapes.emplace_back(arch.hidden_width, arch.hidden_width);
  }
  shapes.emplace_back(arch.output_dim(), arch.hidden_width);

  Rng rng(seed);
  for (const auto& [rows, cols] : shapes) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    params.weights.push_back(std::move(w));
    params.biases.push_back(Eigen::VectorXd::Zero(rows));
  }
  return params;
}

void quantize_params_f32(DenoiserParams& params) {
  const auto q = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  for (auto& w : params.weights) w = w.unaryExpr(q);
  for (auto& b : params.biases) b = b.unaryExpr(q);
}

Eigen::VectorXd time_embedding(int t, int T, int dim) {
  if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("time_embedding: dim must be even");
  const double t_norm = static_cast<double>(t) / static_cast<double>(T);
  const int pairs = dim / 2;
  Eigen::VectorXd emb(dim);
  for (int i = 0; i < pairs; ++i) {
    const double f = (pairs > 1)
                         ? std::pow(1000.0, static_cast<double>(i) / (pairs - 1))
                         : 1.0;
    emb(2 * i) = std::sin(f * t_norm);
    emb(2 * i + 1) = std::cos(f * t_norm);
  }
  return emb;
}

Eigen::VectorXd assemble_input(const ArchDescriptor& arch, const NormalizedPath& npath,
                               int t, int T, const ContextVector& ctx) {
  if (static_cast<int>(npath.size()) != arch.n_w) {
    throw std::invalid_argument("assemble_input: path length != n_w");
  }
  if (static_cast<int>(ctx.features.size()) != arch.ctx_dim) {
    throw std::invalid_argument("assemble_input: context dim mismatch");
  }
  Eigen::VectorXd x(arch.input_dim());
  for (int i = 0; i < arch.n_w; ++i) {
    x(2 * i) = npath.waypoints[i].x;
    x(2 * i + 1) = npath.waypoints[i].y;
  }
  x.segment(2 * arch.n_w, arch.temb_dim) = time_embedding(t, T, arch.temb_dim);
  for (int i = 0; i < arch.ctx_dim; ++i) x(2 * arch.n_w + arch.temb_dim + i) = ctx.features[i];
  return x;
}

Eigen::MatrixXd forward_batch(const DenoiserParams& params, const Eigen::MatrixXd& input,
                              ForwardCache* cache) {
  const auto& arch = params.arch;
  if (input.cols() != arch.input_dim()) {
    throw std::invalid_argument("forward_batch: input width mismatch");
  }
  const int depth = arch.hidden_depth;
  if (cache) {
    cache->input = input;
    cache->preact.resize(depth);
    cache->hidden.resize(depth);
  }

  Eigen::MatrixXd a = (input * params.weights[0].transpose()).rowwise() +
                      params.biases[0].transpose();
  if (cache) cache->preact[0] = a;
  Eigen::MatrixXd h = a.unaryExpr([](double v) { return gelu(v); });
  if (cache) cache->hidden[0] = h;

  for (int l = 1; l < depth; ++l) {
    a = (h * params.weights[l].transpose()).rowwise() + params.biases[l].transpose();
    if (cache) cache->preact[l] = a;
    h += a.unaryExpr([](double v) { return gelu(v); });  // residual block
    if (cache) cache->hidden[l] = h;
  }

  return (h * params.weights[depth].transpose()).rowwise() +
         params.biases[depth].transpose();
}

Eigen::VectorXd denoiser_forward(const DenoiserParams& params, const NormalizedPath& npath,
                                 int t, int T, const ContextVector& ctx) {
  const Eigen::VectorXd x = assemble_input(params.arch, npath, t, T, ctx);
  return forward_batch(params, x.transpose()).row(0).transpose();
}

bool DenoiserGrads::finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

Eigen::MatrixXd backward_batch(const DenoiserParams& params, const ForwardCache& cache,
                               const Eigen::MatrixXd& output_grad, DenoiserGrads& grads) {
  const auto& arch = params.arch;
  const int depth = arch.hidden_depth;
  grads.weights.resize(depth + 1);
  grads.biases.resize(depth + 1);

  // output layer
  grads.weights[depth] = output_grad.transpose() * cache.hidden[depth - 1];
  grads.biases[depth] = output_grad.colwise().sum().transpose();
  Eigen::MatrixXd dh = output_grad * params.weights[depth];

  // residual blocks, in reverse
  for (int l = depth - 1; l >= 1; --l) {
    const Eigen::MatrixXd da =
        dh.cwiseProduct(cache.preact[l].unaryExpr([](double v) { return gelu_deriv(v); }));
    grads.weights[l] = da.transpose() * cache.hidden[l - 1];
    grads.biases[l] = da.colwise().sum().transpose();
    dh += da * params.weights[l];  // residual skip adds identity
  }

  const Eigen::MatrixXd da =
      dh.cwiseProduct(cache.preact[0].unaryExpr([](double v) { return gelu_deriv(v); }));
  grads.weights[0] = da.transpose() * cache.input;
  grads.biases[0] = da.colwise().sum().transpose();
  return da * params.weights[0];
}

BackwardResult denoiser_backward(const DenoiserParams& params, const NormalizedPath& npath,
                                 int t, int T, const ContextVector& ctx,
                                 const Eigen::VectorXd& output_grad) {
  if (output_grad.size() != params.arch.output_dim()) {
    throw std::invalid_argument("denoiser_backward: output_grad size mismatch");
  }
  const Eigen::VectorXd x = assemble_input(params.arch, npath, t, T, ctx);
  ForwardCache cache;
  forward_batch(params, x.transpose(), &cache);
  BackwardResult result;
  const Eigen::MatrixXd dx = backward_batch(params, cache, output_grad.transpose(), result.grads);
  result.input_grad = dx.row(0).transpose();
  return result;
}

AdamWState make_adamw_state(const DenoiserParams& params) {
  AdamWState state;
  for (const auto& w : params.weights) {
    state.m_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    state.v_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : params.biases) {
    state.m_b.push_back(Eigen::VectorXd::Zero(b.size()));
    state.v_b.push_back(Eigen::VectorXd::Zero(b.size()));
  }
  return state;
}

namespace {

template <typename T>
void adamw_update(T& p, const T& g, T& m, T& v, std::int64_t step, const AdamWConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  p.array() -= cfg.lr * ((m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps) +
                         cfg.weight_decay * p.array());
}

}  // namespace

bool adamw_step(DenoiserParams& params, const DenoiserGrads& grads, AdamWState& state,
                const AdamWConfig& cfg) {
  if (grads.weights.size() != params.weights.size() ||
      grads.biases.size() != params.biases.size()) {
    throw std::invalid_argument("adamw_step: gradient shape mismatch");
  }
  if (!grads.finite()) return false;

  ++state.step;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    adamw_update(params.weights[i], grads.weights[i], state.m_w[i], state.v_w[i], state.step,
                 cfg);
  }
  for (std::size_t i = 0; i < params.biases.size(); ++i) {
    adamw_update(params.biases[i], grads.biases[i], state.m_b[i], state.v_b[i], state.step,
                 cfg);
  }
  return true;
}

}  // namespace navguide
