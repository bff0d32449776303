#include "nsdf/nn.hpp"

#include <cmath>
#include <numbers>

namespace nsdf {

MatX DenseLayer::effective_weight() const {
  const VecX inv_norms = direction.rowwise().norm().cwiseInverse();
  return gain.cwiseProduct(inv_norms).asDiagonal() * direction;
}

void DecoderParams::validate() const {
  if (layers.empty()) throw ConfigError("DecoderParams: no layers");
  Index expect = input_dim();
  for (const auto& layer : layers) {
    if (layer.in_dim() != expect)
      throw ConfigError("DecoderParams: layer width mismatch");
    if (layer.gain.size() != layer.out_dim() ||
        layer.bias.size() != layer.out_dim())
      throw ConfigError("DecoderParams: gain/bias length mismatch");
    if ((layer.direction.rowwise().norm().array() <= 0.0).any())
      throw ConfigError("DecoderParams: zero-norm direction row");
    expect = layer.out_dim();
  }
  if (expect != 2) throw ConfigError("DecoderParams: output width must be 2");
}

DecoderParams make_decoder(Index latent_dim, Index hidden_width,
                           int hidden_layers) {
  return make_decoder_custom(
      latent_dim, std::vector<Index>(static_cast<size_t>(hidden_layers),
                                     hidden_width));
}

DecoderParams make_decoder_custom(Index latent_dim,
                                  const std::vector<Index>& hidden_widths) {
  DecoderParams params;
  params.latent_dim = latent_dim;
  Index in = params.input_dim();
  for (Index w : hidden_widths) {
    DenseLayer layer;
    layer.direction = MatX::Zero(w, in);
    layer.gain = VecX::Zero(w);
    layer.bias = VecX::Zero(w);
    params.layers.push_back(std::move(layer));
    in = w;
  }
  DenseLayer head;
  head.direction = MatX::Zero(2, in);
  head.gain = VecX::Zero(2);
  head.bias = VecX::Zero(2);
  params.layers.push_back(std::move(head));
  return params;
}

void init_params(DecoderParams& params, Rng& rng) {
  for (auto& layer : params.layers) {
    const Real bound = std::sqrt(6.0 / Real(layer.in_dim()));
    for (Index r = 0; r < layer.out_dim(); ++r)
      for (Index c = 0; c < layer.in_dim(); ++c)
        layer.direction(r, c) = rng.uniform(-bound, bound);
    layer.gain = layer.direction.rowwise().norm();
    layer.bias.setZero();
  }
  params.validate();
}

VecX init_latent(Rng& rng, Index latent_dim) {
  VecX z(latent_dim);
  for (Index i = 0; i < latent_dim; ++i) z[i] = 0.01 * rng.gaussian();
  return z;
}

MatX2 forward(const DecoderParams& params, const MatX3& points, const VecX& z,
              ForwardCache* cache) {
  if (z.size() != params.latent_dim)
    throw ConfigError("forward: latent size mismatch");
  const Index n = points.rows();
  const int num_layers = params.num_layers();

  MatX h(params.input_dim(), n);
  h.topRows(3) = points.transpose();
  h.bottomRows(params.latent_dim).colwise() = z;

  if (cache) {
    cache->inputs.assign(static_cast<size_t>(num_layers), MatX());
    cache->preacts.assign(static_cast<size_t>(num_layers - 1), MatX());
    cache->weights.assign(static_cast<size_t>(num_layers), MatX());
  }

  for (int l = 0; l < num_layers; ++l) {
    const DenseLayer& layer = params.layers[static_cast<size_t>(l)];
    MatX weight = layer.effective_weight();
    if (cache) {
      cache->inputs[static_cast<size_t>(l)] = h;
      cache->weights[static_cast<size_t>(l)] = weight;
    }
    MatX a = weight * h;
    a.colwise() += layer.bias;
    if (l + 1 < num_layers) {
      if (cache) cache->preacts[static_cast<size_t>(l)] = a;
      h = a.cwiseMax(0.0);
    } else {
      h = std::move(a);
    }
  }
  return h.transpose();
}

void DecoderGrads::setZero(const DecoderParams& params) {
  direction.resize(params.layers.size());
  gain.resize(params.layers.size());
  bias.resize(params.layers.size());
  for (size_t l = 0; l < params.layers.size(); ++l) {
    direction[l] = MatX::Zero(params.layers[l].out_dim(),
                              params.layers[l].in_dim());
    gain[l] = VecX::Zero(params.layers[l].out_dim());
    bias[l] = VecX::Zero(params.layers[l].out_dim());
  }
  latent = VecX::Zero(params.latent_dim);
}

void DecoderGrads::accumulate(const DecoderGrads& other, Real weight) {
  for (size_t l = 0; l < direction.size(); ++l) {
    direction[l] += weight * other.direction[l];
    gain[l] += weight * other.gain[l];
    bias[l] += weight * other.bias[l];
  }
  latent += weight * other.latent;
}

DecoderGrads backward(const DecoderParams& params, const ForwardCache& cache,
                      const MatX2& upstream, bool param_grads) {
  const int num_layers = params.num_layers();
  if (int(cache.inputs.size()) != num_layers)
    throw ConfigError("backward: cache does not match the decoder");
  if (upstream.rows() != cache.inputs.front().cols())
    throw ConfigError("backward: upstream batch size mismatch");

  DecoderGrads grads;
  if (param_grads) grads.setZero(params);

  MatX delta = upstream.transpose();  // d(loss)/d(pre-activation), out x n
  for (int l = num_layers - 1; l >= 0; --l) {
    const DenseLayer& layer = params.layers[static_cast<size_t>(l)];
    const MatX& h_in = cache.inputs[static_cast<size_t>(l)];

    if (param_grads) {
      const MatX dW = delta * h_in.transpose();
      // Through the weight-norm reparameterization w_i = g_i v_i / ||v_i||:
      // the direction gradient is the component of dW orthogonal to v_i.
      const VecX row_norms = layer.direction.rowwise().norm();
      for (Index r = 0; r < layer.out_dim(); ++r) {
        const Real nrm = row_norms[r];
        const auto v = layer.direction.row(r);
        const Real dw_dot_v = dW.row(r).dot(v);
        grads.gain[static_cast<size_t>(l)][r] = dw_dot_v / nrm;
        grads.direction[static_cast<size_t>(l)].row(r) =
            (layer.gain[r] / nrm) * dW.row(r) -
            (layer.gain[r] * dw_dot_v / (nrm * nrm * nrm)) * v;
      }
      grads.bias[static_cast<size_t>(l)] = delta.rowwise().sum();
    }

    if (l > 0) {
      MatX dh = cache.weights[static_cast<size_t>(l)].transpose() * delta;
      // ReLU subgradient, zero at zero.
      const MatX& pre = cache.preacts[static_cast<size_t>(l - 1)];
      delta = (pre.array() > 0.0).select(dh, 0.0);
    } else {
      const MatX dh = cache.weights[0].transpose() * delta;
      grads.latent = dh.bottomRows(params.latent_dim).rowwise().sum();
    }
  }
  return grads;
}

Real cosine_lr(long step, long total, Real lr_max) {
  if (total <= 0) throw ConfigError("cosine_lr: total must be positive");
  if (step < 0) throw ConfigError("cosine_lr: negative step");
  if (step >= total) step = total;
  return lr_max * (1.0 + std::cos(std::numbers::pi * Real(step) / Real(total))) /
         2.0;
}

void AdamMoments::ensure_shape(Index rows, Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    m = MatX::Zero(rows, cols);
    v = MatX::Zero(rows, cols);
  }
}

void adamw_update(Eigen::Ref<MatX> param, const Eigen::Ref<const MatX>& grad,
                  AdamMoments& moments, long step, const AdamWConfig& cfg,
                  const std::string& name) {
  if (!grad.allFinite())
    throw NumericalError("adamw: non-finite gradient for " + name);
  moments.ensure_shape(param.rows(), param.cols());
  moments.m = cfg.beta1 * moments.m + (1.0 - cfg.beta1) * grad;
  moments.v = cfg.beta2 * moments.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const Real bc1 = 1.0 - std::pow(cfg.beta1, Real(step));
  const Real bc2 = 1.0 - std::pow(cfg.beta2, Real(step));
  if (cfg.weight_decay != 0.0) param -= (cfg.lr * cfg.weight_decay) * param;
  param.array() -= cfg.lr * (moments.m.array() / bc1) /
                   ((moments.v.array() / bc2).sqrt() + cfg.eps);
}

DecoderOptimizer::DecoderOptimizer(const DecoderParams& params, AdamWConfig cfg)
    : cfg_(cfg), moments_(params.layers.size() * 3) {}

void DecoderOptimizer::step(DecoderParams& params, const DecoderGrads& grads,
                            Real lr) {
  ++step_;
  AdamWConfig cfg = cfg_;
  cfg.lr = lr;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const std::string tag = "layer" + std::to_string(l);
    adamw_update(params.layers[l].direction, grads.direction[l],
                 moments_[3 * l + 0], step_, cfg, tag + ".direction");
    adamw_update(params.layers[l].gain, grads.gain[l], moments_[3 * l + 1],
                 step_, cfg, tag + ".gain");
    adamw_update(params.layers[l].bias, grads.bias[l], moments_[3 * l + 2],
                 step_, cfg, tag + ".bias");
  }
}

LatentOptimizer::LatentOptimizer(Index latent_dim, AdamWConfig cfg)
    : cfg_(cfg) {
  cfg_.weight_decay = 0.0;
  moments_.ensure_shape(latent_dim, 1);
}

void LatentOptimizer::step(VecX& latent, const VecX& grad, Real lr) {
  ++step_;
  AdamWConfig cfg = cfg_;
  cfg.lr = lr;
  adamw_update(latent, grad, moments_, step_, cfg, "latent");
}

}  // namespace nsdf
