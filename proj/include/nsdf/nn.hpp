#pragma once

#include <string>
#include <vector>

#include "nsdf/rng.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// One weight-normalized dense layer. The effective weight of row i is
// gain[i] * direction.row(i) / ||direction.row(i)||, so scale and direction
// of each row are decoupled.
struct DenseLayer {
  MatX direction;  // out x in
  VecX gain;       // out
  VecX bias;       // out

  Index out_dim() const { return direction.rows(); }
  Index in_dim() const { return direction.cols(); }
  MatX effective_weight() const;
};

// Decoder MLP: hidden layers with ReLU, linear two-channel head
// (MYO and RV signed-distance estimates). Default architecture: input
// 3+latent, seven 512-wide hidden layers, output 2.
struct DecoderParams {
  Index latent_dim = 256;
  std::vector<DenseLayer> layers;

  Index input_dim() const { return 3 + latent_dim; }
  int num_layers() const { return int(layers.size()); }
  void validate() const;
};

DecoderParams make_decoder(Index latent_dim = 256, Index hidden_width = 512,
                           int hidden_layers = 7);
DecoderParams make_decoder_custom(Index latent_dim,
                                  const std::vector<Index>& hidden_widths);

// Kaiming-uniform directions (bound sqrt(6/fan_in)), gains equal to the row
// norms so the initial effective weights equal the raw draw, zero biases.
void init_params(DecoderParams& params, Rng& rng);

// Latent entries i.i.d. Normal(0, 0.01^2).
VecX init_latent(Rng& rng, Index latent_dim);

struct ForwardCache {
  std::vector<MatX> inputs;   // h_0 .. h_{L-1}: input to each layer
  std::vector<MatX> preacts;  // pre-activations of hidden layers
  std::vector<MatX> weights;  // effective weights used by the pass
};

// Batched forward pass: points are n x 3, latent z is shared by all rows;
// returns n x 2 predictions. Out-of-domain points are allowed (the [-1,1]^3
// precondition is soft); pass a cache to enable backward().
MatX2 forward(const DecoderParams& params, const MatX3& points, const VecX& z,
              ForwardCache* cache = nullptr);

struct DecoderGrads {
  std::vector<MatX> direction;
  std::vector<VecX> gain;
  std::vector<VecX> bias;
  VecX latent;

  void setZero(const DecoderParams& params);
  void accumulate(const DecoderGrads& other, Real weight);
};

// Exact reverse-mode gradients of sum_ij upstream_ij * output_ij with
// respect to every direction/gain/bias and the latent. ReLU'(0) := 0.
// With param_grads=false only the latent gradient is produced.
DecoderGrads backward(const DecoderParams& params, const ForwardCache& cache,
                      const MatX2& upstream, bool param_grads = true);

// Cosine annealing: lr_max * (1 + cos(pi * step / total)) / 2, clamped
// after `total`.
Real cosine_lr(long step, long total, Real lr_max);

struct AdamWConfig {
  Real lr = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
  Real weight_decay = 0.0;  // decoupled
};

// First/second moment state for one tensor.
struct AdamMoments {
  MatX m, v;
  void ensure_shape(Index rows, Index cols);
};

// One decoupled-weight-decay Adam update with bias correction. `step` is
// 1-based. Throws NumericalError (naming the parameter) on non-finite
// gradients.
void adamw_update(Eigen::Ref<MatX> param, const Eigen::Ref<const MatX>& grad,
                  AdamMoments& moments, long step, const AdamWConfig& cfg,
                  const std::string& name);

// Optimizer over all decoder tensors (weight decay applies here).
class DecoderOptimizer {
 public:
  DecoderOptimizer(const DecoderParams& params, AdamWConfig cfg);
  void step(DecoderParams& params, const DecoderGrads& grads, Real lr);
  long step_count() const { return step_; }

 private:
  AdamWConfig cfg_;
  long step_ = 0;
  std::vector<AdamMoments> moments_;  // V,g,b per layer, in order
};

// Optimizer over one latent vector (never weight-decayed; the latent is
// regularized through the loss instead).
class LatentOptimizer {
 public:
  LatentOptimizer(Index latent_dim, AdamWConfig cfg);
  void step(VecX& latent, const VecX& grad, Real lr);
  long step_count() const { return step_; }

 private:
  AdamWConfig cfg_;
  long step_ = 0;
  AdamMoments moments_;
};

}  // namespace nsdf
