#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nsdf/canonical.hpp"
#include "nsdf/grid.hpp"
#include "nsdf/mesh.hpp"
#include "nsdf/nn.hpp"
#include "nsdf/sampling.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 8;
  Real lr = 1e-3;
  Real lambda_reg = 1e-4;
  Index latent_dim = 256;
  int validate_every = 10;
  int val_latent_iters = 100;
  Real val_latent_lr = 1e-3;
  uint64_t seed = 1;

  // Architecture (paper-sized by default; shrink for desk-scale runs).
  Index hidden_width = 512;
  int hidden_layers = 7;

  // Cosine schedule: one step per epoch by default (switchable to per-batch);
  // schedule_total 0 means "equal to epochs".
  bool schedule_per_batch = false;
  long schedule_total = 0;

  Real weight_decay = 0.01;  // decoder only
  SamplingConfig sampling;

  long effective_schedule_total() const {
    return schedule_total > 0 ? schedule_total : epochs;
  }
  void validate() const;
};

// One canonicalized training case: both structure meshes in the normalized
// domain.
struct TrainShape {
  std::string id;
  TriangleMesh myo;
  TriangleMesh rv;
};

struct TrainedModel {
  DecoderParams decoder;
  std::map<std::string, VecX> latents;  // per-training-shape codes
  CanonicalFrame frame;                 // identity rotation + global scale
  TrainConfig config;
  Real best_validation_loss = std::numeric_limits<Real>::infinity();
};

// Eq-style losses: mean over all n x 2 entries plus the latent penalty.
Real loss_train(const MatX2& pred, const MatX2& ref, const VecX& z,
                Real lambda);  // squared error
Real loss_infer(const MatX2& pred, const MatX2& ref, const VecX& z,
                Real lambda);  // absolute error

struct EpochLog {
  int epoch = 0;
  Real train_loss = 0;
  Real val_loss = std::numeric_limits<Real>::quiet_NaN();
  Real lr = 0;
};
using ProgressFn = std::function<void(const EpochLog&)>;

// Joint decoder + latent optimization with fresh per-epoch sampling, cosine
// schedule, periodic validation, and best-validation snapshotting. `frame`
// carries the frozen global scale into the returned model.
TrainedModel train(const std::vector<TrainShape>& train_shapes,
                   const std::vector<TrainShape>& val_shapes,
                   const TrainConfig& cfg, const CanonicalFrame& frame,
                   const ProgressFn& progress = nullptr);

// Frozen-decoder validation protocol: per shape, a fresh latent is fitted on
// on-surface pairs and the loss is reported on a held-out on+off sample;
// returns the mean over shapes.
Real validate(const DecoderParams& decoder, const std::vector<TrainShape>& val_shapes,
              const TrainConfig& cfg, const Rng& run_rng, long round_index);

struct LatentFit {
  VecX latent;
  Real loss = std::numeric_limits<Real>::infinity();  // best seen
  long iterations = 0;
};

// Latent-only optimization of the L1 objective against an observed sample
// set, decoder untouched; fixed learning rate; returns the best iterate.
LatentFit fit_latent(const DecoderParams& decoder, const SampleSet& observed,
                     int iters, Real lr, Real lambda, Rng& rng);

// Dense decode over the [-1,1]^3 lattice; first = MYO, second = RV.
std::pair<SdfGrid, SdfGrid> decode_grid(const DecoderParams& decoder,
                                        const VecX& z, int resolution);

struct Reconstruction {
  TriangleMesh myo;  // normalized coordinates
  TriangleMesh rv;
  VecX latent;
  Real fit_loss = 0;
  bool myo_empty = false;
  bool rv_empty = false;
  Index observed_out_of_domain = 0;
};

struct ReconstructOptions {
  int resolution = 200;
  int iters = 100;
  Real lr = 1e-3;
  Real lambda = 1e-4;
  uint64_t seed = 1;
  bool keep_sdf = false;  // retain decoded volumes in the result
};

// fit_latent -> decode_grid -> marching_cubes(iso=0) per structure. Decoded
// volumes are returned when opts.keep_sdf is set.
Reconstruction reconstruct(const TrainedModel& model, const SampleSet& observed,
                           const ReconstructOptions& opts,
                           std::pair<SdfGrid, SdfGrid>* sdf_out = nullptr);

}  // namespace nsdf
