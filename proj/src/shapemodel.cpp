#include "nsdf/shapemodel.hpp"

#include <algorithm>
#include <cmath>

#include "nsdf/marching_cubes.hpp"
#include "nsdf/mesh_query.hpp"
#include "nsdf/parallel.hpp"

namespace nsdf {

void TrainConfig::validate() const {
  if (epochs <= 0 || batch_size <= 0 || latent_dim <= 0 || hidden_width <= 0 ||
      hidden_layers <= 0 || validate_every <= 0 || val_latent_iters < 0)
    throw ConfigError("TrainConfig: counts must be positive");
  if (!(lr > 0) || !(val_latent_lr > 0))
    throw ConfigError("TrainConfig: learning rates must be positive");
  if (lambda_reg < 0) throw ConfigError("TrainConfig: lambda_reg must be >= 0");
  sampling.validate();
}

Real loss_train(const MatX2& pred, const MatX2& ref, const VecX& z,
                Real lambda) {
  if (pred.rows() != ref.rows())
    throw ConfigError("loss_train: shape mismatch");
  return (pred - ref).squaredNorm() / Real(pred.size()) +
         lambda * z.squaredNorm();
}

Real loss_infer(const MatX2& pred, const MatX2& ref, const VecX& z,
                Real lambda) {
  if (pred.rows() != ref.rows())
    throw ConfigError("loss_infer: shape mismatch");
  return (pred - ref).cwiseAbs().sum() / Real(pred.size()) +
         lambda * z.squaredNorm();
}

namespace {

struct ShapeQueries {
  MeshQuery myo;
  MeshQuery rv;
  ShapeQueries(const TrainShape& shape) : myo(shape.myo), rv(shape.rv) {}
};

// On-surface-only sample with exact two-channel references (validation
// latent-fitting set).
SampleSet sample_on_surface_pairs(const ShapeQueries& q, Index n_per_structure,
                                  Rng& rng) {
  SampleSet set;
  set.coords.resize(2 * n_per_structure, 3);
  set.sdf.resize(2 * n_per_structure, 2);
  set.tags.resize(static_cast<size_t>(2 * n_per_structure));
  const MeshQuery* queries[2] = {&q.myo, &q.rv};
  for (int s = 0; s < 2; ++s) {
    const Index base = s * n_per_structure;
    set.coords.middleRows(base, n_per_structure) =
        sample_on_surface(queries[s]->mesh(), n_per_structure, rng);
    for (Index i = 0; i < n_per_structure; ++i)
      set.tags[static_cast<size_t>(base + i)] =
          s == 0 ? SampleTag::ON_MYO : SampleTag::ON_RV;
  }
  parallel_for_chunks(set.size(), [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      const Vec3 p = set.coords.row(i);
      set.sdf(i, 0) = q.myo.signed_distance(p);
      set.sdf(i, 1) = q.rv.signed_distance(p);
    }
  });
  for (Index s = 0; s < 2; ++s)
    for (Index i = 0; i < n_per_structure; ++i)
      set.sdf(s * n_per_structure + i, s) = 0.0;
  return set;
}

// Squared-error data gradient and loss for one shape.
Real shape_loss_and_grads(const DecoderParams& decoder, const SampleSet& batch,
                          const VecX& z, Real lambda, DecoderGrads& grads) {
  ForwardCache cache;
  const MatX2 pred = forward(decoder, batch.coords, z, &cache);
  const MatX2 residual = pred - batch.sdf;
  const Real loss =
      residual.squaredNorm() / Real(pred.size()) + lambda * z.squaredNorm();
  const MatX2 upstream = (2.0 / Real(pred.size())) * residual;
  grads = backward(decoder, cache, upstream, /*param_grads=*/true);
  grads.latent += 2.0 * lambda * z;
  return loss;
}

}  // namespace

Real validate(const DecoderParams& decoder, const std::vector<TrainShape>& val_shapes,
              const TrainConfig& cfg, const Rng& run_rng, long round_index) {
  if (val_shapes.empty()) throw DataError("validate: no validation shapes");
  std::vector<Real> losses(val_shapes.size(), 0.0);

  parallel_for(Index(val_shapes.size()), [&](Index s) {
    const ShapeQueries q(val_shapes[static_cast<size_t>(s)]);
    Rng fit_rng = run_rng.stream(stream_label::kValidation,
                                 uint64_t(round_index), uint64_t(2 * s));
    Rng eval_rng = run_rng.stream(stream_label::kValidation,
                                  uint64_t(round_index), uint64_t(2 * s + 1));

    // 2048 on-surface pairs (1024 per structure) for latent fitting.
    const SampleSet fit_set = sample_on_surface_pairs(q, 1024, fit_rng);
    // Held-out 1024 on + 1024 off (512 per structure each) for the loss.
    SamplingConfig eval_cfg = cfg.sampling;
    eval_cfg.n_on_per_structure = 512;
    eval_cfg.n_off_per_structure = 512;
    const SampleSet eval_set = sample_training(q.myo, q.rv, eval_cfg, eval_rng);

    // Fresh latent each round, frozen decoder, Eq-style squared loss.
    VecX z = init_latent(fit_rng, decoder.latent_dim);
    LatentOptimizer opt(decoder.latent_dim, AdamWConfig{});
    for (int it = 0; it < cfg.val_latent_iters; ++it) {
      ForwardCache cache;
      const MatX2 pred = forward(decoder, fit_set.coords, z, &cache);
      const MatX2 upstream =
          (2.0 / Real(pred.size())) * (pred - fit_set.sdf);
      DecoderGrads grads =
          backward(decoder, cache, upstream, /*param_grads=*/false);
      grads.latent += 2.0 * cfg.lambda_reg * z;
      opt.step(z, grads.latent, cfg.val_latent_lr);
    }

    const MatX2 pred = forward(decoder, eval_set.coords, z, nullptr);
    losses[static_cast<size_t>(s)] =
        loss_train(pred, eval_set.sdf, z, cfg.lambda_reg);
  });

  Real sum = 0;
  for (Real l : losses) sum += l;
  return sum / Real(losses.size());
}

TrainedModel train(const std::vector<TrainShape>& train_shapes,
                   const std::vector<TrainShape>& val_shapes,
                   const TrainConfig& cfg, const CanonicalFrame& frame,
                   const ProgressFn& progress) {
  cfg.validate();
  if (train_shapes.empty()) throw DataError("train: no training shapes");

  const Index n_shapes = Index(train_shapes.size());
  const Rng run_rng(cfg.seed);

  std::vector<ShapeQueries> queries;
  queries.reserve(train_shapes.size());
  for (const auto& s : train_shapes) {
    if (s.myo.empty() || s.rv.empty())
      throw DataError("train: shape '" + s.id + "' is missing a structure");
    queries.emplace_back(s);
  }

  DecoderParams decoder =
      make_decoder(cfg.latent_dim, cfg.hidden_width, cfg.hidden_layers);
  {
    Rng init_rng = run_rng.stream(stream_label::kDecoderInit);
    init_params(decoder, init_rng);
  }
  std::vector<VecX> latents(static_cast<size_t>(n_shapes));
  for (Index s = 0; s < n_shapes; ++s) {
    Rng z_rng = run_rng.stream(stream_label::kLatentInit, uint64_t(s));
    latents[static_cast<size_t>(s)] = init_latent(z_rng, cfg.latent_dim);
  }

  AdamWConfig dec_cfg;
  dec_cfg.lr = cfg.lr;
  dec_cfg.weight_decay = cfg.weight_decay;
  DecoderOptimizer dec_opt(decoder, dec_cfg);
  std::vector<LatentOptimizer> lat_opts;
  lat_opts.reserve(static_cast<size_t>(n_shapes));
  for (Index s = 0; s < n_shapes; ++s)
    lat_opts.emplace_back(cfg.latent_dim, AdamWConfig{});

  const long schedule_total = cfg.effective_schedule_total();
  long schedule_step = 0;

  TrainedModel best;
  best.frame = frame;
  best.config = cfg;
  bool have_best = false;
  long validation_round = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<Index> order =
        run_rng.stream(stream_label::kBatchShuffle, uint64_t(epoch))
            .permutation(n_shapes);

    Real epoch_loss = 0;
    Index batches = 0;
    Real lr_epoch = cosine_lr(schedule_step, schedule_total, cfg.lr);

    for (Index start = 0; start < n_shapes; start += cfg.batch_size) {
      const Index bsz = std::min<Index>(cfg.batch_size, n_shapes - start);
      const Real lr_now = cfg.schedule_per_batch
                              ? cosine_lr(schedule_step, schedule_total, cfg.lr)
                              : lr_epoch;

      std::vector<DecoderGrads> shape_grads(static_cast<size_t>(bsz));
      std::vector<Real> shape_losses(static_cast<size_t>(bsz), 0.0);

      // Per-shape sampling and gradients run concurrently; accumulation and
      // optimizer steps stay sequential in shape order.
      parallel_for(bsz, [&](Index b) {
        const Index s = order[static_cast<size_t>(start + b)];
        Rng sample_rng = run_rng.stream(stream_label::kTrainSample,
                                        uint64_t(s), uint64_t(epoch));
        const SampleSet batch =
            sample_training(queries[static_cast<size_t>(s)].myo,
                            queries[static_cast<size_t>(s)].rv, cfg.sampling,
                            sample_rng);
        shape_losses[static_cast<size_t>(b)] = shape_loss_and_grads(
            decoder, batch, latents[static_cast<size_t>(s)], cfg.lambda_reg,
            shape_grads[static_cast<size_t>(b)]);
      });

      DecoderGrads batch_grads;
      batch_grads.setZero(decoder);
      for (Index b = 0; b < bsz; ++b)
        batch_grads.accumulate(shape_grads[static_cast<size_t>(b)],
                               1.0 / Real(bsz));

      Real batch_loss = 0;
      for (Index b = 0; b < bsz; ++b)
        batch_loss += shape_losses[static_cast<size_t>(b)] / Real(bsz);
      if (!std::isfinite(batch_loss))
        throw NumericalError("train: non-finite loss at epoch " +
                             std::to_string(epoch) + ", batch " +
                             std::to_string(start / cfg.batch_size));

      dec_opt.step(decoder, batch_grads, lr_now);
      for (Index b = 0; b < bsz; ++b) {
        const Index s = order[static_cast<size_t>(start + b)];
        lat_opts[static_cast<size_t>(s)].step(
            latents[static_cast<size_t>(s)],
            shape_grads[static_cast<size_t>(b)].latent / Real(bsz), lr_now);
      }

      epoch_loss += batch_loss;
      ++batches;
      if (cfg.schedule_per_batch) ++schedule_step;
    }
    if (!cfg.schedule_per_batch) ++schedule_step;
    epoch_loss /= Real(batches);

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = epoch_loss;
    log.lr = lr_epoch;

    if (!val_shapes.empty() && (epoch + 1) % cfg.validate_every == 0) {
      const Real val_loss =
          validate(decoder, val_shapes, cfg, run_rng, validation_round);
      ++validation_round;
      log.val_loss = val_loss;
      if (!have_best || val_loss < best.best_validation_loss) {
        have_best = true;
        best.best_validation_loss = val_loss;
        best.decoder = decoder;
        best.latents.clear();
        for (Index s = 0; s < n_shapes; ++s)
          best.latents[train_shapes[static_cast<size_t>(s)].id] =
              latents[static_cast<size_t>(s)];
      }
    }
    if (progress) progress(log);
  }

  if (!have_best) {  // no validation round ran; keep the final state
    best.decoder = decoder;
    best.latents.clear();
    for (Index s = 0; s < n_shapes; ++s)
      best.latents[train_shapes[static_cast<size_t>(s)].id] =
          latents[static_cast<size_t>(s)];
  }
  return best;
}

LatentFit fit_latent(const DecoderParams& decoder, const SampleSet& observed,
                     int iters, Real lr, Real lambda, Rng& rng) {
  if (observed.size() == 0) throw DataError("fit_latent: empty observation");
  LatentFit fit;
  VecX z = init_latent(rng, decoder.latent_dim);
  fit.latent = z;
  LatentOptimizer opt(decoder.latent_dim, AdamWConfig{});

  auto eval_loss = [&](const VecX& zz) {
    const MatX2 pred = forward(decoder, observed.coords, zz, nullptr);
    return loss_infer(pred, observed.sdf, zz, lambda);
  };

  fit.loss = eval_loss(z);
  for (int it = 0; it < iters; ++it) {
    ForwardCache cache;
    const MatX2 pred = forward(decoder, observed.coords, z, &cache);
    const MatX2 residual = pred - observed.sdf;
    const Real loss =
        residual.cwiseAbs().sum() / Real(pred.size()) + lambda * z.squaredNorm();
    if (!std::isfinite(loss))
      throw NumericalError("fit_latent: non-finite loss at iteration " +
                           std::to_string(it));
    if (loss < fit.loss) {
      fit.loss = loss;
      fit.latent = z;
    }
    const MatX2 upstream =
        residual.unaryExpr([](Real r) { return Real((r > 0) - (r < 0)); }) /
        Real(pred.size());
    DecoderGrads grads = backward(decoder, cache, upstream, false);
    grads.latent += 2.0 * lambda * z;
    opt.step(z, grads.latent, lr);
    ++fit.iterations;
  }
  const Real final_loss = eval_loss(z);
  if (final_loss < fit.loss) {
    fit.loss = final_loss;
    fit.latent = z;
  }
  return fit;
}

std::pair<SdfGrid, SdfGrid> decode_grid(const DecoderParams& decoder,
                                        const VecX& z, int resolution) {
  if (resolution < 8) throw ConfigError("decode_grid: resolution must be >= 8");
  SdfGrid myo = make_normalized_grid(resolution);
  SdfGrid rv = make_normalized_grid(resolution);
  const Index total = myo.size();
  const int n = resolution;

  parallel_for_chunks(total, [&](Index begin, Index end) {
    constexpr Index kBlock = 16384;
    for (Index at = begin; at < end; at += kBlock) {
      const Index count = std::min(kBlock, end - at);
      MatX3 pts(count, 3);
      for (Index r = 0; r < count; ++r) {
        const Index v = at + r;
        const int i = int(v % n), j = int((v / n) % n), k = int(v / (Index(n) * n));
        pts.row(r) = myo.voxel_center(i, j, k).transpose();
      }
      const MatX2 pred = forward(decoder, pts, z, nullptr);
      myo.values.segment(at, count) = pred.col(0);
      rv.values.segment(at, count) = pred.col(1);
    }
  });
  return {std::move(myo), std::move(rv)};
}

Reconstruction reconstruct(const TrainedModel& model, const SampleSet& observed,
                           const ReconstructOptions& opts,
                           std::pair<SdfGrid, SdfGrid>* sdf_out) {
  Reconstruction rec;
  for (Index i = 0; i < observed.size(); ++i)
    if ((observed.coords.row(i).cwiseAbs().array() > 1.0).any())
      ++rec.observed_out_of_domain;

  Rng rng = Rng(opts.seed).stream(stream_label::kInference);
  const LatentFit fit = fit_latent(model.decoder, observed, opts.iters,
                                   opts.lr, opts.lambda, rng);
  rec.latent = fit.latent;
  rec.fit_loss = fit.loss;

  auto grids = decode_grid(model.decoder, fit.latent, opts.resolution);
  rec.myo = marching_cubes(grids.first, 0.0);
  rec.rv = marching_cubes(grids.second, 0.0);
  rec.myo.structure = StructureId::MYO;
  rec.rv.structure = StructureId::RV;
  rec.myo_empty = rec.myo.empty();
  rec.rv_empty = rec.rv.empty();
  if (sdf_out) *sdf_out = std::move(grids);
  return rec;
}

}  // namespace nsdf
