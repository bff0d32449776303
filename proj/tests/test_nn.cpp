#include <doctest.h>

#include <cmath>

#include "nsdf/nn.hpp"
#include "nsdf/rng.hpp"

using namespace nsdf;

namespace {

// Central finite differences of a scalar function of one parameter entry.
template <typename F>
Real central_diff(F&& eval, Real& slot, Real h = 1e-5) {
  const Real keep = slot;
  slot = keep + h;
  const Real up = eval();
  slot = keep - h;
  const Real down = eval();
  slot = keep;
  return (up - down) / (2 * h);
}

Real rel_err(Real a, Real b) {
  const Real denom = std::max({std::abs(a), std::abs(b), Real(1e-6)});
  return std::abs(a - b) / denom;
}

}  // namespace

TEST_CASE("zero gains produce zero output") {
  Rng rng(2);
  DecoderParams p = make_decoder(8, 16, 3);
  init_params(p, rng);
  for (auto& layer : p.layers) layer.gain.setZero();
  MatX3 pts(5, 3);
  for (Index i = 0; i < 5; ++i)
    pts.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
  const MatX2 out = forward(p, pts, init_latent(rng, 8));
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weight-norm: scaling a direction row leaves the output unchanged") {
  Rng rng(3);
  DecoderParams p = make_decoder(4, 12, 2);
  init_params(p, rng);
  MatX3 pts(7, 3);
  for (Index i = 0; i < 7; ++i)
    pts.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
  const VecX z = init_latent(rng, 4);
  const MatX2 base = forward(p, pts, z);
  p.layers[1].direction.row(3) *= 7.0;
  const MatX2 scaled = forward(p, pts, z);
  CHECK((base - scaled).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single weight-normalized row: v=(3,4), g=1 gives w=(0.6,0.8)") {
  DenseLayer layer;
  layer.direction.resize(1, 2);
  layer.direction << 3, 4;
  layer.gain.resize(1);
  layer.gain << 1;
  layer.bias = VecX::Zero(1);
  const MatX w = layer.effective_weight();
  CHECK(w(0, 0) == doctest::Approx(0.6));
  CHECK(w(0, 1) == doctest::Approx(0.8));
  // Pre-activation for input (1,1).
  CHECK((w * Eigen::Vector2d(1, 1))(0) == doctest::Approx(1.4));
}

TEST_CASE("gradients match central finite differences on a toy network") {
  Rng rng(20240401);
  DecoderParams p = make_decoder_custom(8, {16, 16});
  init_params(p, rng);
  const Index n = 6;
  MatX3 pts(n, 3);
  for (Index i = 0; i < n; ++i)
    pts.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
  VecX z = init_latent(rng, 8);
  MatX2 ref(n, 2);
  for (Index i = 0; i < n; ++i)
    ref.row(i) << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5);
  const Real lambda = 1e-4;

  auto loss = [&]() {
    const MatX2 pred = forward(p, pts, z);
    return (pred - ref).squaredNorm() / Real(pred.size()) +
           lambda * z.squaredNorm();
  };

  ForwardCache cache;
  const MatX2 pred = forward(p, pts, z, &cache);
  const MatX2 upstream = (2.0 / Real(pred.size())) * (pred - ref);
  DecoderGrads grads = backward(p, cache, upstream, true);
  grads.latent += 2.0 * lambda * z;

  Real worst = 0;
  for (size_t l = 0; l < p.layers.size(); ++l) {
    auto& layer = p.layers[l];
    for (Index r = 0; r < layer.out_dim(); ++r) {
      for (Index c = 0; c < layer.in_dim(); c += 3) {
        const Real fd = central_diff(loss, layer.direction(r, c));
        worst = std::max(worst, rel_err(fd, grads.direction[l](r, c)));
      }
      const Real fd_g = central_diff(loss, layer.gain[r]);
      worst = std::max(worst, rel_err(fd_g, grads.gain[l][r]));
      const Real fd_b = central_diff(loss, layer.bias[r]);
      worst = std::max(worst, rel_err(fd_b, grads.bias[l][r]));
    }
  }
  for (Index i = 0; i < z.size(); ++i) {
    const Real fd = central_diff(loss, z[i]);
    worst = std::max(worst, rel_err(fd, grads.latent[i]));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("direction gradients are orthogonal to their rows") {
  Rng rng(6);
  DecoderParams p = make_decoder_custom(6, {24, 24});
  init_params(p, rng);
  const Index n = 16;
  MatX3 pts(n, 3);
  for (Index i = 0; i < n; ++i)
    pts.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
  const VecX z = init_latent(rng, 6);
  ForwardCache cache;
  const MatX2 pred = forward(p, pts, z, &cache);
  MatX2 upstream(n, 2);
  for (Index i = 0; i < n; ++i)
    upstream.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1);
  const DecoderGrads grads = backward(p, cache, upstream, true);
  for (size_t l = 0; l < p.layers.size(); ++l)
    for (Index r = 0; r < p.layers[l].out_dim(); ++r) {
      const Real dot = grads.direction[l].row(r).dot(p.layers[l].direction.row(r));
      const Real scale = grads.direction[l].row(r).norm() *
                         p.layers[l].direction.row(r).norm();
      if (scale > 0) CHECK(std::abs(dot) / scale < 1e-8);
    }
}

TEST_CASE("zero upstream gives zero gradients") {
  Rng rng(7);
  DecoderParams p = make_decoder_custom(4, {8});
  init_params(p, rng);
  MatX3 pts = MatX3::Zero(3, 3);
  ForwardCache cache;
  forward(p, pts, init_latent(rng, 4), &cache);
  const DecoderGrads g = backward(p, cache, MatX2::Zero(3, 2), true);
  for (size_t l = 0; l < p.layers.size(); ++l) {
    CHECK(g.direction[l].cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.gain[l].cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.bias[l].cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(g.latent.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adamw: first step moves by ~lr against the gradient") {
  MatX p = MatX::Zero(1, 1);
  MatX g = MatX::Ones(1, 1);
  AdamMoments moments;
  AdamWConfig cfg;
  cfg.lr = 1e-3;
  cfg.weight_decay = 0.0;
  adamw_update(p, g, moments, 1, cfg, "p");
  CHECK(p(0, 0) == doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("adamw: zero gradient and zero decay leave parameters unchanged") {
  MatX p = MatX::Constant(2, 2, 3.5);
  AdamMoments moments;
  AdamWConfig cfg;
  adamw_update(p, MatX::Zero(2, 2), moments, 1, cfg, "p");
  CHECK((p.array() == 3.5).all());
}

TEST_CASE("adamw: decoupled decay shrinks by lr*decay") {
  MatX p = MatX::Constant(1, 1, 1.0);
  AdamMoments moments;
  AdamWConfig cfg;
  cfg.lr = 1e-3;
  cfg.weight_decay = 0.01;
  adamw_update(p, MatX::Zero(1, 1), moments, 1, cfg, "p");
  CHECK(p(0, 0) == doctest::Approx(1.0 - 1e-5));
}

TEST_CASE("adamw: non-finite gradients fail loudly with the parameter name") {
  MatX p = MatX::Zero(1, 1);
  MatX g = MatX::Constant(1, 1, std::numeric_limits<Real>::quiet_NaN());
  AdamMoments moments;
  try {
    adamw_update(p, g, moments, 1, AdamWConfig{}, "layer3.gain");
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("layer3.gain") != std::string::npos);
  }
}

TEST_CASE("cosine schedule endpoints and midpoint") {
  CHECK(cosine_lr(0, 1000, 1e-3) == doctest::Approx(1e-3));
  CHECK(cosine_lr(1000, 1000, 1e-3) == doctest::Approx(0.0));
  CHECK(cosine_lr(500, 1000, 1e-3) == doctest::Approx(5e-4));
  CHECK(cosine_lr(2000, 1000, 1e-3) == doctest::Approx(0.0));  // clamped
}

TEST_CASE("latent init distribution and determinism") {
  Rng rng(11);
  Real sum = 0, sum2 = 0;
  const Index n = 1000000;
  VecX z = init_latent(rng, n);
  for (Index i = 0; i < n; ++i) {
    sum += z[i];
    sum2 += z[i] * z[i];
  }
  const Real mean = sum / Real(n);
  const Real std = std::sqrt(sum2 / Real(n) - mean * mean);
  CHECK(std == doctest::Approx(0.01).epsilon(0.02));

  Rng a(12), b(12), c(13);
  CHECK((init_latent(a, 16) - init_latent(b, 16)).norm() == 0.0);
  CHECK((init_latent(a, 16) - init_latent(c, 16)).norm() != 0.0);
}

TEST_CASE("initial effective weights equal the raw draw") {
  Rng rng(14);
  DecoderParams p = make_decoder(8, 16, 2);
  init_params(p, rng);
  for (const auto& layer : p.layers)
    CHECK((layer.effective_weight() - layer.direction).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("forward stays finite for inputs beyond the soft domain") {
  Rng rng(15);
  DecoderParams p = make_decoder(16, 32, 7);
  init_params(p, rng);
  VecX z = init_latent(rng, 16);
  z *= 1000.0;  // ||z|| up to 10
  MatX3 pts(64, 3);
  for (Index i = 0; i < 64; ++i)
    pts.row(i) << rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2);
  const MatX2 out = forward(p, pts, z);
  CHECK(out.allFinite());
}

TEST_CASE("width mismatch is an error") {
  Rng rng(16);
  DecoderParams p = make_decoder(8, 16, 2);
  init_params(p, rng);
  MatX3 pts = MatX3::Zero(2, 3);
  CHECK_THROWS_AS(forward(p, pts, VecX::Zero(9)), ConfigError);
  p.layers[1].direction.conservativeResize(16, 4);
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
