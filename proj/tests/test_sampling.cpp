#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nsdf/distance_transform.hpp"
#include "nsdf/sampling.hpp"
#include "oracles.hpp"

using namespace nsdf;

namespace {

std::pair<TriangleMesh, TriangleMesh> sphere_pair() {
  TriangleMesh myo = icosphere(2);
  myo.vertices *= 0.5;
  myo.structure = StructureId::MYO;
  TriangleMesh rv = icosphere(2);
  rv.vertices *= 0.3;
  rv.vertices.rowwise() += Eigen::RowVector3d(-0.9, 0, 0);
  rv.structure = StructureId::RV;
  return {myo, rv};
}

}  // namespace

TEST_CASE("default config yields 4096 rows with the documented layout") {
  auto [myo, rv] = sphere_pair();
  SamplingConfig cfg;
  Rng rng(1);
  const SampleSet set = sample_training(myo, rv, cfg, rng);
  CHECK(set.size() == 4096);
  CHECK(set.rows_with_tag(SampleTag::ON_MYO).size() == 1024);
  CHECK(set.rows_with_tag(SampleTag::ON_RV).size() == 1024);
  CHECK(set.rows_with_tag(SampleTag::OFF).size() == 2048);
  validate_sample_set(set, /*mesh_derived=*/true);
}

TEST_CASE("sampling is reproducible bit-for-bit from the seed") {
  auto [myo, rv] = sphere_pair();
  SamplingConfig cfg;
  cfg.n_on_per_structure = 64;
  cfg.n_off_per_structure = 64;
  Rng r1(77), r2(77), r3(78);
  const SampleSet a = sample_training(myo, rv, cfg, r1);
  const SampleSet b = sample_training(myo, rv, cfg, r2);
  const SampleSet c = sample_training(myo, rv, cfg, r3);
  CHECK((a.coords - b.coords).norm() == 0.0);
  CHECK((a.sdf - b.sdf).norm() == 0.0);
  CHECK((a.coords - c.coords).norm() != 0.0);
}

TEST_CASE("sigma -> 0 keeps off-surface rows on their own surface") {
  auto [myo, rv] = sphere_pair();
  SamplingConfig cfg;
  cfg.n_on_per_structure = 32;
  cfg.n_off_per_structure = 32;
  cfg.noise_sigma = 1e-12;
  Rng rng(5);
  const SampleSet set = sample_training(myo, rv, cfg, rng);
  for (Index i = 0; i < 64; ++i) CHECK(std::abs(set.sdf(i, 0)) < 1e-9);
  for (Index i = 64; i < 128; ++i) CHECK(std::abs(set.sdf(i, 1)) < 1e-9);
}

TEST_CASE("reference distances match the brute-force oracle") {
  auto [myo, rv] = sphere_pair();
  SamplingConfig cfg;
  cfg.n_on_per_structure = 16;
  cfg.n_off_per_structure = 48;
  Rng rng(9);
  const SampleSet set = sample_training(myo, rv, cfg, rng);
  for (Index i = 0; i < set.size(); ++i) {
    const Vec3 p = set.coords.row(i);
    const SampleTag tag = set.tags[static_cast<size_t>(i)];
    if (tag != SampleTag::ON_MYO)
      CHECK(set.sdf(i, 0) ==
            doctest::Approx(oracle::signed_distance_to_mesh(p, myo))
                .epsilon(1e-9));
    if (tag != SampleTag::ON_RV)
      CHECK(set.sdf(i, 1) ==
            doctest::Approx(oracle::signed_distance_to_mesh(p, rv))
                .epsilon(1e-9));
  }
}

TEST_CASE("area-uniform sphere sampling has uniform z (KS test)") {
  TriangleMesh sphere = icosphere(4);
  Rng rng(123);
  const Index n = 100000;
  const MatX3 pts = sample_on_surface(sphere, n, rng);
  std::vector<Real> zs(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) zs[static_cast<size_t>(i)] = pts(i, 2);
  std::sort(zs.begin(), zs.end());
  // Uniform on [-1, 1] up to the icosphere's faceting.
  Real ks = 0;
  for (Index i = 0; i < n; ++i) {
    const Real cdf = (zs[static_cast<size_t>(i)] + 1.0) / 2.0;
    const Real emp_hi = Real(i + 1) / Real(n);
    const Real emp_lo = Real(i) / Real(n);
    ks = std::max({ks, std::abs(cdf - emp_hi), std::abs(cdf - emp_lo)});
  }
  CHECK(ks < 0.02);
}

TEST_CASE("off-surface offsets have the configured spread") {
  auto [myo, rv] = sphere_pair();
  SamplingConfig cfg;
  cfg.n_on_per_structure = 50000;
  cfg.n_off_per_structure = 50000;
  cfg.noise_sigma = 0.33;
  Rng rng(17);
  const SampleSet set = sample_training(myo, rv, cfg, rng);
  // Parents are the on-surface rows in order.
  Real sum2 = 0;
  Index count = 0;
  for (int s = 0; s < 2; ++s) {
    const Index base = Index(s) * 100000;
    for (Index i = 0; i < 50000; ++i) {
      const Vec3 delta =
          set.coords.row(base + 50000 + i) - set.coords.row(base + i);
      sum2 += delta.squaredNorm();
      count += 3;
    }
  }
  CHECK(std::sqrt(sum2 / Real(count)) == doctest::Approx(0.33).epsilon(0.02));
}

TEST_CASE("grid test sampling: band membership and EDT values") {
  // One-voxel-thick MYO shell in a box, plus an RV block, strongly
  // anisotropic spacing.
  LabelGrid grid;
  grid.dims = Vec3i(12, 12, 6);
  grid.spacing = Vec3(1, 1, 8);
  grid.labels.assign(static_cast<size_t>(grid.size()),
                     uint8_t(Label::BACKGROUND));
  for (int k = 1; k < 5; ++k)
    for (int j = 2; j < 7; ++j)
      for (int i = 2; i < 7; ++i) {
        const bool rim = i == 2 || i == 6 || j == 2 || j == 6 || k == 1 || k == 4;
        if (rim)
          grid.labels[static_cast<size_t>(grid.index(i, j, k))] =
              uint8_t(Label::MYO);
      }
  for (int k = 2; k < 4; ++k)
    for (int j = 8; j < 11; ++j)
      for (int i = 8; i < 11; ++i)
        grid.labels[static_cast<size_t>(grid.index(i, j, k))] =
            uint8_t(Label::RV);

  SamplingConfig cfg;
  cfg.test_band_factor = 2.0;
  CanonicalFrame frame;
  frame.scale = 0.02;  // keep distances inside the normalized-domain bound
  const SampleSet set = sample_test_from_grid(grid, cfg, frame);
  validate_sample_set(set, /*mesh_derived=*/false);

  const SdfGrid edt_myo = oracle::distance_transform(grid, StructureId::MYO);
  const SdfGrid edt_rv = oracle::distance_transform(grid, StructureId::RV);
  const Real band = 2.0 * std::hypot(1.0, 1.0);

  // Band voxels in scan order must match the returned rows one-to-one, with
  // EDT values mapped through the frame.
  std::vector<Index> band_voxels;
  for (Index v = 0; v < grid.size(); ++v) {
    if (std::abs(edt_myo.values[v]) <= band ||
        std::abs(edt_rv.values[v]) <= band)
      band_voxels.push_back(v);
  }
  REQUIRE(set.size() == Index(band_voxels.size()));
  for (Index r = 0; r < set.size(); ++r) {
    const Index v = band_voxels[static_cast<size_t>(r)];
    CHECK(set.sdf(r, 0) == frame.scale * edt_myo.values[v]);
    CHECK(set.sdf(r, 1) == frame.scale * edt_rv.values[v]);
    const int i = int(v % grid.dims[0]);
    const int j = int((v / grid.dims[0]) % grid.dims[1]);
    const int k = int(v / (Index(grid.dims[0]) * grid.dims[1]));
    CHECK((set.coords.row(r).transpose() -
           frame.apply(grid.voxel_center(i, j, k)))
              .norm() == 0.0);
  }
}

TEST_CASE("zero band factor keeps only boundary-adjacent voxels") {
  LabelGrid grid;
  grid.dims = Vec3i(9, 3, 3);
  grid.spacing = Vec3(1, 1, 1);
  grid.labels.assign(81, uint8_t(Label::BACKGROUND));
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 3; i < 6; ++i)
        grid.labels[static_cast<size_t>(grid.index(i, j, k))] =
            uint8_t(Label::MYO);
  // Make an RV voxel so both EDTs exist.
  grid.labels[static_cast<size_t>(grid.index(8, 2, 2))] = uint8_t(Label::RV);

  SamplingConfig cfg;
  cfg.test_band_factor = 0.0;
  CanonicalFrame frame;
  const SampleSet set = sample_test_from_grid(grid, cfg, frame);
  const SdfGrid edt_myo = distance_transform(grid, StructureId::MYO);
  const SdfGrid edt_rv = distance_transform(grid, StructureId::RV);
  for (Index r = 0; r < set.size(); ++r) {
    const Vec3 p = set.coords.row(r);
    const int i = int(std::lround(p[0])), j = int(std::lround(p[1])),
              k = int(std::lround(p[2]));
    const Index v = grid.index(i, j, k);
    CHECK((std::abs(edt_myo.values[v]) <= 1.0 + 1e-12 ||
           std::abs(edt_rv.values[v]) <= 1.0 + 1e-12));
  }
}

TEST_CASE("frame mapping applies to coordinates and distances") {
  LabelGrid grid;
  grid.dims = Vec3i(4, 4, 4);
  grid.spacing = Vec3(2, 2, 2);
  grid.labels.assign(64, uint8_t(Label::BACKGROUND));
  grid.labels[static_cast<size_t>(grid.index(1, 1, 1))] = uint8_t(Label::MYO);
  grid.labels[static_cast<size_t>(grid.index(2, 2, 2))] = uint8_t(Label::RV);
  CanonicalFrame frame;
  frame.scale = 0.1;
  SamplingConfig cfg;
  const SampleSet scaled = sample_test_from_grid(grid, cfg, frame);
  CanonicalFrame identity;
  const SampleSet plain = sample_test_from_grid(grid, cfg, identity);
  REQUIRE(scaled.size() == plain.size());
  CHECK((scaled.sdf - 0.1 * plain.sdf).cwiseAbs().maxCoeff() == 0.0);
  CHECK((scaled.coords - 0.1 * plain.coords).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("iso subsampling picks k on-surface rows per structure") {
  auto [myo, rv] = sphere_pair();
  SamplingConfig cfg;
  Rng rng(3);
  const SampleSet set = sample_training(myo, rv, cfg, rng);
  const SampleSet sub = subsample_iso(set, 500, rng);
  CHECK(sub.size() == 1000);
  CHECK(sub.rows_with_tag(SampleTag::ON_MYO).size() == 500);
  CHECK(sub.rows_with_tag(SampleTag::ON_RV).size() == 500);

  // Full count -> a permutation of the on-surface rows.
  const SampleSet all = subsample_iso(set, 1024, rng);
  CHECK(all.size() == 2048);
  CHECK_THROWS_AS(subsample_iso(set, 1025, rng), DataError);

  // Distinct seeds differ, same marginal counts.
  Rng ra(100), rb(101);
  const SampleSet sa = subsample_iso(set, 100, ra);
  const SampleSet sb = subsample_iso(set, 100, rb);
  CHECK((sa.coords - sb.coords).norm() != 0.0);
}

TEST_CASE("SAX-like subsampling clusters into slabs") {
  auto [myo, rv] = sphere_pair();
  SamplingConfig cfg;
  cfg.n_on_per_structure = 4096;
  cfg.n_off_per_structure = 1;
  Rng rng(41);
  const SampleSet set = sample_training(myo, rv, cfg, rng);

  const Real spacing = 0.16, tol = 0.01;
  bool with_replacement = false;
  const SampleSet sax =
      subsample_sax_like(set, 200, spacing, tol, rng, &with_replacement);
  CHECK(sax.size() == 400);

  // All kept points near some plane; the distinct slab count is bounded by
  // the z extent of the shape.
  std::set<long> slabs;
  Real z_min = 1e9, z_max = -1e9;
  for (const Index r : set.rows_with_tag(SampleTag::ON_MYO)) {
    z_min = std::min(z_min, set.coords(r, 2));
    z_max = std::max(z_max, set.coords(r, 2));
  }
  for (const Index r : set.rows_with_tag(SampleTag::ON_RV)) {
    z_min = std::min(z_min, set.coords(r, 2));
    z_max = std::max(z_max, set.coords(r, 2));
  }
  const Real center = 0.5 * (z_min + z_max);
  for (Index i = 0; i < sax.size(); ++i) {
    const Real offset = (sax.coords(i, 2) - center) / spacing;
    const Real nearest = std::round(offset);
    CHECK(std::abs(sax.coords(i, 2) - (center + nearest * spacing)) <=
          tol + 1e-12);
    slabs.insert(long(nearest));
  }
  CHECK(Real(slabs.size()) <= std::ceil((z_max - z_min) / spacing) + 1);

  // Huge tolerance behaves like iso subsampling (no slab restriction).
  Rng r2(7);
  const SampleSet loose = subsample_sax_like(set, 200, spacing, 10.0, r2);
  CHECK(loose.size() == 400);

  // A single plane through the equator when the spacing exceeds the extent.
  Rng r3(8);
  bool repl = false;
  const SampleSet one_plane =
      subsample_sax_like(set, 10, 50.0, 0.05, r3, &repl);
  for (Index i = 0; i < one_plane.size(); ++i)
    CHECK(std::abs(one_plane.coords(i, 2) - center) <= 0.05 + 1e-12);
}

TEST_CASE("sax plus lax concatenation") {
  auto [myo, rv] = sphere_pair();
  SamplingConfig cfg;
  Rng rng(55);
  const SampleSet set = sample_training(myo, rv, cfg, rng);
  const SampleSet lax = lax_slice(set, 0.05);
  REQUIRE(lax.size() > 0);
  for (Index i = 0; i < lax.size(); ++i)
    CHECK(std::abs(lax.coords(i, 1)) <= 0.05);

  const SampleSet combined = subsample_sax_plus_lax(set, lax, 500, rng);
  CHECK(combined.size() == 1000 + lax.size());

  SampleSet empty_lax;
  empty_lax.coords.resize(0, 3);
  empty_lax.sdf.resize(0, 2);
  const SampleSet just_sax = subsample_sax_plus_lax(set, empty_lax, 500, rng);
  CHECK(just_sax.size() == 1000);
}
