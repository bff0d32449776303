#include <doctest.h>

#include <cmath>

#include "nsdf/metrics.hpp"
#include "oracles.hpp"

using namespace nsdf;

namespace {

SdfGrid sphere_field(int resolution, Real radius) {
  SdfGrid g = make_normalized_grid(resolution);
  for (int k = 0; k < resolution; ++k)
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i)
        g.values[g.index(i, j, k)] = g.voxel_center(i, j, k).norm() - radius;
  return g;
}

SliceMask annulus(int side, Real r_in, Real r_out) {
  SliceMask m = make_mask(side, side, Vec2(1, 1));
  const Real c = (side - 1) / 2.0;
  for (int r = 0; r < side; ++r)
    for (int q = 0; q < side; ++q) {
      const Real d = std::hypot(r - c, q - c);
      m.set(r, q, d >= r_in && d <= r_out);
    }
  return m;
}

}  // namespace

TEST_CASE("slice of a half-space SDF is a half-plane mask") {
  SdfGrid g = make_normalized_grid(33);
  for (int k = 0; k < 33; ++k)
    for (int j = 0; j < 33; ++j)
      for (int i = 0; i < 33; ++i)
        g.values[g.index(i, j, k)] = g.voxel_center(i, j, k)[2];
  const SliceMask mask =
      slice_from_sdf(g, Vec3(-0.8, 0, -0.8), Vec3(1, 0, 0), Vec3(0, 0, 1),
                     Vec2(0.1, 0.1), Eigen::Vector2i(16, 16));
  for (int r = 0; r < 16; ++r) {
    const Real z = -0.8 + 0.1 * r;
    for (int c = 0; c < 16; ++c) CHECK(mask.at(r, c) == (z <= 0.0));
  }
}

TEST_CASE("diameter slice of a sphere is a disk of the right radius") {
  const SdfGrid g = sphere_field(65, 0.5);
  const Real px = 0.02;
  const SliceMask mask =
      slice_from_sdf(g, Vec3(-0.9, -0.9, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                     Vec2(px, px), Eigen::Vector2i(91, 91));
  // Area-equivalent radius within one pixel of 0.5.
  const Real area = Real(mask.count()) * px * px;
  const Real radius = std::sqrt(area / std::numbers::pi);
  CHECK(std::abs(radius - 0.5) < px);

  // A plane fully outside keeps the mask empty (sentinel is positive).
  const SliceMask outside =
      slice_from_sdf(g, Vec3(5, 5, 5), Vec3(1, 0, 0), Vec3(0, 1, 0),
                     Vec2(px, px), Eigen::Vector2i(8, 8));
  CHECK(outside.empty_mask());
}

TEST_CASE("fill_blood_pool: annulus yields the inner disk") {
  const SliceMask ring = annulus(41, 8.0, 14.0);
  bool warn = true;
  const SliceMask pool = fill_blood_pool(ring, &warn);
  CHECK(!warn);
  CHECK(pool.count() > 0);
  const Real c = 20.0;
  for (int r = 0; r < 41; ++r)
    for (int q = 0; q < 41; ++q) {
      if (pool.at(r, q)) {
        CHECK(std::hypot(r - c, q - c) < 8.0);
        CHECK(!ring.at(r, q));
      }
      if (std::hypot(r - c, q - c) < 7.0) CHECK(pool.at(r, q));
    }
}

TEST_CASE("fill_blood_pool: solid disk has no cavity") {
  const SliceMask disk = annulus(31, 0.0, 10.0);
  bool warn = false;
  const SliceMask pool = fill_blood_pool(disk, &warn);
  CHECK(pool.empty_mask());
  CHECK(warn);
}

TEST_CASE("fill_blood_pool: broken ring leaks to the border") {
  SliceMask ring = annulus(41, 8.0, 14.0);
  for (int q = 0; q < 41; ++q) ring.set(20, q, false);  // cut a channel
  bool warn = false;
  const SliceMask pool = fill_blood_pool(ring, &warn);
  CHECK(pool.empty_mask());
  CHECK(warn);
}

TEST_CASE("dice: identical, disjoint, convention, and brute force") {
  SliceMask a = annulus(21, 0, 6);
  CHECK(dice(a, a) == 1.0);

  SliceMask b = make_mask(21, 21, Vec2(1, 1));
  b.set(0, 0, true);
  CHECK(dice(a, b) == 0.0);

  const SliceMask empty1 = make_mask(4, 4, Vec2(1, 1));
  const SliceMask empty2 = make_mask(4, 4, Vec2(1, 1));
  CHECK(dice(empty1, empty2) == 1.0);

  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    SliceMask x = oracle::random_mask(rng, 8, 8);
    SliceMask y = oracle::random_mask(rng, 8, 8);
    y.px_spacing = x.px_spacing;
    CHECK(dice(x, y) == oracle::dice(x, y));
    CHECK(dice(x, y) == dice(y, x));  // symmetry
  }
}

TEST_CASE("surface distances: identical masks and two pixels") {
  const SliceMask a = annulus(21, 3, 8);
  const SurfaceDistances self = surface_distances(a, a);
  CHECK(self.hd == 0.0);
  CHECK(self.hd95 == 0.0);
  CHECK(self.assd == 0.0);

  SliceMask p1 = make_mask(8, 8, Vec2(2, 2));
  SliceMask p2 = make_mask(8, 8, Vec2(2, 2));
  p1.set(2, 1, true);
  p2.set(2, 4, true);  // 3 px apart at 2 mm/px
  const SurfaceDistances d = surface_distances(p1, p2);
  CHECK(d.hd == doctest::Approx(6.0));
  CHECK(d.hd95 == doctest::Approx(6.0));
  CHECK(d.assd == doctest::Approx(6.0));

  const SliceMask empty = make_mask(8, 8, Vec2(2, 2));
  CHECK_THROWS_AS(surface_distances(p1, empty), DataError);
}

TEST_CASE("surface distances match the all-pairs oracle exactly") {
  Rng rng(22);
  for (int t = 0; t < 100; ++t) {
    SliceMask a = oracle::random_mask(rng, 16, 16, 0.35);
    SliceMask b = oracle::random_mask(rng, 16, 16, 0.35);
    b.px_spacing = a.px_spacing;
    if (a.empty_mask() || b.empty_mask()) continue;
    const SurfaceDistances got = surface_distances(a, b);
    const SurfaceDistances want = oracle::mask_surface_distances(a, b);
    CHECK(got.hd == want.hd);
    CHECK(got.hd95 == want.hd95);
    CHECK(got.assd == want.assd);
    // Order statistics.
    CHECK(got.hd95 <= got.hd);
    CHECK(got.assd <= got.hd);
    // Symmetry by construction.
    const SurfaceDistances rev = surface_distances(b, a);
    CHECK(rev.hd == got.hd);
    CHECK(rev.hd95 == got.hd95);
    CHECK(rev.assd == got.assd);
  }
}

TEST_CASE("metrics are invariant to simultaneous mask translation") {
  Rng rng(23);
  SliceMask a = make_mask(20, 20, Vec2(1.3, 0.8));
  SliceMask b = make_mask(20, 20, Vec2(1.3, 0.8));
  for (int r = 4; r < 9; ++r)
    for (int c = 5; c < 11; ++c) a.set(r, c, true);
  for (int r = 5; r < 10; ++r)
    for (int c = 4; c < 9; ++c) b.set(r, c, true);
  const SurfaceDistances base = surface_distances(a, b);
  const Real base_dice = dice(a, b);

  SliceMask a2 = make_mask(20, 20, Vec2(1.3, 0.8));
  SliceMask b2 = make_mask(20, 20, Vec2(1.3, 0.8));
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) {
      if (r + 6 < 20 && c + 3 < 20) {
        a2.set(r + 6, c + 3, a.at(r, c));
        b2.set(r + 6, c + 3, b.at(r, c));
      }
    }
  const SurfaceDistances moved = surface_distances(a2, b2);
  CHECK(moved.hd == doctest::Approx(base.hd));
  CHECK(moved.hd95 == doctest::Approx(base.hd95));
  CHECK(moved.assd == doctest::Approx(base.assd));
  CHECK(dice(a2, b2) == doctest::Approx(base_dice));
}

TEST_CASE("mesh surface distances: self distance and concentric spheres") {
  TriangleMesh a = icosphere(3);
  a.vertices *= 10.0;
  Rng rng(24);
  const SurfaceDistances self = mesh_surface_distances(a, a, 2000, rng);
  CHECK(self.hd < 1e-9);
  CHECK(self.assd < 1e-9);

  TriangleMesh b = icosphere(3);
  b.vertices *= 11.0;
  Rng rng2(25);
  const SurfaceDistances d = mesh_surface_distances(a, b, 100000, rng2);
  CHECK(d.assd == doctest::Approx(1.0).epsilon(0.03));
  CHECK(d.hd >= d.hd95);
  CHECK(d.hd95 >= 0.0);
}

TEST_CASE("metric report sanity bounds") {
  MetricReport r;
  r.dsc = 0.5;
  r.hd_mm = 2.0;
  r.hd95_mm = 1.0;
  r.assd_mm = 0.5;
  r.validate();
  r.hd95_mm = 3.0;
  CHECK_THROWS_AS(r.validate(), DataError);
}

TEST_CASE("aggregate mean and standard deviation") {
  const MetricAggregate agg = aggregate({1.0, 2.0, 3.0, 4.0});
  CHECK(agg.mean == doctest::Approx(2.5));
  CHECK(agg.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(agg.n == 4);
}
