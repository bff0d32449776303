#include <doctest.h>

#include "nsdf/canonical.hpp"
#include "nsdf/mesh_query.hpp"
#include "oracles.hpp"

using namespace nsdf;

TEST_CASE("already-canonical landmarks give the identity frame") {
  Landmarks lm;
  lm.lv_cm = Vec3(0, 0, 0);
  lm.rv_cm = Vec3(-1, 0, 0);
  lm.la_cm = Vec3(0, 0, 1);
  const CanonicalFrame f = frame_from_landmarks(lm);
  CHECK((f.rotation - Mat3::Identity()).norm() < 1e-12);
  CHECK(f.translation.norm() < 1e-12);
}

TEST_CASE("quarter-turn landmark configuration") {
  Landmarks lm;
  lm.lv_cm = Vec3(0, 0, 0);
  lm.rv_cm = Vec3(0, -1, 0);
  lm.la_cm = Vec3(0, 0, 1);
  const CanonicalFrame f = frame_from_landmarks(lm);
  CHECK((f.rotation * Vec3(0, 1, 0) - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((f.rotation * Vec3(0, 0, 1) - Vec3(0, 0, 1)).norm() < 1e-12);
}

TEST_CASE("frame maps landmarks to the canonical configuration") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    Landmarks lm;
    lm.lv_cm = Vec3(rng.uniform(-50, 50), rng.uniform(-50, 50),
                    rng.uniform(-50, 50));
    lm.rv_cm = lm.lv_cm + Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()) * 30;
    lm.la_cm = lm.lv_cm + Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()) * 30;
    if ((lm.rv_cm - lm.lv_cm).norm() < 1.0 || (lm.la_cm - lm.lv_cm).norm() < 1.0)
      continue;
    CanonicalFrame f;
    try {
      f = frame_from_landmarks(lm);
    } catch (const DataError&) {
      continue;  // collinear draw
    }
    // Orthonormal, right-handed.
    CHECK((f.rotation * f.rotation.transpose() - Mat3::Identity()).norm() <
          1e-10);
    CHECK(f.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    // lv at origin, la on +z, rv in the y=0 half-plane with x<0.
    CHECK(f.apply(lm.lv_cm).norm() < 1e-9);
    const Vec3 la = f.apply(lm.la_cm);
    CHECK(std::abs(la[0]) < 1e-9);
    CHECK(std::abs(la[1]) < 1e-9);
    CHECK(la[2] > 0);
    const Vec3 rv = f.apply(lm.rv_cm);
    CHECK(std::abs(rv[1]) < 1e-9);
    CHECK(rv[0] < 0);
  }
}

TEST_CASE("collinear landmarks are rejected") {
  Landmarks lm;
  lm.lv_cm = Vec3(0, 0, 0);
  lm.rv_cm = Vec3(0, 0, -2);
  lm.la_cm = Vec3(0, 0, 1);
  CHECK_THROWS_AS(frame_from_landmarks(lm), DataError);
}

TEST_CASE("fit_scale arithmetic and enclosure") {
  MatX3 pts(3, 3);
  pts << 10, 0, 0, 0, -4, 0, 1, 1, 1;
  CHECK(fit_scale(pts) == doctest::Approx(0.08));

  MatX3 small(1, 3);
  small << 0.8, 0, 0;
  CHECK(fit_scale(small) == doctest::Approx(1.0));

  Rng rng(8);
  MatX3 cloud(500, 3);
  for (Index i = 0; i < cloud.rows(); ++i)
    cloud.row(i) << rng.uniform(-30, 30), rng.uniform(-30, 30),
        rng.uniform(-30, 30);
  const Real s = fit_scale(cloud);
  CHECK((s * cloud).rowwise().norm().maxCoeff() == doctest::Approx(0.8));
  CHECK(((s * cloud).array().abs() <= 0.8).all());

  MatX3 zeros = MatX3::Zero(2, 3);
  CHECK_THROWS_AS(fit_scale(zeros), DataError);
}

TEST_CASE("apply/invert round trip") {
  Rng rng(12);
  Landmarks lm;
  lm.lv_cm = Vec3(3, -2, 7);
  lm.rv_cm = Vec3(-40, 5, 0);
  lm.la_cm = Vec3(10, 12, 55);
  CanonicalFrame f = frame_from_landmarks(lm);
  f.scale = 0.08;
  CHECK(f.apply_distance(5.0) == doctest::Approx(0.4));
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p(rng.uniform(-100, 100), rng.uniform(-100, 100),
                 rng.uniform(-100, 100));
    CHECK((f.invert(f.apply(p)) - p).norm() < 1e-10);
  }
}

TEST_CASE("frame construction is equivariant under pre-rotation") {
  Rng rng(13);
  Landmarks lm;
  lm.lv_cm = Vec3(1, 2, 3);
  lm.rv_cm = Vec3(-30, 8, -2);
  lm.la_cm = Vec3(6, -4, 50);
  const CanonicalFrame f = frame_from_landmarks(lm);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 axis =
        Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()).normalized();
    const Mat3 q = Eigen::AngleAxisd(rng.uniform(0, 3), axis).toRotationMatrix();
    const Vec3 shift(rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-9, 9));
    Landmarks moved;
    moved.lv_cm = q * lm.lv_cm + shift;
    moved.rv_cm = q * lm.rv_cm + shift;
    moved.la_cm = q * lm.la_cm + shift;
    const CanonicalFrame g = frame_from_landmarks(moved);
    for (int i = 0; i < 50; ++i) {
      const Vec3 p(rng.uniform(-60, 60), rng.uniform(-60, 60),
                   rng.uniform(-60, 60));
      CHECK((g.apply(q * p + shift) - f.apply(p)).norm() < 1e-9 * (1 + p.norm()));
    }
  }
}

TEST_CASE("signed distances scale with the frame") {
  Rng rng(14);
  Landmarks lm;
  lm.lv_cm = Vec3(0.2, -0.1, 0.4);
  lm.rv_cm = Vec3(-2.5, 0.3, 0);
  lm.la_cm = Vec3(0.1, 0.5, 3.0);
  CanonicalFrame f = frame_from_landmarks(lm);
  f.scale = 0.37;
  for (int m = 0; m < 4; ++m) {
    const TriangleMesh mesh = oracle::random_star_mesh(rng);
    const TriangleMesh moved = apply_frame(f, mesh);
    const MeshQuery q_orig(mesh), q_moved(moved);
    for (int i = 0; i < 100; ++i) {
      const Vec3 p(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
      const Real want = f.scale * q_orig.signed_distance(p);
      const Real got = q_moved.signed_distance(f.apply(p));
      CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("label-grid centroids are volume weighted") {
  LabelGrid grid;
  grid.dims = Vec3i(3, 1, 1);
  grid.spacing = Vec3(2, 1, 1);
  grid.origin = Vec3(10, 0, 0);
  grid.labels = {uint8_t(Label::LVBP), uint8_t(Label::LVBP),
                 uint8_t(Label::RV)};
  CHECK((label_centroid(grid, Label::LVBP) - Vec3(11, 0, 0)).norm() < 1e-12);
  CHECK((label_centroid(grid, Label::RV) - Vec3(14, 0, 0)).norm() < 1e-12);
  CHECK_THROWS_AS(label_centroid(grid, Label::MYO), DataError);
}
