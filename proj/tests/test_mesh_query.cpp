#include <doctest.h>

#include "nsdf/mesh_query.hpp"
#include "oracles.hpp"

using namespace nsdf;

namespace {

TriangleMesh single_triangle() {
  TriangleMesh mesh;
  mesh.vertices.resize(3, 3);
  mesh.vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  mesh.triangles.resize(1, 3);
  mesh.triangles << 0, 1, 2;
  return mesh;
}

}  // namespace

TEST_CASE("point-triangle distance: perpendicular foot inside the triangle") {
  const TriangleMesh mesh = single_triangle();
  CHECK(unsigned_distance_to_mesh(Vec3(0, 0, 1), mesh) == doctest::Approx(1.0));
  // Open surface: winding < 0.5 everywhere off-plane, so the sign is +.
  CHECK(signed_distance_to_mesh(Vec3(0, 0, 1), mesh) == doctest::Approx(1.0));
}

TEST_CASE("point-triangle distance: point on the surface") {
  const TriangleMesh mesh = single_triangle();
  CHECK(unsigned_distance_to_mesh(Vec3(0.25, 0.25, 0), mesh) ==
        doctest::Approx(0.0));
}

TEST_CASE("signed distance inside an icosphere") {
  TriangleMesh sphere = icosphere(3);
  sphere.vertices *= 2.0;  // radius 2
  const MeshQuery query(sphere);
  const Real d = query.signed_distance(Vec3::Zero());
  CHECK(d < 0.0);
  CHECK(d >= -2.0);
  CHECK(d == doctest::Approx(-2.0).epsilon(0.01));  // within the chord sagitta
  // Cross-check against the brute-force loop.
  CHECK(std::abs(d) ==
        doctest::Approx(oracle::distance_to_mesh(Vec3::Zero(), sphere))
            .epsilon(1e-12));
}

TEST_CASE("empty mesh is an error") {
  TriangleMesh empty;
  CHECK_THROWS_AS(signed_distance_to_mesh(Vec3::Zero(), empty), DataError);
}

TEST_CASE("signed distance matches brute force on random star meshes") {
  Rng rng(20240811);
  for (int m = 0; m < 12; ++m) {
    const TriangleMesh mesh = oracle::random_star_mesh(rng);
    const MeshQuery query(mesh);
    for (int i = 0; i < 400; ++i) {
      const Vec3 p(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
      const Real got = query.signed_distance(p);
      const Real want = oracle::signed_distance_to_mesh(p, mesh);
      CHECK(std::abs(got) ==
            doctest::Approx(std::abs(want)).epsilon(1e-9));
      CHECK(got * want >= 0.0);  // sign agreement
    }
  }
}

TEST_CASE("hierarchical winding number equals the direct triangle sum") {
  Rng rng(77);
  for (int m = 0; m < 6; ++m) {
    const TriangleMesh mesh = oracle::random_star_mesh(rng, 2);
    const MeshQuery query(mesh);
    for (int i = 0; i < 200; ++i) {
      const Vec3 p(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4));
      CHECK(query.winding_number(p) ==
            doctest::Approx(oracle::winding_number(p, mesh)).epsilon(1e-9));
    }
  }
}

TEST_CASE("winding number on an open patch stays fractional") {
  // A soup (non-watertight) still gets a well-defined generalized winding
  // number; far from the patch it tends to zero.
  const TriangleMesh tri = single_triangle();
  const MeshQuery query(tri);
  CHECK(query.winding_number(Vec3(0.3, 0.3, 0.05)) ==
        doctest::Approx(oracle::winding_number(Vec3(0.3, 0.3, 0.05), tri))
            .epsilon(1e-12));
  CHECK(std::abs(query.winding_number(Vec3(0, 0, 50))) < 1e-4);
}
