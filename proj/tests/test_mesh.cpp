#include <doctest.h>

#include <numbers>

#include "nsdf/mesh.hpp"
#include "oracles.hpp"

using namespace nsdf;

namespace {

TriangleMesh unit_cube() {
  TriangleMesh m;
  m.vertices.resize(8, 3);
  m.vertices << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0,
      0, 0, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1;
  m.triangles.resize(12, 3);
  m.triangles << 0, 2, 1, 0, 3, 2,  // bottom (z=0, normal -z)
      4, 5, 6, 4, 6, 7,             // top
      0, 1, 5, 0, 5, 4,             // front
      1, 2, 6, 1, 6, 5,             // right
      2, 3, 7, 2, 7, 6,             // back
      3, 0, 4, 3, 4, 7;             // left
  return m;
}

}  // namespace

TEST_CASE("unit cube volume is 0.001 mL") {
  const TriangleMesh cube = unit_cube();
  const MeshValidity v = validate_mesh(cube);
  CHECK(v.ok());
  CHECK(mesh_volume_ml(cube) == doctest::Approx(0.001));
}

TEST_CASE("flipped orientation keeps the absolute volume") {
  const TriangleMesh cube = unit_cube();
  const TriangleMesh flipped = flip_orientation(cube);
  CHECK(signed_volume(flipped) == doctest::Approx(-signed_volume(cube)));
  CHECK(mesh_volume_ml(flipped) == doctest::Approx(mesh_volume_ml(cube)));
}

TEST_CASE("icosphere volume approaches the analytic ball") {
  TriangleMesh sphere = icosphere(4);
  sphere.vertices *= 10.0;  // radius 10 mm
  const Real analytic_ml = 4.0 / 3.0 * std::numbers::pi * 1000.0 / 1000.0;
  CHECK(mesh_volume_ml(sphere) == doctest::Approx(analytic_ml).epsilon(0.01));
  CHECK(mesh_volume_ml(sphere) < analytic_ml);  // inscribed discretization
}

TEST_CASE("non-watertight meshes are flagged and rejected for volume") {
  TriangleMesh open = unit_cube();
  open.triangles.conservativeResize(11, 3);  // drop one face
  const MeshValidity v = validate_mesh(open);
  CHECK(!v.watertight);
  CHECK(v.boundary_edges > 0);
  CHECK_THROWS_AS(mesh_volume_ml(open), DataError);
}

TEST_CASE("degenerate triangles are reported") {
  TriangleMesh m = unit_cube();
  m.triangles.row(0) << 0, 1, 1;
  const MeshValidity v = validate_mesh(m);
  CHECK(!v.non_degenerate);
}

TEST_CASE("connected components split a two-shell mesh") {
  TriangleMesh outer = icosphere(1);
  TriangleMesh inner = icosphere(1);
  inner.vertices *= 0.5;
  const TriangleMesh merged = merge_meshes({outer, flip_orientation(inner)});
  const auto parts = connected_components(merged);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].num_triangles() == outer.num_triangles());
  // Shell volume = outer - inner for the merged orientation.
  CHECK(signed_volume(merged) ==
        doctest::Approx(signed_volume(outer) - signed_volume(inner)));
}

TEST_CASE("area-weighted centroid of a shifted sphere") {
  TriangleMesh sphere = icosphere(2);
  sphere.vertices.rowwise() += Eigen::RowVector3d(3, -1, 2);
  CHECK((area_weighted_centroid(sphere) - Vec3(3, -1, 2)).norm() < 1e-9);
}
