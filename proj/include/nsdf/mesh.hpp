#pragma once

#include <vector>

#include "nsdf/types.hpp"

namespace nsdf {

// Indexed triangle surface. Vertices are in mm in world space, or
// dimensionless inside the normalized [-1,1]^3 domain.
struct TriangleMesh {
  MatX3 vertices;
  MatX3i triangles;
  StructureId structure = StructureId::MYO;

  Index num_vertices() const { return vertices.rows(); }
  Index num_triangles() const { return triangles.rows(); }
  bool empty() const { return triangles.rows() == 0; }
};

struct MeshValidity {
  bool indices_in_range = true;
  bool watertight = true;          // every edge shared by exactly two triangles
  bool consistently_oriented = true;  // the two sharings run in opposite directions
  bool non_degenerate = true;      // all triangle areas > 1e-12
  Index boundary_edges = 0;
  Index degenerate_triangles = 0;

  bool ok() const {
    return indices_in_range && watertight && consistently_oriented &&
           non_degenerate;
  }
};

MeshValidity validate_mesh(const TriangleMesh& mesh);

// Triangle areas, total surface area, area-weighted surface centroid.
VecX triangle_areas(const TriangleMesh& mesh);
Real surface_area(const TriangleMesh& mesh);
Vec3 area_weighted_centroid(const TriangleMesh& mesh);

// Enclosed volume by the divergence theorem (signed tetrahedra to the
// origin), returned as |V| in mL for mm input (1 mm^3 = 1e-3 mL).
// Throws DataError when the mesh is not watertight.
Real mesh_volume_ml(const TriangleMesh& mesh);

// Signed enclosed volume in the input unit^3, no validity requirements.
Real signed_volume(const TriangleMesh& mesh);

// Axis-aligned bounds of the vertex set.
void mesh_bounds(const TriangleMesh& mesh, Vec3& lo, Vec3& hi);

// Splits into edge-connected components (vertex sets are not shared between
// components in the output).
std::vector<TriangleMesh> connected_components(const TriangleMesh& mesh);

// Merges meshes into one (concatenated vertex blocks, offset indices).
TriangleMesh merge_meshes(const std::vector<TriangleMesh>& parts);

TriangleMesh flip_orientation(const TriangleMesh& mesh);

// Subdivided icosahedron with vertices on the unit sphere.
TriangleMesh icosphere(int subdivisions);

}  // namespace nsdf
