#include "nsdf/marching_cubes.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

namespace nsdf {

namespace {

// Corner offsets in the table's cube layout.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// Cube edge -> (corner, corner).
constexpr int kEdgeEnds[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0},
                                  {4, 5}, {5, 6}, {6, 7}, {7, 4},
                                  {0, 4}, {1, 5}, {2, 6}, {3, 7}};
// Cube edge -> (lattice offset of the lower endpoint, axis).
constexpr int kEdgeGlobal[12][4] = {
    {0, 0, 0, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 0, 1},
    {0, 0, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 1, 1},
    {0, 0, 0, 2}, {1, 0, 0, 2}, {1, 1, 0, 2}, {0, 1, 0, 2}};

}  // namespace

TriangleMesh marching_cubes(const SdfGrid& sdf, Real iso) {
  sdf.validate();
  if (!sdf.values.allFinite())
    throw DataError("marching_cubes: field contains non-finite samples");

  const int nx = sdf.dims[0], ny = sdf.dims[1], nz = sdf.dims[2];
  TriangleMesh mesh;
  if (nx < 2 || ny < 2 || nz < 2) return mesh;

  std::vector<Vec3> verts;
  std::vector<Eigen::Vector3i> tris;
  std::unordered_map<uint64_t, int> edge_vertex;
  edge_vertex.reserve(1 << 16);

  auto edge_key = [nx, ny](int i, int j, int k, int axis) {
    return (uint64_t(size_t(i) + size_t(nx) * (size_t(j) + size_t(ny) * k))
            << 2) |
           uint64_t(axis);
  };

  Real corner_val[8];
  int edge_vert_id[12];

  for (int k = 0; k + 1 < nz; ++k) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          corner_val[c] =
              sdf.at(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          if (corner_val[c] < iso) cube |= 1 << c;
        }
        const int edges = mc_tables::kEdgeTable[cube];
        if (edges == 0) continue;

        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          const int gi = i + kEdgeGlobal[e][0];
          const int gj = j + kEdgeGlobal[e][1];
          const int gk = k + kEdgeGlobal[e][2];
          const int axis = kEdgeGlobal[e][3];
          auto [it, inserted] =
              edge_vertex.emplace(edge_key(gi, gj, gk, axis), int(verts.size()));
          if (inserted) {
            const int a = kEdgeEnds[e][0], b = kEdgeEnds[e][1];
            const Real va = corner_val[a], vb = corner_val[b];
            // Interpolate from the lower lattice endpoint so the position is
            // identical from every adjacent cell.
            const bool a_is_lower = kCorner[a][axis] < kCorner[b][axis];
            const Real v_lo = a_is_lower ? va : vb;
            const Real v_hi = a_is_lower ? vb : va;
            Real t = (iso - v_lo) / (v_hi - v_lo);
            t = std::clamp(t, Real(0), Real(1));
            Vec3 p = sdf.voxel_center(gi, gj, gk);
            p[axis] += t * sdf.spacing[axis];
            verts.push_back(p);
          }
          edge_vert_id[e] = it->second;
        }

        const int* row = mc_tables::kTriTable[cube];
        for (int t = 0; row[t] != -1; t += 3) {
          const int a = edge_vert_id[row[t]];
          const int b = edge_vert_id[row[t + 1]];
          const int c = edge_vert_id[row[t + 2]];
          if (a == b || b == c || c == a) continue;  // collapsed sliver
          // Table order gives inward-facing triangles for negative-inside
          // fields; emit reversed for outward normals.
          tris.push_back({a, c, b});
        }
      }
    }
  }

  mesh.vertices.resize(Index(verts.size()), 3);
  for (size_t v = 0; v < verts.size(); ++v)
    mesh.vertices.row(Index(v)) = verts[v].transpose();
  mesh.triangles.resize(Index(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t)
    mesh.triangles.row(Index(t)) = tris[t].transpose();
  return mesh;
}

}  // namespace nsdf
