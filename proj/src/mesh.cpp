#include "nsdf/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <unordered_map>
#include <utility>

namespace nsdf {

namespace {

inline uint64_t edge_key(int a, int b) {
  return (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
}

}  // namespace

MeshValidity validate_mesh(const TriangleMesh& mesh) {
  MeshValidity v;
  const Index nv = mesh.num_vertices();
  std::unordered_map<uint64_t, int> undirected;  // min,max -> count
  std::unordered_map<uint64_t, int> directed;
  undirected.reserve(static_cast<size_t>(mesh.num_triangles()) * 3);
  directed.reserve(static_cast<size_t>(mesh.num_triangles()) * 3);

  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles.row(t);
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      if (a < 0 || b < 0 || a >= nv || b >= nv) {
        v.indices_in_range = false;
        continue;
      }
      ++undirected[edge_key(std::min(a, b), std::max(a, b))];
      ++directed[edge_key(a, b)];
    }
    if (v.indices_in_range) {
      const Vec3 p0 = mesh.vertices.row(tri[0]);
      const Vec3 p1 = mesh.vertices.row(tri[1]);
      const Vec3 p2 = mesh.vertices.row(tri[2]);
      const Real area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
      if (!(area > 1e-12)) {
        v.non_degenerate = false;
        ++v.degenerate_triangles;
      }
    }
  }

  for (const auto& [key, count] : undirected) {
    if (count != 2) {
      v.watertight = false;
      if (count == 1) ++v.boundary_edges;
    }
  }
  // A consistently oriented closed surface uses each directed edge once.
  for (const auto& [key, count] : directed) {
    if (count != 1) v.consistently_oriented = false;
  }
  if (!v.watertight) v.consistently_oriented = false;
  return v;
}

VecX triangle_areas(const TriangleMesh& mesh) {
  VecX areas(mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles.row(t);
    const Vec3 p0 = mesh.vertices.row(tri[0]);
    const Vec3 p1 = mesh.vertices.row(tri[1]);
    const Vec3 p2 = mesh.vertices.row(tri[2]);
    areas[t] = 0.5 * (p1 - p0).cross(p2 - p0).norm();
  }
  return areas;
}

Real surface_area(const TriangleMesh& mesh) {
  return triangle_areas(mesh).sum();
}

Vec3 area_weighted_centroid(const TriangleMesh& mesh) {
  if (mesh.empty()) throw DataError("area_weighted_centroid: empty mesh");
  Vec3 acc = Vec3::Zero();
  Real total = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles.row(t);
    const Vec3 p0 = mesh.vertices.row(tri[0]);
    const Vec3 p1 = mesh.vertices.row(tri[1]);
    const Vec3 p2 = mesh.vertices.row(tri[2]);
    const Real area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    acc += area * (p0 + p1 + p2) / 3.0;
    total += area;
  }
  if (total <= 0.0) throw DataError("area_weighted_centroid: zero-area mesh");
  return acc / total;
}

Real signed_volume(const TriangleMesh& mesh) {
  Real vol6 = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto tri = mesh.triangles.row(t);
    const Vec3 p0 = mesh.vertices.row(tri[0]);
    const Vec3 p1 = mesh.vertices.row(tri[1]);
    const Vec3 p2 = mesh.vertices.row(tri[2]);
    vol6 += p0.dot(p1.cross(p2));
  }
  return vol6 / 6.0;
}

Real mesh_volume_ml(const TriangleMesh& mesh) {
  if (mesh.empty()) throw DataError("mesh_volume: empty mesh");
  const MeshValidity v = validate_mesh(mesh);
  if (!v.watertight || !v.indices_in_range)
    throw DataError("mesh_volume: mesh is not watertight");
  return std::abs(signed_volume(mesh)) * 1e-3;
}

void mesh_bounds(const TriangleMesh& mesh, Vec3& lo, Vec3& hi) {
  if (mesh.vertices.rows() == 0) throw DataError("mesh_bounds: empty mesh");
  lo = mesh.vertices.colwise().minCoeff().transpose();
  hi = mesh.vertices.colwise().maxCoeff().transpose();
}

std::vector<TriangleMesh> connected_components(const TriangleMesh& mesh) {
  const Index nt = mesh.num_triangles();
  // Union-find over triangles joined by shared undirected edges.
  std::vector<Index> parent(static_cast<size_t>(nt));
  for (Index i = 0; i < nt; ++i) parent[static_cast<size_t>(i)] = i;
  std::function<Index(Index)> find = [&](Index x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] =
          parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  auto unite = [&](Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  };

  std::unordered_map<uint64_t, Index> first_seen;
  first_seen.reserve(static_cast<size_t>(nt) * 3);
  for (Index t = 0; t < nt; ++t) {
    const auto tri = mesh.triangles.row(t);
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      const uint64_t key = edge_key(std::min(a, b), std::max(a, b));
      auto [it, inserted] = first_seen.emplace(key, t);
      if (!inserted) unite(it->second, t);
    }
  }

  std::map<Index, std::vector<Index>> groups;  // ordered by representative
  for (Index t = 0; t < nt; ++t) groups[find(t)].push_back(t);

  std::vector<TriangleMesh> out;
  out.reserve(groups.size());
  for (const auto& [rep, tris] : groups) {
    TriangleMesh part;
    part.structure = mesh.structure;
    std::unordered_map<int, int> remap;
    remap.reserve(tris.size() * 3);
    std::vector<int> verts;
    part.triangles.resize(static_cast<Index>(tris.size()), 3);
    for (size_t i = 0; i < tris.size(); ++i) {
      const auto tri = mesh.triangles.row(tris[i]);
      for (int e = 0; e < 3; ++e) {
        auto [it, inserted] = remap.emplace(tri[e], int(verts.size()));
        if (inserted) verts.push_back(tri[e]);
        part.triangles(static_cast<Index>(i), e) = it->second;
      }
    }
    part.vertices.resize(static_cast<Index>(verts.size()), 3);
    for (size_t i = 0; i < verts.size(); ++i)
      part.vertices.row(static_cast<Index>(i)) = mesh.vertices.row(verts[i]);
    out.push_back(std::move(part));
  }
  return out;
}

TriangleMesh merge_meshes(const std::vector<TriangleMesh>& parts) {
  TriangleMesh out;
  Index nv = 0, nt = 0;
  for (const auto& p : parts) {
    nv += p.num_vertices();
    nt += p.num_triangles();
  }
  out.vertices.resize(nv, 3);
  out.triangles.resize(nt, 3);
  Index vo = 0, to = 0;
  for (const auto& p : parts) {
    out.vertices.middleRows(vo, p.num_vertices()) = p.vertices;
    out.triangles.middleRows(to, p.num_triangles()) =
        p.triangles.array() + int(vo);
    vo += p.num_vertices();
    to += p.num_triangles();
  }
  if (!parts.empty()) out.structure = parts.front().structure;
  return out;
}

TriangleMesh flip_orientation(const TriangleMesh& mesh) {
  TriangleMesh out = mesh;
  out.triangles.col(1).swap(out.triangles.col(2));
  return out;
}

TriangleMesh icosphere(int subdivisions) {
  // Icosahedron base.
  const Real phi = (1.0 + std::sqrt(5.0)) / 2.0;
  MatX3 verts(12, 3);
  verts << -1, phi, 0, 1, phi, 0, -1, -phi, 0, 1, -phi, 0,
      0, -1, phi, 0, 1, phi, 0, -1, -phi, 0, 1, -phi,
      phi, 0, -1, phi, 0, 1, -phi, 0, -1, -phi, 0, 1;
  MatX3i tris(20, 3);
  tris << 0, 11, 5, 0, 5, 1, 0, 1, 7, 0, 7, 10, 0, 10, 11,
      1, 5, 9, 5, 11, 4, 11, 10, 2, 10, 7, 6, 7, 1, 8,
      3, 9, 4, 3, 4, 2, 3, 2, 6, 3, 6, 8, 3, 8, 9,
      4, 9, 5, 2, 4, 11, 6, 2, 10, 8, 6, 7, 9, 8, 1;

  std::vector<Vec3> vs;
  vs.reserve(static_cast<size_t>(verts.rows()));
  for (Index i = 0; i < verts.rows(); ++i)
    vs.push_back(Vec3(verts.row(i)).normalized());
  std::vector<Eigen::Vector3i> fs;
  fs.reserve(static_cast<size_t>(tris.rows()));
  for (Index i = 0; i < tris.rows(); ++i) fs.push_back(tris.row(i));

  for (int s = 0; s < subdivisions; ++s) {
    std::unordered_map<uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
      const uint64_t key = edge_key(std::min(a, b), std::max(a, b));
      auto [it, inserted] = midpoint.emplace(key, int(vs.size()));
      if (inserted) vs.push_back((0.5 * (vs[a] + vs[b])).normalized());
      return it->second;
    };
    std::vector<Eigen::Vector3i> next;
    next.reserve(fs.size() * 4);
    for (const auto& f : fs) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    fs = std::move(next);
  }

  TriangleMesh out;
  out.vertices.resize(static_cast<Index>(vs.size()), 3);
  for (size_t i = 0; i < vs.size(); ++i)
    out.vertices.row(static_cast<Index>(i)) = vs[i].transpose();
  out.triangles.resize(static_cast<Index>(fs.size()), 3);
  for (size_t i = 0; i < fs.size(); ++i)
    out.triangles.row(static_cast<Index>(i)) = fs[i].transpose();
  return out;
}

}  // namespace nsdf
