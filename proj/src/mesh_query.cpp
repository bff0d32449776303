#include "nsdf/mesh_query.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace nsdf {

namespace {

constexpr Index kLeafSize = 4;

inline Real box_squared_distance(const Vec3& p, const Vec3& lo,
                                 const Vec3& hi) {
  Real d2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Real d = std::max({lo[k] - p[k], Real(0), p[k] - hi[k]});
    d2 += d * d;
  }
  return d2;
}

inline bool box_contains(const Vec3& p, const Vec3& lo, const Vec3& hi,
                         Real pad) {
  return p[0] >= lo[0] - pad && p[0] <= hi[0] + pad && p[1] >= lo[1] - pad &&
         p[1] <= hi[1] + pad && p[2] >= lo[2] - pad && p[2] <= hi[2] + pad;
}

inline uint64_t dir_edge_key(int a, int b) {
  return (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
}

}  // namespace

MeshQuery::MeshQuery(const TriangleMesh& mesh) : mesh_(mesh) {
  if (mesh_.empty()) throw DataError("MeshQuery: empty mesh");
  const Index nt = mesh_.num_triangles();
  order_.resize(static_cast<size_t>(nt));
  for (Index t = 0; t < nt; ++t) order_[static_cast<size_t>(t)] = t;
  centroids_.resize(static_cast<size_t>(nt));
  for (Index t = 0; t < nt; ++t) {
    const auto tri = mesh_.triangles.row(t);
    centroids_[static_cast<size_t>(t)] =
        (Vec3(mesh_.vertices.row(tri[0])) + Vec3(mesh_.vertices.row(tri[1])) +
         Vec3(mesh_.vertices.row(tri[2]))) /
        3.0;
  }
  nodes_.reserve(static_cast<size_t>(2 * nt / kLeafSize + 8));
  root_ = build(0, nt);
  centroids_.clear();
  centroids_.shrink_to_fit();
  for (size_t n = 0; n < nodes_.size(); ++n) collect_boundary(Index(n));
}

Index MeshQuery::build(Index begin, Index end) {
  const Index node_id = Index(nodes_.size());
  nodes_.emplace_back();
  Vec3 lo = Vec3::Constant(std::numeric_limits<Real>::infinity());
  Vec3 hi = -lo;
  Vec3 clo = lo, chi = hi;
  for (Index i = begin; i < end; ++i) {
    const Index t = order_[static_cast<size_t>(i)];
    const auto tri = mesh_.triangles.row(t);
    for (int e = 0; e < 3; ++e) {
      const Vec3 v = mesh_.vertices.row(tri[e]);
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    clo = clo.cwiseMin(centroids_[static_cast<size_t>(t)]);
    chi = chi.cwiseMax(centroids_[static_cast<size_t>(t)]);
  }
  nodes_[static_cast<size_t>(node_id)].lo = lo;
  nodes_[static_cast<size_t>(node_id)].hi = hi;
  nodes_[static_cast<size_t>(node_id)].begin = begin;
  nodes_[static_cast<size_t>(node_id)].end = end;

  if (end - begin <= kLeafSize) return node_id;

  int axis = 0;
  (chi - clo).maxCoeff(&axis);
  const Index mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](Index a, Index b) {
                     return centroids_[static_cast<size_t>(a)][axis] <
                            centroids_[static_cast<size_t>(b)][axis];
                   });
  const Index left = build(begin, mid);
  const Index right = build(mid, end);
  nodes_[static_cast<size_t>(node_id)].left = left;
  nodes_[static_cast<size_t>(node_id)].right = right;
  return node_id;
}

void MeshQuery::collect_boundary(Index node_id) {
  Node& node = nodes_[static_cast<size_t>(node_id)];
  node.cap_begin = Index(cap_tris_.size());
  if (node.left < 0) {  // leaves evaluate their triangles directly
    node.cap_end = node.cap_begin;
    return;
  }
  // Net directed-edge multiplicity of the subset's boundary 1-chain. For a
  // consistently oriented subset this is +/-1 on boundary edges and 0 inside,
  // but the chain arithmetic stays correct for arbitrary soups.
  std::unordered_map<uint64_t, int> net;
  net.reserve(static_cast<size_t>(node.end - node.begin) * 3);
  for (Index i = node.begin; i < node.end; ++i) {
    const auto tri = mesh_.triangles.row(order_[static_cast<size_t>(i)]);
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      if (a == b) continue;
      if (a < b)
        net[dir_edge_key(a, b)] += 1;
      else
        net[dir_edge_key(b, a)] -= 1;
    }
  }
  int cap_vertex = -1;
  for (const auto& [key, count] : net) {
    if (count != 0) {
      cap_vertex = int(key >> 32);
      break;
    }
  }
  if (cap_vertex < 0) {  // closed subset: zero contribution outside its box
    node.cap_end = node.cap_begin;
    return;
  }
  for (const auto& [key, count] : net) {
    const int a = int(key >> 32), b = int(key & 0xffffffffu);
    for (int c = 0; c < count; ++c) cap_tris_.push_back({a, b, cap_vertex});
    for (int c = 0; c < -count; ++c) cap_tris_.push_back({b, a, cap_vertex});
  }
  node.cap_end = Index(cap_tris_.size());
}

Real MeshQuery::squared_distance(const Vec3& p) const {
  Real best = std::numeric_limits<Real>::infinity();
  // Explicit stack, nearer child first.
  Index stack[64];
  int top = 0;
  stack[top++] = root_;
  while (top > 0) {
    const Node& node = nodes_[static_cast<size_t>(stack[--top])];
    if (box_squared_distance(p, node.lo, node.hi) >= best) continue;
    if (node.left < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        const auto tri = mesh_.triangles.row(order_[static_cast<size_t>(i)]);
        const Real d2 = point_triangle_squared_distance<Real>(
            p, mesh_.vertices.row(tri[0]), mesh_.vertices.row(tri[1]),
            mesh_.vertices.row(tri[2]));
        best = std::min(best, d2);
      }
      continue;
    }
    const Real dl = box_squared_distance(p, nodes_[size_t(node.left)].lo,
                                         nodes_[size_t(node.left)].hi);
    const Real dr = box_squared_distance(p, nodes_[size_t(node.right)].lo,
                                         nodes_[size_t(node.right)].hi);
    if (dl < dr) {
      if (dr < best) stack[top++] = node.right;
      if (dl < best) stack[top++] = node.left;
    } else {
      if (dl < best) stack[top++] = node.left;
      if (dr < best) stack[top++] = node.right;
    }
  }
  return best;
}

Real MeshQuery::node_winding(const Vec3& p, Index node_id) const {
  const Node& node = nodes_[static_cast<size_t>(node_id)];
  if (node.left < 0) {  // leaves always evaluate their few triangles
    Real omega = 0.0;
    for (Index i = node.begin; i < node.end; ++i) {
      const auto tri = mesh_.triangles.row(order_[static_cast<size_t>(i)]);
      omega += triangle_solid_angle<Real>(p, mesh_.vertices.row(tri[0]),
                                          mesh_.vertices.row(tri[1]),
                                          mesh_.vertices.row(tri[2]));
    }
    return omega;
  }
  const Real pad = 1e-12 * (node.hi - node.lo).norm();
  if (!box_contains(p, node.lo, node.hi, pad)) {
    // Outside the subset's hull its winding contribution equals that of the
    // fan closing the subset's boundary chain.
    Real omega = 0.0;
    for (Index i = node.cap_begin; i < node.cap_end; ++i) {
      const auto& cap = cap_tris_[static_cast<size_t>(i)];
      omega += triangle_solid_angle<Real>(p, mesh_.vertices.row(cap[0]),
                                          mesh_.vertices.row(cap[1]),
                                          mesh_.vertices.row(cap[2]));
    }
    return omega;
  }
  return node_winding(p, node.left) + node_winding(p, node.right);
}

Real MeshQuery::winding_number(const Vec3& p) const {
  return node_winding(p, root_) / (4.0 * std::numbers::pi);
}

Real MeshQuery::signed_distance(const Vec3& p) const {
  const Real d = distance(p);
  return winding_number(p) >= 0.5 ? -d : d;
}

Real signed_distance_to_mesh(const Vec3& p, const TriangleMesh& mesh) {
  MeshQuery query(mesh);
  return query.signed_distance(p);
}

Real unsigned_distance_to_mesh(const Vec3& p, const TriangleMesh& mesh) {
  MeshQuery query(mesh);
  return query.distance(p);
}

}  // namespace nsdf
