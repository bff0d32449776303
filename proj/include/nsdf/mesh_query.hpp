#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nsdf/mesh.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// Squared distance from p to triangle (a,b,c), via the closest-feature
// region walk (Ericson, Real-Time Collision Detection, 5.1.5).
template <typename Scalar>
Scalar point_triangle_squared_distance(
    const Eigen::Matrix<Scalar, 3, 1>& p, const Eigen::Matrix<Scalar, 3, 1>& a,
    const Eigen::Matrix<Scalar, 3, 1>& b,
    const Eigen::Matrix<Scalar, 3, 1>& c) {
  using V = Eigen::Matrix<Scalar, 3, 1>;
  const V ab = b - a, ac = c - a, ap = p - a;
  const Scalar d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return (p - a).squaredNorm();

  const V bp = p - b;
  const Scalar d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return (p - b).squaredNorm();

  const Scalar vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const Scalar v = d1 / (d1 - d3);
    return (p - (a + v * ab)).squaredNorm();
  }

  const V cp = p - c;
  const Scalar d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return (p - c).squaredNorm();

  const Scalar vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const Scalar w = d2 / (d2 - d6);
    return (p - (a + w * ac)).squaredNorm();
  }

  const Scalar va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const Scalar w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).squaredNorm();
  }

  const Scalar sum = va + vb + vc;
  if (!(sum > 0)) {  // collinear triangle: closest feature is an edge
    auto seg = [&p](const V& s, const V& t) {
      const V st = t - s;
      const Scalar len2 = st.squaredNorm();
      Scalar u = len2 > 0 ? (p - s).dot(st) / len2 : Scalar(0);
      u = std::clamp(u, Scalar(0), Scalar(1));
      return (p - (s + u * st)).squaredNorm();
    };
    return std::min({seg(a, b), seg(b, c), seg(c, a)});
  }
  const Scalar denom = Scalar(1) / sum;
  const Scalar v = vb * denom, w = vc * denom;
  return (p - (a + v * ab + w * ac)).squaredNorm();
}

// Signed solid angle of triangle (a,b,c) at q (van Oosterom & Strackee).
template <typename Scalar>
Scalar triangle_solid_angle(const Eigen::Matrix<Scalar, 3, 1>& q,
                            const Eigen::Matrix<Scalar, 3, 1>& a,
                            const Eigen::Matrix<Scalar, 3, 1>& b,
                            const Eigen::Matrix<Scalar, 3, 1>& c) {
  using V = Eigen::Matrix<Scalar, 3, 1>;
  const V va = a - q, vb = b - q, vc = c - q;
  const Scalar la = va.norm(), lb = vb.norm(), lc = vc.norm();
  const Scalar num = va.dot(vb.cross(vc));
  const Scalar den =
      la * lb * lc + va.dot(vb) * lc + vb.dot(vc) * la + vc.dot(va) * lb;
  return Scalar(2) * std::atan2(num, den);
}

// Acceleration structure over one mesh: an AABB tree for closest-point
// queries plus, per node, the directed boundary edges of the node's triangle
// subset. The winding number of a subset patch equals the winding number of
// a fan closing its boundary whenever the query lies outside the subset's
// bounding box, which makes the generalized winding number exact and cheap
// far from any given node. A closed mesh has an empty root boundary, so
// queries outside the root box cost nothing.
class MeshQuery {
 public:
  explicit MeshQuery(const TriangleMesh& mesh);

  // Unsigned distance and squared distance to the surface.
  Real squared_distance(const Vec3& p) const;
  Real distance(const Vec3& p) const { return std::sqrt(squared_distance(p)); }

  // Generalized winding number (1 inside a closed outward-oriented surface).
  Real winding_number(const Vec3& p) const;

  // Winding-number-signed distance: negative iff winding >= 0.5.
  Real signed_distance(const Vec3& p) const;

  const TriangleMesh& mesh() const { return mesh_; }

 private:
  struct Node {
    Vec3 lo, hi;
    Index left = -1, right = -1;   // children, or -1 for leaves
    Index begin = 0, end = 0;      // triangle range [begin, end) in order_
    Index cap_begin = 0, cap_end = 0;  // boundary fan range in cap_tris_
  };

  Index build(Index begin, Index end);
  void collect_boundary(Index node_id);
  Real node_winding(const Vec3& p, Index node_id) const;

  TriangleMesh mesh_;
  std::vector<Node> nodes_;
  std::vector<Index> order_;                  // triangle ids, leaf-contiguous
  std::vector<Eigen::Vector3i> cap_tris_;     // per-node boundary fans
  std::vector<Vec3> centroids_;
  Index root_ = -1;
};

// One-shot signed distance (winding-number sign). For repeated queries build
// a MeshQuery once instead. Throws DataError on an empty mesh.
Real signed_distance_to_mesh(const Vec3& p, const TriangleMesh& mesh);

// Unsigned variant.
Real unsigned_distance_to_mesh(const Vec3& p, const TriangleMesh& mesh);

}  // namespace nsdf
