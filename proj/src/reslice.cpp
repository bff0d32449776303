#include "nsdf/reslice.hpp"

#include <cmath>

namespace nsdf {

Real reslice_sentinel(const SdfGrid& sdf) { return 10.0 * sdf.diagonal(); }

Real trilinear(const SdfGrid& sdf, const Vec3& p, bool* inside) {
  const Vec3 g = (p - sdf.origin).cwiseQuotient(sdf.spacing);
  for (int a = 0; a < 3; ++a) {
    if (!(g[a] >= 0.0 && g[a] <= Real(sdf.dims[a] - 1))) {
      if (inside) *inside = false;
      return 0.0;
    }
  }
  if (inside) *inside = true;
  int i0[3], i1[3];
  Real f[3];
  for (int a = 0; a < 3; ++a) {
    i0[a] = std::min(int(std::floor(g[a])), sdf.dims[a] - 2);
    i0[a] = std::max(i0[a], 0);
    i1[a] = i0[a] + 1;
    f[a] = g[a] - Real(i0[a]);
  }
  auto v = [&](int a, int b, int c) {
    return sdf.at(a ? i1[0] : i0[0], b ? i1[1] : i0[1], c ? i1[2] : i0[2]);
  };
  const Real c00 = v(0, 0, 0) * (1 - f[0]) + v(1, 0, 0) * f[0];
  const Real c10 = v(0, 1, 0) * (1 - f[0]) + v(1, 1, 0) * f[0];
  const Real c01 = v(0, 0, 1) * (1 - f[0]) + v(1, 0, 1) * f[0];
  const Real c11 = v(0, 1, 1) * (1 - f[0]) + v(1, 1, 1) * f[0];
  const Real c0 = c00 * (1 - f[1]) + c10 * f[1];
  const Real c1 = c01 * (1 - f[1]) + c11 * f[1];
  return c0 * (1 - f[2]) + c1 * f[2];
}

MatX reslice(const SdfGrid& sdf, const Vec3& plane_origin, const Vec3& basis_u,
             const Vec3& basis_v, const Vec2& px_spacing,
             const Eigen::Vector2i& px_dims) {
  sdf.validate();
  constexpr Real kTol = 1e-9;
  if (std::abs(basis_u.norm() - 1.0) > kTol ||
      std::abs(basis_v.norm() - 1.0) > kTol ||
      std::abs(basis_u.dot(basis_v)) > kTol)
    throw ConfigError("reslice: basis_u/basis_v must be orthonormal");
  if (px_dims[0] <= 0 || px_dims[1] <= 0 ||
      !(px_spacing.array() > 0.0).all())
    throw ConfigError("reslice: pixel dims and spacing must be positive");

  const Real sentinel = reslice_sentinel(sdf);
  MatX out(px_dims[1], px_dims[0]);  // rows along v, cols along u
  for (int r = 0; r < px_dims[1]; ++r) {
    for (int c = 0; c < px_dims[0]; ++c) {
      const Vec3 p = plane_origin + (c * px_spacing[0]) * basis_u +
                     (r * px_spacing[1]) * basis_v;
      bool inside = false;
      const Real val = trilinear(sdf, p, &inside);
      out(r, c) = inside ? val : sentinel;
    }
  }
  return out;
}

}  // namespace nsdf
