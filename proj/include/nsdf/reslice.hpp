#pragma once

#include "nsdf/grid.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// Trilinear resampling of a volume on an arbitrary plane. Sample (r, c) of
// the result sits at plane_origin + c*px_spacing[0]*basis_u +
// r*px_spacing[1]*basis_v. Samples outside the grid get the out-of-grid
// sentinel (10x the grid diagonal, always positive). basis_u and basis_v
// must be orthonormal (ConfigError otherwise).
MatX reslice(const SdfGrid& sdf, const Vec3& plane_origin, const Vec3& basis_u,
             const Vec3& basis_v, const Vec2& px_spacing,
             const Eigen::Vector2i& px_dims);

Real reslice_sentinel(const SdfGrid& sdf);

// Trilinear interpolation at one point; `inside` reports containment.
Real trilinear(const SdfGrid& sdf, const Vec3& p, bool* inside = nullptr);

}  // namespace nsdf
