#pragma once

#include "nsdf/grid.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// Exact Euclidean distance transform of the structure's membership mask,
// voxel-center to voxel-center, honoring anisotropic spacing (separable
// lower-envelope-of-parabolas passes in x, then y, then z). Each voxel gets
// the distance in mm to the nearest voxel of opposite membership, negated
// inside the structure. Throws DataError when the structure mask is uniform.
SdfGrid distance_transform(const LabelGrid& grid, StructureId structure);

// Same transform on an arbitrary boolean mask (true = inside).
SdfGrid distance_transform_mask(const std::vector<uint8_t>& inside,
                                const Vec3i& dims, const Vec3& spacing,
                                const Vec3& origin);

}  // namespace nsdf
