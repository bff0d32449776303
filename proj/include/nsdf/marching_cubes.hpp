#pragma once

#include "nsdf/grid.hpp"
#include "nsdf/mesh.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// Extracts the iso-level surface of a sampled scalar field as a closed,
// outward-oriented triangle mesh (outward = toward larger field values, the
// negative-inside convention). Vertices are interpolated linearly along cell
// edges and welded, so the mesh is watertight wherever the field is clean.
// Uses the fixed 256-case table; ambiguous faces resolve by the table's
// default complement rule (no asymptotic decider). A field with no iso
// crossing yields an empty mesh. Throws DataError on non-finite samples.
TriangleMesh marching_cubes(const SdfGrid& sdf, Real iso = 0.0);

namespace mc_tables {
extern const int kEdgeTable[256];
extern const int kTriTable[256][16];
}  // namespace mc_tables

}  // namespace nsdf
