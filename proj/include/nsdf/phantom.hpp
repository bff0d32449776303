#pragma once

#include <string>
#include <vector>

#include "nsdf/canonical.hpp"
#include "nsdf/grid.hpp"
#include "nsdf/mesh.hpp"
#include "nsdf/rng.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// Parametric two-structure heart stand-in: a thick star-shaped shell with an
// enclosed cavity (MYO analog), a separate chamber (RV analog) and an LA
// landmark point. Star-shaped radial meshing keeps every surface watertight
// by construction.
struct PhantomSpec {
  uint64_t seed = 1;
  Vec3 lv_outer_radii = Vec3(36, 32, 46);  // mm
  Real wall_thickness = 10.0;              // mm
  Vec3 rv_offset = Vec3(-70, 0, -4);       // mm from the LV center
  Vec3 rv_radii = Vec3(24, 27, 40);        // mm
  Vec3 la_offset = Vec3(0, 0, 58);         // mm from the LV center
  Real bump_amplitude = 2.0;               // mm of radial modulation
  int bump_frequency = 2;
  int mesh_subdivisions = 3;

  void validate() const;
};

struct PhantomCase {
  std::string id;
  TriangleMesh myo_mesh;  // outer + inner shell surfaces (two components)
  TriangleMesh rv_mesh;
  Landmarks landmarks;
  LabelGrid label_grid;
  PhantomSpec spec;
};

// Builds meshes, landmarks and the label grid (winding-number voxelization
// at the given anisotropic spacing). The chamber is shrunk up to five times
// when it would touch the shell; DataError if still unsatisfiable.
PhantomCase generate(const PhantomSpec& spec,
                     const Vec3& grid_spacing = Vec3(1.5, 1.5, 3.0));

// Re-rasterizes a case at different spacing (e.g. near-isotropic CTA-like
// vs thick-slice SAX-like).
LabelGrid rasterize_anisotropic(const PhantomCase& c, Real in_plane_mm,
                                Real thru_plane_mm);
LabelGrid rasterize(const TriangleMesh& myo, const TriangleMesh& rv,
                    const Vec3& spacing);

// Uniform jitter ranges around a base spec.
struct CohortJitter {
  Real radii_frac = 0.15;      // per-axis radius factor in [1-f, 1+f]
  Real wall_frac = 0.15;       // wall thickness factor
  Real offset_mm = 5.0;        // per-axis offset shift in [-o, o]
  Real amplitude_min = 0.5;    // mm
  Real amplitude_max = 2.5;    // mm
  int bump_frequency_min = 1;
  int bump_frequency_max = 3;
};

std::vector<PhantomCase> generate_cohort(int n, const PhantomSpec& base,
                                         const CohortJitter& jitter,
                                         uint64_t seed,
                                         const Vec3& grid_spacing = Vec3(1.5,
                                                                         1.5,
                                                                         3.0));

// Draws a jittered spec (exposed for distribution tests).
PhantomSpec jitter_spec(const PhantomSpec& base, const CohortJitter& jitter,
                        uint64_t seed, int index);

}  // namespace nsdf
