#pragma once

#include <vector>

#include "nsdf/grid.hpp"
#include "nsdf/mesh.hpp"
#include "nsdf/rng.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// Binary 2D mask; row-major rows x cols like the reslice output, with pixel
// spacing in mm (u = columns, v = rows).
struct SliceMask {
  Eigen::Vector2i dims = Eigen::Vector2i::Zero();  // (cols, rows)
  Vec2 px_spacing = Vec2::Ones();                  // mm
  std::vector<uint8_t> values;                     // row-major

  Index size() const { return Index(dims[0]) * dims[1]; }
  bool at(int r, int c) const {
    return values[static_cast<size_t>(r) * dims[0] + c] != 0;
  }
  void set(int r, int c, bool v) {
    values[static_cast<size_t>(r) * dims[0] + c] = v ? 1 : 0;
  }
  Index count() const;
  bool empty_mask() const { return count() == 0; }
  void validate() const;
};

SliceMask make_mask(int cols, int rows, const Vec2& px_spacing);

// Foreground = resliced signed distance <= 0 (out-of-grid sentinel is
// positive, so outside pixels stay background).
SliceMask slice_from_sdf(const SdfGrid& sdf, const Vec3& plane_origin,
                         const Vec3& basis_u, const Vec3& basis_v,
                         const Vec2& px_spacing,
                         const Eigen::Vector2i& px_dims);

// Cavity filling: background regions not 4-connected to the border become
// foreground; the wall itself is excluded. `no_cavity_warning` (optional)
// reports an open or cavity-free wall mask.
SliceMask fill_blood_pool(const SliceMask& myo_mask,
                          bool* no_cavity_warning = nullptr);

// Dice overlap; both-empty convention = 1.0.
Real dice(const SliceMask& a, const SliceMask& b);

struct SurfaceDistances {
  Real hd = 0;    // max of both directed maxima, mm
  Real hd95 = 0;  // max of both directed nearest-rank 95th percentiles, mm
  Real assd = 0;  // mean of all directed distances pooled symmetrically, mm
};

// Boundary pixels are foreground pixels 4-adjacent to background (image
// border counts as background); distances between pixel centers in mm.
// Throws DataError when either mask is empty.
SurfaceDistances surface_distances(const SliceMask& a, const SliceMask& b);

// Sample-based symmetric surface distances between meshes: n area-uniform
// samples per mesh, exact point-to-surface distances to the other mesh.
SurfaceDistances mesh_surface_distances(const TriangleMesh& a,
                                        const TriangleMesh& b, Index n_samples,
                                        Rng& rng);

// One evaluated structure.
struct MetricReport {
  std::string case_id;
  std::string structure;
  Real dsc = 0;
  Real hd_mm = 0;
  Real hd95_mm = 0;
  Real assd_mm = 0;
  Real volume_ml = std::numeric_limits<Real>::quiet_NaN();

  void validate() const;
};

struct MetricAggregate {
  Real mean = 0, stddev = 0;
  Index n = 0;
};
MetricAggregate aggregate(const std::vector<Real>& values);

}  // namespace nsdf
