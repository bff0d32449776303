#pragma once

#include <vector>

#include "nsdf/grid.hpp"
#include "nsdf/mesh.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// Centers of mass of LV, RV and LA, in mm.
struct Landmarks {
  Vec3 lv_cm = Vec3::Zero();
  Vec3 rv_cm = Vec3::Zero();
  Vec3 la_cm = Vec3::Zero();
};

// Shared anatomical reference frame: p_canonical = scale * R * (p - t).
// The rotation takes LV->LA exactly onto +z; the component of RV->LV
// orthogonal to that axis onto +x; y completes a right-handed triad.
struct CanonicalFrame {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();  // mm, maps lv_cm to the origin
  Real scale = 1.0;                 // 1/mm

  Vec3 apply(const Vec3& p) const {
    return scale * (rotation * (p - translation));
  }
  Vec3 invert(const Vec3& q) const {
    return rotation.transpose() * (q / scale) + translation;
  }
  Real apply_distance(Real d) const { return scale * d; }
  Real invert_distance(Real d) const { return d / scale; }

  void validate() const;
};

// Rotation + translation from anatomical landmarks; scale stays 1 until
// fit_scale supplies the corpus-wide constant. Throws DataError when the
// landmarks are collinear.
CanonicalFrame frame_from_landmarks(const Landmarks& lm);

// 0.8 / max point norm over the already rotated/translated training corpus.
// Fit once on training data, then frozen and reused for all inference input.
Real fit_scale(const MatX3& rotated_training_coords, Real safety = 0.8);

// Landmarks from a label grid: volume-weighted centroids of the LVBP, RV
// voxels; the LA center must come from elsewhere (phantom sidecar).
Vec3 label_centroid(const LabelGrid& grid, Label label);

// Whole-mesh convenience transforms.
TriangleMesh apply_frame(const CanonicalFrame& frame, const TriangleMesh& mesh);
TriangleMesh invert_frame(const CanonicalFrame& frame, const TriangleMesh& mesh);
MatX3 apply_frame(const CanonicalFrame& frame, const MatX3& points);

}  // namespace nsdf
