#include "nsdf/canonical.hpp"

#include <cmath>

namespace nsdf {

void CanonicalFrame::validate() const {
  if ((rotation * rotation.transpose() - Mat3::Identity()).norm() > 1e-10)
    throw DataError("CanonicalFrame: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-10)
    throw DataError("CanonicalFrame: rotation determinant is not +1");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw DataError("CanonicalFrame: scale must be positive");
}

CanonicalFrame frame_from_landmarks(const Landmarks& lm) {
  const Vec3 a = lm.lv_cm - lm.rv_cm;  // RV -> LV
  const Vec3 b = lm.la_cm - lm.lv_cm;  // LV -> LA
  const Real an = a.norm(), bn = b.norm();
  if (an <= 0.0 || bn <= 0.0)
    throw DataError("frame_from_landmarks: coincident landmarks");
  const Vec3 z_axis = b / bn;
  // Long axis is preserved exactly; RV->LV is orthogonalized against it.
  const Vec3 a_perp = a - a.dot(z_axis) * z_axis;
  if (a_perp.norm() <= 1e-6 * an)
    throw DataError("frame_from_landmarks: collinear landmarks");
  const Vec3 x_axis = a_perp.normalized();
  const Vec3 y_axis = z_axis.cross(x_axis);

  CanonicalFrame frame;
  frame.rotation.row(0) = x_axis.transpose();
  frame.rotation.row(1) = y_axis.transpose();
  frame.rotation.row(2) = z_axis.transpose();
  frame.translation = lm.lv_cm;
  frame.scale = 1.0;
  frame.validate();
  return frame;
}

Real fit_scale(const MatX3& rotated_training_coords, Real safety) {
  if (rotated_training_coords.rows() == 0)
    throw DataError("fit_scale: empty coordinate set");
  const Real max_norm = rotated_training_coords.rowwise().norm().maxCoeff();
  if (!(max_norm > 0.0))
    throw DataError("fit_scale: all coordinates at the origin");
  return safety / max_norm;
}

Vec3 label_centroid(const LabelGrid& grid, Label label) {
  grid.validate();
  Vec3 acc = Vec3::Zero();
  Index count = 0;
  for (int k = 0; k < grid.dims[2]; ++k)
    for (int j = 0; j < grid.dims[1]; ++j)
      for (int i = 0; i < grid.dims[0]; ++i)
        if (grid.at(i, j, k) == label) {
          acc += grid.voxel_center(i, j, k);
          ++count;
        }
  if (count == 0) throw DataError("label_centroid: label not present");
  return acc / Real(count);
}

TriangleMesh apply_frame(const CanonicalFrame& frame, const TriangleMesh& mesh) {
  TriangleMesh out = mesh;
  for (Index i = 0; i < out.vertices.rows(); ++i)
    out.vertices.row(i) = frame.apply(Vec3(mesh.vertices.row(i))).transpose();
  return out;
}

TriangleMesh invert_frame(const CanonicalFrame& frame, const TriangleMesh& mesh) {
  TriangleMesh out = mesh;
  for (Index i = 0; i < out.vertices.rows(); ++i)
    out.vertices.row(i) = frame.invert(Vec3(mesh.vertices.row(i))).transpose();
  return out;
}

MatX3 apply_frame(const CanonicalFrame& frame, const MatX3& points) {
  MatX3 out(points.rows(), 3);
  for (Index i = 0; i < points.rows(); ++i)
    out.row(i) = frame.apply(Vec3(points.row(i))).transpose();
  return out;
}

}  // namespace nsdf
