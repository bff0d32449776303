#pragma once

#include <vector>

#include "nsdf/types.hpp"

namespace nsdf {

// Anisotropic voxel volume with per-voxel structure labels. Storage is
// x-fastest: index = i + nx*(j + ny*k). Voxel (i,j,k) is centered at
// origin + (i,j,k) .* spacing, in mm.
struct LabelGrid {
  Vec3i dims = Vec3i::Zero();
  Vec3 spacing = Vec3::Ones();
  Vec3 origin = Vec3::Zero();
  std::vector<uint8_t> labels;

  Index size() const { return Index(dims[0]) * dims[1] * dims[2]; }
  Index index(int i, int j, int k) const {
    return Index(i) + Index(dims[0]) * (Index(j) + Index(dims[1]) * k);
  }
  Label at(int i, int j, int k) const {
    return Label(labels[static_cast<size_t>(index(i, j, k))]);
  }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin + Vec3(i * spacing[0], j * spacing[1], k * spacing[2]);
  }
  void validate() const;
};

// Same layout, real-valued samples (signed distance; negative inside).
struct SdfGrid {
  Vec3i dims = Vec3i::Zero();
  Vec3 spacing = Vec3::Ones();
  Vec3 origin = Vec3::Zero();
  VecX values;

  Index size() const { return Index(dims[0]) * dims[1] * dims[2]; }
  Index index(int i, int j, int k) const {
    return Index(i) + Index(dims[0]) * (Index(j) + Index(dims[1]) * k);
  }
  Real at(int i, int j, int k) const { return values[index(i, j, k)]; }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin + Vec3(i * spacing[0], j * spacing[1], k * spacing[2]);
  }
  Real diagonal() const {
    return (spacing.cwiseProduct((dims.cast<Real>() - Vec3::Ones()))).norm();
  }
  void validate() const;
};

// Does this voxel belong to the given structure? MYO voxels count only for
// MYO; RV voxels only for RV (LVBP and BACKGROUND belong to neither).
inline bool label_in_structure(Label l, StructureId s) {
  return (s == StructureId::MYO) ? l == Label::MYO : l == Label::RV;
}

// Lattice over [-1,1]^3 with `resolution` samples per axis.
SdfGrid make_normalized_grid(int resolution);

}  // namespace nsdf
