#include "nsdf/grid.hpp"

#include <cmath>

namespace nsdf {

void LabelGrid::validate() const {
  if ((dims.array() <= 0).any())
    throw DataError("LabelGrid: dims must be positive");
  if (!(spacing.array() > 0).all() || !spacing.allFinite())
    throw DataError("LabelGrid: spacing must be positive");
  if (Index(labels.size()) != size())
    throw DataError("LabelGrid: label array length does not match dims");
  for (uint8_t l : labels)
    if (l > uint8_t(Label::RV)) throw DataError("LabelGrid: unknown label");
}

void SdfGrid::validate() const {
  if ((dims.array() <= 0).any())
    throw DataError("SdfGrid: dims must be positive");
  if (!(spacing.array() > 0).all() || !spacing.allFinite())
    throw DataError("SdfGrid: spacing must be positive");
  if (values.size() != size())
    throw DataError("SdfGrid: value array length does not match dims");
}

SdfGrid make_normalized_grid(int resolution) {
  if (resolution < 2) throw ConfigError("grid resolution must be >= 2");
  SdfGrid g;
  g.dims = Vec3i::Constant(resolution);
  g.spacing = Vec3::Constant(2.0 / (resolution - 1));
  g.origin = Vec3::Constant(-1.0);
  g.values = VecX::Zero(g.size());
  return g;
}

}  // namespace nsdf
