#include "nsdf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "nsdf/mesh_query.hpp"
#include "nsdf/parallel.hpp"
#include "nsdf/reslice.hpp"
#include "nsdf/sampling.hpp"

namespace nsdf {

Index SliceMask::count() const {
  Index n = 0;
  for (uint8_t v : values) n += v ? 1 : 0;
  return n;
}

void SliceMask::validate() const {
  if (dims[0] <= 0 || dims[1] <= 0)
    throw DataError("SliceMask: dims must be positive");
  if (Index(values.size()) != size())
    throw DataError("SliceMask: value length does not match dims");
  if (!(px_spacing.array() > 0).all())
    throw DataError("SliceMask: spacing must be positive");
}

SliceMask make_mask(int cols, int rows, const Vec2& px_spacing) {
  SliceMask m;
  m.dims = Eigen::Vector2i(cols, rows);
  m.px_spacing = px_spacing;
  m.values.assign(static_cast<size_t>(cols) * rows, 0);
  return m;
}

SliceMask slice_from_sdf(const SdfGrid& sdf, const Vec3& plane_origin,
                         const Vec3& basis_u, const Vec3& basis_v,
                         const Vec2& px_spacing,
                         const Eigen::Vector2i& px_dims) {
  const MatX plane =
      reslice(sdf, plane_origin, basis_u, basis_v, px_spacing, px_dims);
  SliceMask mask = make_mask(px_dims[0], px_dims[1], px_spacing);
  for (int r = 0; r < px_dims[1]; ++r)
    for (int c = 0; c < px_dims[0]; ++c) mask.set(r, c, plane(r, c) <= 0.0);
  return mask;
}

SliceMask fill_blood_pool(const SliceMask& myo_mask, bool* no_cavity_warning) {
  myo_mask.validate();
  if (myo_mask.empty_mask()) throw DataError("fill_blood_pool: empty wall mask");
  const int cols = myo_mask.dims[0], rows = myo_mask.dims[1];

  // Flood-fill background from the border with 4-connectivity.
  std::vector<uint8_t> outside(static_cast<size_t>(cols) * rows, 0);
  std::deque<std::pair<int, int>> queue;
  auto push = [&](int r, int c) {
    if (r < 0 || c < 0 || r >= rows || c >= cols) return;
    const size_t at = static_cast<size_t>(r) * cols + c;
    if (outside[at] || myo_mask.at(r, c)) return;
    outside[at] = 1;
    queue.emplace_back(r, c);
  };
  for (int c = 0; c < cols; ++c) {
    push(0, c);
    push(rows - 1, c);
  }
  for (int r = 0; r < rows; ++r) {
    push(r, 0);
    push(r, cols - 1);
  }
  while (!queue.empty()) {
    const auto [r, c] = queue.front();
    queue.pop_front();
    push(r - 1, c);
    push(r + 1, c);
    push(r, c - 1);
    push(r, c + 1);
  }

  SliceMask pool = make_mask(cols, rows, myo_mask.px_spacing);
  Index filled = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const bool enclosed = !myo_mask.at(r, c) &&
                            !outside[static_cast<size_t>(r) * cols + c];
      pool.set(r, c, enclosed);
      filled += enclosed ? 1 : 0;
    }
  if (no_cavity_warning) *no_cavity_warning = filled == 0;
  return pool;
}

Real dice(const SliceMask& a, const SliceMask& b) {
  a.validate();
  b.validate();
  if (a.dims != b.dims) throw DataError("dice: mask dims differ");
  Index inter = 0, na = 0, nb = 0;
  for (Index i = 0; i < a.size(); ++i) {
    const bool va = a.values[static_cast<size_t>(i)] != 0;
    const bool vb = b.values[static_cast<size_t>(i)] != 0;
    inter += (va && vb) ? 1 : 0;
    na += va ? 1 : 0;
    nb += vb ? 1 : 0;
  }
  if (na + nb == 0) return 1.0;  // both empty by convention
  return 2.0 * Real(inter) / Real(na + nb);
}

namespace {

std::vector<Vec2> boundary_pixels_mm(const SliceMask& mask) {
  const int cols = mask.dims[0], rows = mask.dims[1];
  auto bg = [&](int r, int c) {
    if (r < 0 || c < 0 || r >= rows || c >= cols) return true;  // border = bg
    return !mask.at(r, c);
  };
  std::vector<Vec2> pts;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (!mask.at(r, c)) continue;
      if (bg(r - 1, c) || bg(r + 1, c) || bg(r, c - 1) || bg(r, c + 1))
        pts.emplace_back(c * mask.px_spacing[0], r * mask.px_spacing[1]);
    }
  return pts;
}

std::vector<Real> directed_distances(const std::vector<Vec2>& from,
                                     const std::vector<Vec2>& to) {
  std::vector<Real> d(from.size());
  for (size_t i = 0; i < from.size(); ++i) {
    Real best = std::numeric_limits<Real>::infinity();
    for (const Vec2& q : to) best = std::min(best, (from[i] - q).norm());
    d[i] = best;
  }
  return d;
}

// Nearest-rank percentile (1-indexed rank ceil(p*n)).
Real nearest_rank(std::vector<Real> values, Real p) {
  const size_t rank =
      std::max<size_t>(1, size_t(std::ceil(p * Real(values.size()))));
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

SurfaceDistances from_directed(std::vector<Real> ab, std::vector<Real> ba) {
  SurfaceDistances out;
  const Real max_ab = *std::max_element(ab.begin(), ab.end());
  const Real max_ba = *std::max_element(ba.begin(), ba.end());
  out.hd = std::max(max_ab, max_ba);
  out.hd95 = std::max(nearest_rank(ab, 0.95), nearest_rank(ba, 0.95));
  // Per-direction partial sums keep the pooled mean symmetric in the
  // argument order.
  Real sum_ab = 0, sum_ba = 0;
  for (Real v : ab) sum_ab += v;
  for (Real v : ba) sum_ba += v;
  out.assd = (sum_ab + sum_ba) / Real(ab.size() + ba.size());
  return out;
}

}  // namespace

SurfaceDistances surface_distances(const SliceMask& a, const SliceMask& b) {
  a.validate();
  b.validate();
  if (a.empty_mask() || b.empty_mask())
    throw DataError("surface_distances: empty mask (missing structure)");
  if ((a.px_spacing - b.px_spacing).norm() > 0)
    throw DataError("surface_distances: pixel spacing differs");
  const std::vector<Vec2> pa = boundary_pixels_mm(a);
  const std::vector<Vec2> pb = boundary_pixels_mm(b);
  return from_directed(directed_distances(pa, pb), directed_distances(pb, pa));
}

SurfaceDistances mesh_surface_distances(const TriangleMesh& a,
                                        const TriangleMesh& b, Index n_samples,
                                        Rng& rng) {
  if (a.empty() || b.empty())
    throw DataError("mesh_surface_distances: empty mesh");
  const MatX3 pa = sample_on_surface(a, n_samples, rng);
  const MatX3 pb = sample_on_surface(b, n_samples, rng);
  const MeshQuery qa(a), qb(b);

  std::vector<Real> ab(static_cast<size_t>(n_samples));
  std::vector<Real> ba(static_cast<size_t>(n_samples));
  parallel_for_chunks(n_samples, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      ab[static_cast<size_t>(i)] = qb.distance(pa.row(i).transpose());
      ba[static_cast<size_t>(i)] = qa.distance(pb.row(i).transpose());
    }
  });
  return from_directed(std::move(ab), std::move(ba));
}

void MetricReport::validate() const {
  if (!(dsc >= 0.0 && dsc <= 1.0)) throw DataError("MetricReport: dsc range");
  if (hd_mm < 0 || hd95_mm < 0 || assd_mm < 0)
    throw DataError("MetricReport: negative distance");
  if (hd95_mm > hd_mm + 1e-12) throw DataError("MetricReport: hd95 > hd");
}

MetricAggregate aggregate(const std::vector<Real>& values) {
  MetricAggregate agg;
  agg.n = Index(values.size());
  if (values.empty()) return agg;
  Real sum = 0;
  for (Real v : values) sum += v;
  agg.mean = sum / Real(values.size());
  Real ss = 0;
  for (Real v : values) ss += (v - agg.mean) * (v - agg.mean);
  agg.stddev = values.size() > 1 ? std::sqrt(ss / Real(values.size() - 1)) : 0.0;
  return agg;
}

}  // namespace nsdf
