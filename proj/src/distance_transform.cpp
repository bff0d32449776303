#include "nsdf/distance_transform.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "nsdf/parallel.hpp"

namespace nsdf {

namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();

// 1D lower envelope of parabolas rooted at x_j = j*h with heights f[j]
// (Felzenszwalb & Huttenlocher, generalized to non-unit sample spacing).
// Emits the argmin root per output sample; the caller reconstructs the
// squared distance from integer offsets so that equal offsets are
// bit-identical regardless of absolute position. Infinite heights are
// skipped; all-infinite lines yield parent -1.
void dt_line_argmin(const Real* f, int* parent, int n, Real h, int* hull,
                    Real* ranges) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    const Real xq = q * h;
    Real s;
    while (true) {
      if (k < 0) {
        s = -kInf;
        break;
      }
      const int r = hull[k];
      const Real xr = r * h;
      s = ((f[q] + xq * xq) - (f[r] + xr * xr)) / (2 * (xq - xr));
      if (s > ranges[k]) break;
      --k;
    }
    ++k;
    hull[k] = q;
    ranges[k] = s;
  }
  if (k < 0) {
    for (int i = 0; i < n; ++i) parent[i] = -1;
    return;
  }
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const Real xi = i * h;
    while (j < k && ranges[j + 1] < xi) ++j;
    parent[i] = hull[j];
  }
}

// Squared distance from every voxel to the nearest seed voxel. Axis passes
// run x, then y, then z; the value after each pass is rebuilt canonically as
// (delta_axis * spacing)^2 + previous, so the final grouping is
// dz^2 + (dy^2 + dx^2) with each term a single product of an integer offset
// and the spacing.
std::vector<Real> squared_distance_to_seeds(const std::vector<uint8_t>& seed,
                                            const Vec3i& dims,
                                            const Vec3& spacing) {
  const int nx = dims[0], ny = dims[1], nz = dims[2];
  std::vector<Real> d(seed.size());
  for (size_t i = 0; i < seed.size(); ++i) d[i] = seed[i] ? 0.0 : kInf;

  auto idx = [nx, ny](int i, int j, int k) {
    return size_t(i) + size_t(nx) * (size_t(j) + size_t(ny) * size_t(k));
  };
  auto sq = [](int delta, Real h) {
    const Real t = Real(delta) * h;
    return t * t;
  };

  // x pass: one line per (j,k)
  parallel_for_chunks(Index(ny) * nz, [&](Index begin, Index end) {
    std::vector<Real> line(nx), ranges(nx + 1);
    std::vector<int> parent(nx), hull(nx);
    for (Index jk = begin; jk < end; ++jk) {
      const int j = int(jk % ny), k = int(jk / ny);
      for (int i = 0; i < nx; ++i) line[i] = d[idx(i, j, k)];
      dt_line_argmin(line.data(), parent.data(), nx, spacing[0], hull.data(),
                     ranges.data());
      for (int i = 0; i < nx; ++i)
        d[idx(i, j, k)] =
            parent[i] < 0 ? kInf : sq(i - parent[i], spacing[0]);
    }
  });
  // y pass: one line per (i,k)
  parallel_for_chunks(Index(nx) * nz, [&](Index begin, Index end) {
    std::vector<Real> line(ny), ranges(ny + 1);
    std::vector<int> parent(ny), hull(ny);
    for (Index ik = begin; ik < end; ++ik) {
      const int i = int(ik % nx), k = int(ik / nx);
      for (int j = 0; j < ny; ++j) line[j] = d[idx(i, j, k)];
      dt_line_argmin(line.data(), parent.data(), ny, spacing[1], hull.data(),
                     ranges.data());
      for (int j = 0; j < ny; ++j)
        d[idx(i, j, k)] = parent[j] < 0
                              ? kInf
                              : sq(j - parent[j], spacing[1]) + line[parent[j]];
    }
  });
  // z pass: one line per (i,j)
  parallel_for_chunks(Index(nx) * ny, [&](Index begin, Index end) {
    std::vector<Real> line(nz), ranges(nz + 1);
    std::vector<int> parent(nz), hull(nz);
    for (Index ij = begin; ij < end; ++ij) {
      const int i = int(ij % nx), j = int(ij / nx);
      for (int k = 0; k < nz; ++k) line[k] = d[idx(i, j, k)];
      dt_line_argmin(line.data(), parent.data(), nz, spacing[2], hull.data(),
                     ranges.data());
      for (int k = 0; k < nz; ++k)
        d[idx(i, j, k)] = parent[k] < 0
                              ? kInf
                              : sq(k - parent[k], spacing[2]) + line[parent[k]];
    }
  });
  return d;
}

}  // namespace

SdfGrid distance_transform_mask(const std::vector<uint8_t>& inside,
                                const Vec3i& dims, const Vec3& spacing,
                                const Vec3& origin) {
  const size_t n = inside.size();
  if (n != size_t(dims[0]) * dims[1] * dims[2])
    throw DataError("distance_transform: mask length does not match dims");
  size_t n_in = 0;
  for (uint8_t v : inside) n_in += v ? 1 : 0;
  if (n_in == 0) throw DataError("distance_transform: structure is empty");
  if (n_in == n)
    throw DataError("distance_transform: structure fills the whole grid");

  std::vector<uint8_t> outside(n);
  for (size_t i = 0; i < n; ++i) outside[i] = inside[i] ? 0 : 1;

  const std::vector<Real> to_in = squared_distance_to_seeds(inside, dims, spacing);
  const std::vector<Real> to_out =
      squared_distance_to_seeds(outside, dims, spacing);

  SdfGrid out;
  out.dims = dims;
  out.spacing = spacing;
  out.origin = origin;
  out.values.resize(Index(n));
  for (size_t i = 0; i < n; ++i)
    out.values[Index(i)] =
        inside[i] ? -std::sqrt(to_out[i]) : std::sqrt(to_in[i]);
  return out;
}

SdfGrid distance_transform(const LabelGrid& grid, StructureId structure) {
  grid.validate();
  std::vector<uint8_t> inside(grid.labels.size());
  for (size_t i = 0; i < grid.labels.size(); ++i)
    inside[i] = label_in_structure(Label(grid.labels[i]), structure) ? 1 : 0;
  return distance_transform_mask(inside, grid.dims, grid.spacing, grid.origin);
}

}  // namespace nsdf
