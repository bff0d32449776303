#include "nsdf/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nsdf/distance_transform.hpp"
#include "nsdf/parallel.hpp"

namespace nsdf {

SampleSet SampleSet::rows(const std::vector<Index>& which) const {
  SampleSet out;
  out.coords.resize(Index(which.size()), 3);
  out.sdf.resize(Index(which.size()), 2);
  out.tags.resize(which.size());
  for (size_t i = 0; i < which.size(); ++i) {
    out.coords.row(Index(i)) = coords.row(which[i]);
    out.sdf.row(Index(i)) = sdf.row(which[i]);
    out.tags[i] = tags[static_cast<size_t>(which[i])];
  }
  return out;
}

SampleSet SampleSet::concatenate(const SampleSet& a, const SampleSet& b) {
  SampleSet out;
  out.coords.resize(a.size() + b.size(), 3);
  out.coords << a.coords, b.coords;
  out.sdf.resize(a.size() + b.size(), 2);
  out.sdf << a.sdf, b.sdf;
  out.tags = a.tags;
  out.tags.insert(out.tags.end(), b.tags.begin(), b.tags.end());
  return out;
}

std::vector<Index> SampleSet::rows_with_tag(SampleTag tag) const {
  std::vector<Index> idx;
  for (size_t i = 0; i < tags.size(); ++i)
    if (tags[i] == tag) idx.push_back(Index(i));
  return idx;
}

MatX3 sample_on_surface(const TriangleMesh& mesh, Index n, Rng& rng) {
  if (mesh.empty()) throw DataError("sample_on_surface: empty mesh");
  const VecX areas = triangle_areas(mesh);
  VecX cumulative(areas.size());
  Real acc = 0;
  for (Index t = 0; t < areas.size(); ++t) {
    acc += areas[t];
    cumulative[t] = acc;
  }
  if (!(acc > 0)) throw DataError("sample_on_surface: zero-area mesh");

  MatX3 points(n, 3);
  for (Index i = 0; i < n; ++i) {
    const Real u = rng.uniform() * acc;
    const Index t = std::lower_bound(cumulative.data(),
                                     cumulative.data() + cumulative.size(), u) -
                    cumulative.data();
    const auto tri = mesh.triangles.row(std::min(t, areas.size() - 1));
    const Vec3 a = mesh.vertices.row(tri[0]);
    const Vec3 b = mesh.vertices.row(tri[1]);
    const Vec3 c = mesh.vertices.row(tri[2]);
    // Uniform barycentric via the square-root trick.
    const Real r1 = std::sqrt(rng.uniform());
    const Real r2 = rng.uniform();
    points.row(i) =
        ((1 - r1) * a + r1 * (1 - r2) * b + r1 * r2 * c).transpose();
  }
  return points;
}

SampleSet sample_training(const MeshQuery& myo, const MeshQuery& rv,
                          const SamplingConfig& cfg, Rng& rng) {
  cfg.validate();
  const Index n_on = cfg.n_on_per_structure;
  const Index n_off = cfg.n_off_per_structure;
  const Index per_structure = n_on + n_off;
  SampleSet set;
  set.coords.resize(2 * per_structure, 3);
  set.sdf.resize(2 * per_structure, 2);
  set.tags.resize(static_cast<size_t>(2 * per_structure));

  const MeshQuery* queries[2] = {&myo, &rv};
  for (int s = 0; s < 2; ++s) {
    const Index base = Index(s) * per_structure;
    const MatX3 on = sample_on_surface(queries[s]->mesh(), n_on, rng);
    set.coords.middleRows(base, n_on) = on;
    for (Index i = 0; i < n_off; ++i) {
      const Vec3 parent = on.row(i % n_on);
      set.coords.row(base + n_on + i) =
          (parent + rng.gaussian3(cfg.noise_sigma)).transpose();
    }
    const SampleTag on_tag = s == 0 ? SampleTag::ON_MYO : SampleTag::ON_RV;
    for (Index i = 0; i < per_structure; ++i)
      set.tags[static_cast<size_t>(base + i)] =
          i < n_on ? on_tag : SampleTag::OFF;
  }

  // Both reference channels for every row; exact recomputation against the
  // meshes rather than sigma-derived approximations.
  const Index n = set.size();
  parallel_for_chunks(n, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      const Vec3 p = set.coords.row(i);
      set.sdf(i, 0) = myo.signed_distance(p);
      set.sdf(i, 1) = rv.signed_distance(p);
    }
  });
  // On-surface rows are exactly on their mesh by construction.
  for (Index s = 0; s < 2; ++s)
    for (Index i = 0; i < n_on; ++i) set.sdf(s * per_structure + i, s) = 0.0;
  return set;
}

SampleSet sample_training(const TriangleMesh& myo, const TriangleMesh& rv,
                          const SamplingConfig& cfg, Rng& rng) {
  if (myo.empty() || rv.empty())
    throw DataError("sample_training: missing structure mesh");
  MeshQuery qa(myo), qb(rv);
  return sample_training(qa, qb, cfg, rng);
}

SampleSet sample_test_from_grid(const LabelGrid& grid,
                                const SamplingConfig& cfg,
                                const CanonicalFrame& frame) {
  cfg.validate();
  const SdfGrid edt_myo = distance_transform(grid, StructureId::MYO);
  const SdfGrid edt_rv = distance_transform(grid, StructureId::RV);

  const Real in_plane_diag =
      std::hypot(grid.spacing[0], grid.spacing[1]);
  const Real min_spacing = grid.spacing.minCoeff();
  // A zero band factor degenerates to the boundary-adjacent voxel layer.
  const Real band = std::max(cfg.test_band_factor * in_plane_diag, min_spacing);
  const Real on_tol = min_spacing + 1e-12;

  std::vector<Index> keep;
  for (Index v = 0; v < grid.size(); ++v) {
    if (std::abs(edt_myo.values[v]) <= band ||
        std::abs(edt_rv.values[v]) <= band)
      keep.push_back(v);
  }
  if (keep.empty())
    throw DataError("sample_test_from_grid: empty boundary band");

  SampleSet set;
  set.coords.resize(Index(keep.size()), 3);
  set.sdf.resize(Index(keep.size()), 2);
  set.tags.resize(keep.size());
  const Index nx = grid.dims[0], ny = grid.dims[1];
  for (size_t r = 0; r < keep.size(); ++r) {
    const Index v = keep[r];
    const int i = int(v % nx), j = int((v / nx) % ny), k = int(v / (nx * ny));
    set.coords.row(Index(r)) =
        frame.apply(grid.voxel_center(i, j, k)).transpose();
    set.sdf(Index(r), 0) = frame.apply_distance(edt_myo.values[v]);
    set.sdf(Index(r), 1) = frame.apply_distance(edt_rv.values[v]);
    if (std::abs(edt_myo.values[v]) <= on_tol)
      set.tags[r] = SampleTag::ON_MYO;
    else if (std::abs(edt_rv.values[v]) <= on_tol)
      set.tags[r] = SampleTag::ON_RV;
    else
      set.tags[r] = SampleTag::OFF;
  }
  return set;
}

namespace {

std::vector<Index> on_rows_for(const SampleSet& s, int structure) {
  return s.rows_with_tag(structure == 0 ? SampleTag::ON_MYO
                                        : SampleTag::ON_RV);
}

}  // namespace

SampleSet subsample_iso(const SampleSet& s, Index k_per_structure, Rng& rng) {
  std::vector<Index> picked;
  for (int structure = 0; structure < 2; ++structure) {
    const std::vector<Index> on = on_rows_for(s, structure);
    if (Index(on.size()) < k_per_structure)
      throw DataError("subsample_iso: not enough on-surface rows");
    for (Index i : rng.sample_without_replacement(Index(on.size()),
                                                  k_per_structure))
      picked.push_back(on[static_cast<size_t>(i)]);
  }
  return s.rows(picked);
}

SampleSet subsample_sax_like(const SampleSet& s, Index k_per_structure,
                             Real slice_spacing, Real slice_thickness_tol,
                             Rng& rng, bool* with_replacement) {
  if (!(slice_spacing > 0.0) || !(slice_thickness_tol >= 0.0))
    throw ConfigError("subsample_sax_like: bad slab parameters");
  if (with_replacement) *with_replacement = false;

  // Slab planes perpendicular to canonical z, anchored mid-extent so one
  // plane crosses the equator when the spacing exceeds the z extent.
  std::vector<Index> all_on;
  for (int structure = 0; structure < 2; ++structure) {
    const auto on = on_rows_for(s, structure);
    all_on.insert(all_on.end(), on.begin(), on.end());
  }
  if (all_on.empty()) throw DataError("subsample_sax_like: no on-surface rows");
  Real z_min = std::numeric_limits<Real>::infinity(), z_max = -z_min;
  for (Index r : all_on) {
    z_min = std::min(z_min, s.coords(r, 2));
    z_max = std::max(z_max, s.coords(r, 2));
  }
  const Real z_center = 0.5 * (z_min + z_max);

  auto in_slab = [&](Real z) {
    const Real offset = (z - z_center) / slice_spacing;
    const Real nearest = std::round(offset) * slice_spacing + z_center;
    return std::abs(z - nearest) <= slice_thickness_tol;
  };

  std::vector<Index> picked;
  for (int structure = 0; structure < 2; ++structure) {
    std::vector<Index> pool;
    for (Index r : on_rows_for(s, structure))
      if (in_slab(s.coords(r, 2))) pool.push_back(r);
    if (pool.empty())
      throw DataError("subsample_sax_like: no points within any slab");
    if (Index(pool.size()) >= k_per_structure) {
      for (Index i : rng.sample_without_replacement(Index(pool.size()),
                                                    k_per_structure))
        picked.push_back(pool[static_cast<size_t>(i)]);
    } else {
      if (with_replacement) *with_replacement = true;
      for (Index i = 0; i < k_per_structure; ++i)
        picked.push_back(
            pool[static_cast<size_t>(rng.uniform_index(pool.size()))]);
    }
  }
  return s.rows(picked);
}

SampleSet subsample_sax_plus_lax(const SampleSet& s_sax,
                                 const SampleSet& s_lax,
                                 Index k_sax_per_structure, Rng& rng) {
  if (s_lax.size() == 0) return subsample_iso(s_sax, k_sax_per_structure, rng);
  return SampleSet::concatenate(
      subsample_iso(s_sax, k_sax_per_structure, rng), s_lax);
}

SampleSet lax_slice(const SampleSet& s, Real tol) {
  std::vector<Index> picked;
  for (int structure = 0; structure < 2; ++structure)
    for (Index r : on_rows_for(s, structure))
      if (std::abs(s.coords(r, 1)) <= tol) picked.push_back(r);
  return s.rows(picked);
}

void validate_sample_set(const SampleSet& s, bool mesh_derived) {
  if (s.size() == 0) throw DataError("SampleSet: empty");
  if (s.sdf.rows() != s.size() || Index(s.tags.size()) != s.size())
    throw DataError("SampleSet: inconsistent row counts");
  const Real bound = 2.0 * std::sqrt(3.0);
  if ((s.sdf.array().abs() > bound).any())
    throw DataError("SampleSet: |sdf| exceeds the normalized-domain diagonal");
  if (!s.coords.allFinite() || !s.sdf.allFinite())
    throw DataError("SampleSet: non-finite entries");
  if (mesh_derived) {
    for (Index i = 0; i < s.size(); ++i) {
      const SampleTag t = s.tags[static_cast<size_t>(i)];
      if (t == SampleTag::ON_MYO && std::abs(s.sdf(i, 0)) > 1e-6)
        throw DataError("SampleSet: ON_MYO row with nonzero MYO sdf");
      if (t == SampleTag::ON_RV && std::abs(s.sdf(i, 1)) > 1e-6)
        throw DataError("SampleSet: ON_RV row with nonzero RV sdf");
    }
  }
}

}  // namespace nsdf
