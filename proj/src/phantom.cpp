#include "nsdf/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "nsdf/mesh_query.hpp"
#include "nsdf/parallel.hpp"

namespace nsdf {

void PhantomSpec::validate() const {
  if (!(lv_outer_radii.array() > 0).all() || !(rv_radii.array() > 0).all())
    throw ConfigError("PhantomSpec: radii must be positive");
  if (!(wall_thickness > 0) || wall_thickness >= lv_outer_radii.minCoeff())
    throw ConfigError("PhantomSpec: wall_thickness must be < min radius");
  if (bump_amplitude < 0 || bump_amplitude >= wall_thickness / 2)
    throw ConfigError("PhantomSpec: bump_amplitude must be < wall/2");
  if (bump_frequency < 0 || mesh_subdivisions < 1)
    throw ConfigError("PhantomSpec: bad frequency/subdivisions");
}

namespace {

// Smooth low-frequency modulation on the sphere in [-1, 1]: a few cosine
// waves along seeded directions.
struct BumpField {
  std::array<Vec3, 3> dirs;
  std::array<Real, 3> phases;
  Real frequency;

  static BumpField draw(Rng& rng, int frequency) {
    BumpField b;
    b.frequency = Real(frequency);
    for (int j = 0; j < 3; ++j) {
      Vec3 d(rng.gaussian(), rng.gaussian(), rng.gaussian());
      if (d.norm() < 1e-6) d = Vec3(1, 0, 0);
      b.dirs[static_cast<size_t>(j)] = d.normalized();
      b.phases[static_cast<size_t>(j)] =
          rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return b;
  }

  Real operator()(const Vec3& unit_dir) const {
    Real acc = 0;
    for (int j = 0; j < 3; ++j)
      acc += std::cos(frequency * std::numbers::pi *
                          unit_dir.dot(dirs[static_cast<size_t>(j)]) +
                      phases[static_cast<size_t>(j)]);
    return acc / 3.0;
  }
};

// Radius of the axis-aligned ellipsoid along a unit direction.
Real ellipsoid_radius(const Vec3& radii, const Vec3& d) {
  const Vec3 q = d.cwiseQuotient(radii);
  return 1.0 / q.norm();
}

TriangleMesh radial_mesh(const TriangleMesh& sphere, const Vec3& center,
                         const Vec3& radii, const BumpField& bump,
                         Real amplitude, Real radial_offset) {
  TriangleMesh out = sphere;
  for (Index i = 0; i < sphere.vertices.rows(); ++i) {
    const Vec3 d = sphere.vertices.row(i).transpose();
    const Real r =
        ellipsoid_radius(radii, d) + amplitude * bump(d) + radial_offset;
    out.vertices.row(i) = (center + r * d).transpose();
  }
  return out;
}

Real min_separation(const TriangleMesh& a, const TriangleMesh& b) {
  const MeshQuery qa(a), qb(b);
  Real lowest = std::numeric_limits<Real>::infinity();
  for (Index i = 0; i < b.vertices.rows(); ++i)
    lowest = std::min(lowest, qa.signed_distance(b.vertices.row(i).transpose()));
  for (Index i = 0; i < a.vertices.rows(); ++i)
    lowest = std::min(lowest, qb.signed_distance(a.vertices.row(i).transpose()));
  return lowest;
}

}  // namespace

LabelGrid rasterize(const TriangleMesh& myo, const TriangleMesh& rv,
                    const Vec3& spacing) {
  // Outer shell component = the one with the larger enclosed volume.
  std::vector<TriangleMesh> parts = connected_components(myo);
  if (parts.size() != 2)
    throw DataError("rasterize: wall mesh must have exactly two components");
  const Index outer_idx =
      std::abs(signed_volume(parts[0])) >= std::abs(signed_volume(parts[1]))
          ? 0
          : 1;
  const MeshQuery q_wall(myo);
  const MeshQuery q_outer(parts[static_cast<size_t>(outer_idx)]);
  const MeshQuery q_rv(rv);

  Vec3 lo, hi, lo2, hi2;
  mesh_bounds(myo, lo, hi);
  mesh_bounds(rv, lo2, hi2);
  lo = lo.cwiseMin(lo2) - 2.0 * spacing;
  hi = hi.cwiseMax(hi2) + 2.0 * spacing;

  LabelGrid grid;
  grid.spacing = spacing;
  grid.origin = lo;
  for (int a = 0; a < 3; ++a)
    grid.dims[a] = int(std::ceil((hi[a] - lo[a]) / spacing[a])) + 1;
  grid.labels.assign(static_cast<size_t>(grid.size()), 0);

  const Index nx = grid.dims[0], ny = grid.dims[1];
  parallel_for_chunks(grid.size(), [&](Index begin, Index end) {
    for (Index v = begin; v < end; ++v) {
      const int i = int(v % nx), j = int((v / nx) % ny), k = int(v / (nx * ny));
      const Vec3 p = grid.voxel_center(i, j, k);
      Label label = Label::BACKGROUND;
      if (q_wall.winding_number(p) >= 0.5)
        label = Label::MYO;
      else if (q_outer.winding_number(p) >= 0.5)
        label = Label::LVBP;
      else if (q_rv.winding_number(p) >= 0.5)
        label = Label::RV;
      grid.labels[static_cast<size_t>(v)] = uint8_t(label);
    }
  });
  return grid;
}

PhantomCase generate(const PhantomSpec& spec, const Vec3& grid_spacing) {
  spec.validate();
  Rng rng = Rng(spec.seed).stream(stream_label::kPhantom);
  Rng rng_lv = rng.stream(1);
  Rng rng_rv = rng.stream(2);
  const BumpField lv_bump = BumpField::draw(rng_lv, spec.bump_frequency);
  const BumpField rv_bump = BumpField::draw(rng_rv, spec.bump_frequency);

  const TriangleMesh sphere = icosphere(spec.mesh_subdivisions);

  TriangleMesh outer = radial_mesh(sphere, Vec3::Zero(), spec.lv_outer_radii,
                                   lv_bump, spec.bump_amplitude, 0.0);
  TriangleMesh inner = radial_mesh(sphere, Vec3::Zero(), spec.lv_outer_radii,
                                   lv_bump, spec.bump_amplitude,
                                   -spec.wall_thickness);
  PhantomCase out;
  out.spec = spec;
  out.myo_mesh = merge_meshes({outer, flip_orientation(inner)});
  out.myo_mesh.structure = StructureId::MYO;

  Vec3 rv_radii = spec.rv_radii;
  bool placed = false;
  for (int attempt = 0; attempt < 5 && !placed; ++attempt) {
    TriangleMesh rv = radial_mesh(sphere, spec.rv_offset, rv_radii, rv_bump,
                                  std::min(spec.bump_amplitude,
                                           0.4 * rv_radii.minCoeff()),
                                  0.0);
    if (min_separation(outer, rv) > 0.0) {
      out.rv_mesh = std::move(rv);
      placed = true;
    } else {
      rv_radii *= 0.85;
    }
  }
  if (!placed)
    throw DataError("phantom: RV chamber overlaps the shell after 5 shrinks");
  out.rv_mesh.structure = StructureId::RV;

  out.landmarks.lv_cm = area_weighted_centroid(out.myo_mesh);
  out.landmarks.rv_cm = area_weighted_centroid(out.rv_mesh);
  out.landmarks.la_cm = spec.la_offset;

  out.label_grid = rasterize(out.myo_mesh, out.rv_mesh, grid_spacing);
  return out;
}

LabelGrid rasterize_anisotropic(const PhantomCase& c, Real in_plane_mm,
                                Real thru_plane_mm) {
  if (!(in_plane_mm > 0) || !(thru_plane_mm > 0))
    throw ConfigError("rasterize_anisotropic: spacing must be positive");
  return rasterize(c.myo_mesh, c.rv_mesh,
                   Vec3(in_plane_mm, in_plane_mm, thru_plane_mm));
}

PhantomSpec jitter_spec(const PhantomSpec& base, const CohortJitter& jitter,
                        uint64_t seed, int index) {
  Rng rng = Rng(seed).stream(stream_label::kPhantom, uint64_t(index));
  PhantomSpec spec = base;
  spec.seed = rng.next_u64();
  for (int a = 0; a < 3; ++a) {
    spec.lv_outer_radii[a] *=
        rng.uniform(1.0 - jitter.radii_frac, 1.0 + jitter.radii_frac);
    spec.rv_radii[a] *=
        rng.uniform(1.0 - jitter.radii_frac, 1.0 + jitter.radii_frac);
  }
  spec.wall_thickness *=
      rng.uniform(1.0 - jitter.wall_frac, 1.0 + jitter.wall_frac);
  for (int a = 0; a < 3; ++a) {
    spec.rv_offset[a] += rng.uniform(-jitter.offset_mm, jitter.offset_mm);
    spec.la_offset[a] += rng.uniform(-jitter.offset_mm, jitter.offset_mm);
  }
  spec.bump_amplitude =
      rng.uniform(jitter.amplitude_min, jitter.amplitude_max);
  spec.bump_frequency = int(rng.uniform_index(
      uint64_t(jitter.bump_frequency_max - jitter.bump_frequency_min + 1))) +
                        jitter.bump_frequency_min;
  // Keep invariants satisfiable under extreme draws.
  spec.wall_thickness =
      std::min(spec.wall_thickness, 0.8 * spec.lv_outer_radii.minCoeff());
  spec.bump_amplitude =
      std::min(spec.bump_amplitude, 0.45 * spec.wall_thickness);
  return spec;
}

std::vector<PhantomCase> generate_cohort(int n, const PhantomSpec& base,
                                         const CohortJitter& jitter,
                                         uint64_t seed,
                                         const Vec3& grid_spacing) {
  std::vector<PhantomCase> cohort;
  cohort.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    PhantomCase c = generate(jitter_spec(base, jitter, seed, i), grid_spacing);
    char id[32];
    std::snprintf(id, sizeof(id), "case_%03d", i);
    c.id = id;
    cohort.push_back(std::move(c));
  }
  return cohort;
}

}  // namespace nsdf
