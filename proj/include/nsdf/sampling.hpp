#pragma once

#include <vector>

#include "nsdf/canonical.hpp"
#include "nsdf/grid.hpp"
#include "nsdf/mesh.hpp"
#include "nsdf/mesh_query.hpp"
#include "nsdf/rng.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

enum class SampleTag : uint8_t { ON_MYO = 0, ON_RV = 1, OFF = 2 };

// Coordinates paired with two-channel reference signed distances (MYO, RV),
// in normalized units.
struct SampleSet {
  MatX3 coords;
  MatX2 sdf;
  std::vector<SampleTag> tags;

  Index size() const { return coords.rows(); }
  SampleSet rows(const std::vector<Index>& which) const;
  static SampleSet concatenate(const SampleSet& a, const SampleSet& b);
  std::vector<Index> rows_with_tag(SampleTag tag) const;
};

struct SamplingConfig {
  Index n_on_per_structure = 1024;
  Index n_off_per_structure = 1024;
  Real noise_sigma = 0.33;   // normalized units
  Real test_band_factor = 2.0;
  // SAX-like simulation knobs (normalized units; non-paper defaults).
  Real sax_slice_spacing = 0.16;
  Real sax_thickness_tol = 0.01;

  void validate() const {
    if (n_on_per_structure <= 0 || n_off_per_structure <= 0)
      throw ConfigError("SamplingConfig: counts must be positive");
    if (!(noise_sigma > 0.0))
      throw ConfigError("SamplingConfig: noise_sigma must be positive");
    if (test_band_factor < 0.0)
      throw ConfigError("SamplingConfig: test_band_factor must be >= 0");
  }
};

// n points drawn area-uniformly on the mesh (triangle by area, then uniform
// barycentric coordinates).
MatX3 sample_on_surface(const TriangleMesh& mesh, Index n, Rng& rng);

// Training rows for one shape: per structure, n_on on-surface points plus
// n_off Gaussian-perturbed copies; every row carries exact signed distances
// to both canonicalized meshes. Row order is MYO block (on, then off), then
// the RV block.
SampleSet sample_training(const MeshQuery& myo, const MeshQuery& rv,
                          const SamplingConfig& cfg, Rng& rng);
SampleSet sample_training(const TriangleMesh& myo, const TriangleMesh& rv,
                          const SamplingConfig& cfg, Rng& rng);

// Test rows from a label grid: voxels within the spec'd band of either
// boundary (|EDT| <= max(band_factor * in-plane diagonal, min spacing)).
// Rows carry both EDT values; coordinates and distances are mapped through
// `frame`. Boundary-adjacent voxels (|EDT| <= min spacing) are tagged as
// on-surface for the corresponding structure (their sdf stays the EDT value).
SampleSet sample_test_from_grid(const LabelGrid& grid,
                                const SamplingConfig& cfg,
                                const CanonicalFrame& frame);

// k on-surface rows per structure, uniform without replacement.
SampleSet subsample_iso(const SampleSet& s, Index k_per_structure, Rng& rng);

// Short-axis-stack simulation: keep on-surface rows within
// slice_thickness_tol of parallel planes perpendicular to canonical z
// (spacing slice_spacing, anchored at the mid-extent of the on-surface
// rows), then draw k per structure. Draws use replacement when a structure's
// slab population is smaller than k; *with_replacement reports that.
SampleSet subsample_sax_like(const SampleSet& s, Index k_per_structure,
                             Real slice_spacing, Real slice_thickness_tol,
                             Rng& rng, bool* with_replacement = nullptr);

// k random SAX rows per structure concatenated with all long-axis rows.
SampleSet subsample_sax_plus_lax(const SampleSet& s_sax,
                                 const SampleSet& s_lax,
                                 Index k_sax_per_structure, Rng& rng);

// Long-axis (4CH-analog) cut: on-surface rows within tol of the canonical
// x-z plane.
SampleSet lax_slice(const SampleSet& s, Real tol);

// Consistency check used by tests and debug tooling; `mesh_derived` enables
// the sdf==0 requirement on on-surface rows.
void validate_sample_set(const SampleSet& s, bool mesh_derived);

}  // namespace nsdf
