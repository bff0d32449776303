#include <doctest.h>

#include "nsdf/distance_transform.hpp"
#include "oracles.hpp"

using namespace nsdf;

TEST_CASE("single-voxel structure on an anisotropic line") {
  LabelGrid grid;
  grid.dims = Vec3i(1, 1, 3);
  grid.spacing = Vec3(1, 1, 2);
  grid.labels = {uint8_t(Label::BACKGROUND), uint8_t(Label::RV),
                 uint8_t(Label::BACKGROUND)};
  const SdfGrid sdf = distance_transform(grid, StructureId::RV);
  CHECK(sdf.values[0] == 2.0);
  CHECK(sdf.values[1] == -2.0);
  CHECK(sdf.values[2] == 2.0);
}

TEST_CASE("planar half-space interface") {
  LabelGrid grid;
  grid.dims = Vec3i(4, 4, 4);
  grid.spacing = Vec3(1, 1, 1);
  grid.labels.assign(64, uint8_t(Label::BACKGROUND));
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i)
        grid.labels[static_cast<size_t>(grid.index(i, j, k))] =
            uint8_t(Label::MYO);
  const SdfGrid sdf = distance_transform(grid, StructureId::MYO);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      CHECK(sdf.at(i, j, 0) == -2.0);
      CHECK(sdf.at(i, j, 1) == -1.0);
      CHECK(sdf.at(i, j, 2) == 1.0);
      CHECK(sdf.at(i, j, 3) == 2.0);
    }
}

TEST_CASE("all-but-one-corner structure matches the all-pairs oracle") {
  LabelGrid grid;
  grid.dims = Vec3i(4, 4, 4);
  grid.spacing = Vec3(1.5, 0.7, 2.25);
  grid.labels.assign(64, uint8_t(Label::RV));
  grid.labels[0] = uint8_t(Label::BACKGROUND);
  const SdfGrid got = distance_transform(grid, StructureId::RV);
  const SdfGrid want = oracle::distance_transform(grid, StructureId::RV);
  for (Index i = 0; i < got.size(); ++i) CHECK(got.values[i] == want.values[i]);
}

TEST_CASE("uniform structure is an error") {
  LabelGrid grid;
  grid.dims = Vec3i(2, 2, 2);
  grid.labels.assign(8, uint8_t(Label::MYO));
  CHECK_THROWS_AS(distance_transform(grid, StructureId::MYO), DataError);
  CHECK_THROWS_AS(distance_transform(grid, StructureId::RV), DataError);
}

TEST_CASE("random grids match the brute-force transform exactly") {
  Rng rng(424242);
  int tested = 0;
  while (tested < 40) {
    const LabelGrid grid = oracle::random_label_grid(rng, 10);
    for (StructureId s : {StructureId::MYO, StructureId::RV}) {
      bool any_in = false, any_out = false;
      for (uint8_t l : grid.labels) {
        (label_in_structure(Label(l), s) ? any_in : any_out) = true;
      }
      if (!any_in || !any_out) continue;
      const SdfGrid got = distance_transform(grid, s);
      const SdfGrid want = oracle::distance_transform(grid, s);
      for (Index i = 0; i < got.size(); ++i)
        CHECK(got.values[i] == want.values[i]);
      ++tested;
    }
  }
}
