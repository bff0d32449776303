#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "nsdf/checkpoint.hpp"
#include "nsdf/io.hpp"
#include "nsdf/phantom.hpp"
#include "oracles.hpp"

using namespace nsdf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("nsdf_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("OBJ round trip preserves geometry") {
  Rng rng(51);
  const TriangleMesh mesh = oracle::random_star_mesh(rng);
  TempDir dir;
  write_obj(dir.file("m.obj"), mesh);
  const TriangleMesh back = read_obj(dir.file("m.obj"));
  REQUIRE(back.num_vertices() == mesh.num_vertices());
  REQUIRE(back.num_triangles() == mesh.num_triangles());
  CHECK((back.vertices - mesh.vertices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.triangles - mesh.triangles).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("PLY round trip is exact (double precision payload)") {
  Rng rng(52);
  const TriangleMesh mesh = oracle::random_star_mesh(rng);
  TempDir dir;
  write_ply(dir.file("m.ply"), mesh);
  const TriangleMesh back = read_ply(dir.file("m.ply"));
  CHECK((back.vertices - mesh.vertices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.triangles - mesh.triangles).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("label grid binary round trip") {
  Rng rng(53);
  const LabelGrid grid = oracle::random_label_grid(rng, 8);
  TempDir dir;
  write_label_grid(dir.file("g.lbl"), grid);
  const LabelGrid back = read_label_grid(dir.file("g.lbl"));
  CHECK(back.dims == grid.dims);
  CHECK((back.spacing - grid.spacing).norm() == 0.0);
  CHECK((back.origin - grid.origin).norm() == 0.0);
  CHECK(back.labels == grid.labels);

  // Magic layout: 8 name bytes, 7 zero bytes, a 1.
  const auto bytes = read_file_bytes(dir.file("g.lbl"));
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "NSDF-LBL");
  for (int i = 8; i < 15; ++i) CHECK(bytes[static_cast<size_t>(i)] == 0);
  CHECK(bytes[15] == 1);
}

TEST_CASE("sdf grid round trip (f32 payload)") {
  SdfGrid g = make_normalized_grid(9);
  Rng rng(54);
  for (Index i = 0; i < g.values.size(); ++i) g.values[i] = rng.uniform(-2, 2);
  TempDir dir;
  write_sdf_grid(dir.file("g.sdf"), g);
  const SdfGrid back = read_sdf_grid(dir.file("g.sdf"));
  CHECK(back.dims == g.dims);
  for (Index i = 0; i < g.values.size(); ++i)
    CHECK(back.values[i] == doctest::Approx(g.values[i]).epsilon(1e-6));
}

TEST_CASE("sample set CSV and binary round trips") {
  SampleSet set;
  Rng rng(55);
  set.coords.resize(20, 3);
  set.sdf.resize(20, 2);
  set.tags.resize(20);
  for (Index i = 0; i < 20; ++i) {
    set.coords.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1),
        rng.uniform(-1, 1);
    set.sdf.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1);
    set.tags[static_cast<size_t>(i)] = SampleTag(i % 3);
  }
  TempDir dir;
  write_sample_csv(dir.file("s.csv"), set);
  const SampleSet csv = read_sample_csv(dir.file("s.csv"));
  REQUIRE(csv.size() == 20);
  CHECK((csv.coords - set.coords).cwiseAbs().maxCoeff() == 0.0);
  CHECK((csv.sdf - set.sdf).cwiseAbs().maxCoeff() == 0.0);
  CHECK(csv.tags == set.tags);

  write_sample_binary(dir.file("s.bin"), set);
  const SampleSet bin = read_sample_binary(dir.file("s.bin"));
  CHECK((bin.coords - set.coords).cwiseAbs().maxCoeff() == 0.0);
  CHECK(bin.tags == set.tags);
}

TEST_CASE("crc32 known vector") {
  const char* s = "123456789";
  CHECK(crc32(reinterpret_cast<const uint8_t*>(s), 9) == 0xCBF43926u);
}

TEST_CASE("checkpoint round trip is byte-identical") {
  TrainedModel model;
  model.config.latent_dim = 6;
  model.config.hidden_width = 10;
  model.config.hidden_layers = 2;
  model.decoder = make_decoder(6, 10, 2);
  Rng rng(56);
  init_params(model.decoder, rng);
  model.latents["case_000"] = init_latent(rng, 6);
  model.latents["case_001"] = init_latent(rng, 6);
  model.frame.scale = 0.0123;
  model.best_validation_loss = 0.321;

  TempDir dir;
  save_checkpoint(dir.file("a.ckpt"), model);
  const TrainedModel back = load_checkpoint(dir.file("a.ckpt"));
  save_checkpoint(dir.file("b.ckpt"), back);
  CHECK(read_file_bytes(dir.file("a.ckpt")) ==
        read_file_bytes(dir.file("b.ckpt")));
  CHECK(back.best_validation_loss == model.best_validation_loss);
  CHECK(back.frame.scale == model.frame.scale);
  CHECK(back.latents.size() == 2);
  CHECK((back.latents.at("case_001") - model.latents.at("case_001")).norm() ==
        0.0);
  for (size_t l = 0; l < model.decoder.layers.size(); ++l)
    CHECK((back.decoder.layers[l].direction -
           model.decoder.layers[l].direction)
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("corrupted or mismatched checkpoints fail loudly") {
  TrainedModel model;
  model.decoder = make_decoder(4, 6, 1);
  Rng rng(57);
  init_params(model.decoder, rng);
  model.config.latent_dim = 4;
  TempDir dir;
  save_checkpoint(dir.file("c.ckpt"), model);

  auto bytes = read_file_bytes(dir.file("c.ckpt"));
  bytes[40] ^= 0xFF;  // flip a payload byte -> checksum mismatch
  write_file_bytes(dir.file("bad.ckpt"), bytes);
  CHECK_THROWS_AS(load_checkpoint(dir.file("bad.ckpt")), DataError);

  auto version_bytes = read_file_bytes(dir.file("c.ckpt"));
  version_bytes[16] = 9;  // unsupported version
  // Re-seal the checksum so only the version check can fire.
  const uint32_t crc =
      crc32(version_bytes.data(), version_bytes.size() - 4);
  std::memcpy(version_bytes.data() + version_bytes.size() - 4, &crc, 4);
  write_file_bytes(dir.file("v9.ckpt"), version_bytes);
  CHECK_THROWS_AS(load_checkpoint(dir.file("v9.ckpt")), DataError);

  CHECK_THROWS_AS(load_checkpoint(dir.file("missing.ckpt")), DataError);
}
