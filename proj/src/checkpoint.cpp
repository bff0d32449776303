#include "nsdf/checkpoint.hpp"

#include <cstring>

#include "nsdf/io.hpp"

namespace nsdf {

namespace {

constexpr char kMagic[16] = {'N', 'S', 'D', 'F', '-', 'C', 'K', 'P',
                             0,   0,   0,   0,   0,   0,   0,   1};

struct Writer {
  std::vector<uint8_t> bytes;

  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void put_f64(double v) { put(v); }
  void put_u64(uint64_t v) { put(v); }
  void put_u32(uint32_t v) { put(v); }
};

struct Reader {
  const std::vector<uint8_t>& bytes;
  size_t at = 0;

  template <typename T>
  T get() {
    if (at + sizeof(T) > bytes.size())
      throw DataError("checkpoint: truncated payload");
    T v;
    std::memcpy(&v, bytes.data() + at, sizeof(T));
    at += sizeof(T);
    return v;
  }
};

}  // namespace

void save_checkpoint(const std::string& path, const TrainedModel& model) {
  model.decoder.validate();
  Writer w;
  w.bytes.insert(w.bytes.end(), kMagic, kMagic + 16);
  w.put_u32(kCheckpointVersion);

  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) w.put_f64(model.frame.rotation(r, c));
  for (int a = 0; a < 3; ++a) w.put_f64(model.frame.translation[a]);
  w.put_f64(model.frame.scale);

  const TrainConfig& cfg = model.config;
  w.put_f64(cfg.lr);
  w.put_f64(cfg.lambda_reg);
  w.put_f64(cfg.val_latent_lr);
  w.put_f64(cfg.weight_decay);
  w.put_f64(cfg.sampling.noise_sigma);
  w.put_f64(cfg.sampling.test_band_factor);
  w.put_f64(cfg.sampling.sax_slice_spacing);
  w.put_f64(cfg.sampling.sax_thickness_tol);
  w.put_u64(uint64_t(cfg.epochs));
  w.put_u64(uint64_t(cfg.batch_size));
  w.put_u64(uint64_t(cfg.latent_dim));
  w.put_u64(uint64_t(cfg.validate_every));
  w.put_u64(uint64_t(cfg.val_latent_iters));
  w.put_u64(uint64_t(cfg.hidden_width));
  w.put_u64(uint64_t(cfg.hidden_layers));
  w.put_u64(uint64_t(cfg.effective_schedule_total()));
  w.put_u64(cfg.schedule_per_batch ? 1 : 0);
  w.put_u64(uint64_t(cfg.sampling.n_on_per_structure));
  w.put_u64(uint64_t(cfg.sampling.n_off_per_structure));
  w.put_u64(cfg.seed);

  w.put_u32(uint32_t(model.decoder.layers.size()));
  for (const auto& layer : model.decoder.layers) {
    w.put_u32(uint32_t(layer.out_dim()));
    w.put_u32(uint32_t(layer.in_dim()));
    for (Index r = 0; r < layer.out_dim(); ++r)
      for (Index c = 0; c < layer.in_dim(); ++c)
        w.put_f64(layer.direction(r, c));
    for (Index r = 0; r < layer.out_dim(); ++r) w.put_f64(layer.gain[r]);
    for (Index r = 0; r < layer.out_dim(); ++r) w.put_f64(layer.bias[r]);
  }

  w.put_u64(uint64_t(model.latents.size()));
  for (const auto& [id, z] : model.latents) {
    if (z.size() != model.decoder.latent_dim)
      throw DataError("checkpoint: latent size mismatch for '" + id + "'");
    w.put_u32(uint32_t(id.size()));
    w.bytes.insert(w.bytes.end(), id.begin(), id.end());
    for (Index i = 0; i < z.size(); ++i) w.put_f64(z[i]);
  }
  w.put_f64(model.best_validation_loss);

  const uint32_t crc = crc32(w.bytes.data(), w.bytes.size());
  w.put_u32(crc);
  write_file_bytes(path, w.bytes);
}

TrainedModel load_checkpoint(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < 16 + 4 + 4 ||
      std::memcmp(bytes.data(), kMagic, 16) != 0)
    throw DataError("checkpoint: bad magic in " + path);

  // Checksum and version gate before any payload parsing.
  uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + bytes.size() - 4, 4);
  const uint32_t computed = crc32(bytes.data(), bytes.size() - 4);
  if (stored_crc != computed)
    throw DataError("checkpoint: checksum mismatch in " + path);

  Reader r{bytes, 16};
  const uint32_t version = r.get<uint32_t>();
  if (version != kCheckpointVersion)
    throw DataError("checkpoint: unsupported version " +
                    std::to_string(version) + " in " + path);

  TrainedModel model;
  for (int row = 0; row < 3; ++row)
    for (int c = 0; c < 3; ++c)
      model.frame.rotation(row, c) = r.get<double>();
  for (int a = 0; a < 3; ++a) model.frame.translation[a] = r.get<double>();
  model.frame.scale = r.get<double>();

  TrainConfig& cfg = model.config;
  cfg.lr = r.get<double>();
  cfg.lambda_reg = r.get<double>();
  cfg.val_latent_lr = r.get<double>();
  cfg.weight_decay = r.get<double>();
  cfg.sampling.noise_sigma = r.get<double>();
  cfg.sampling.test_band_factor = r.get<double>();
  cfg.sampling.sax_slice_spacing = r.get<double>();
  cfg.sampling.sax_thickness_tol = r.get<double>();
  cfg.epochs = int(r.get<uint64_t>());
  cfg.batch_size = int(r.get<uint64_t>());
  cfg.latent_dim = Index(r.get<uint64_t>());
  cfg.validate_every = int(r.get<uint64_t>());
  cfg.val_latent_iters = int(r.get<uint64_t>());
  cfg.hidden_width = Index(r.get<uint64_t>());
  cfg.hidden_layers = int(r.get<uint64_t>());
  cfg.schedule_total = long(r.get<uint64_t>());
  cfg.schedule_per_batch = r.get<uint64_t>() != 0;
  cfg.sampling.n_on_per_structure = Index(r.get<uint64_t>());
  cfg.sampling.n_off_per_structure = Index(r.get<uint64_t>());
  cfg.seed = r.get<uint64_t>();

  const uint32_t n_layers = r.get<uint32_t>();
  model.decoder.latent_dim = cfg.latent_dim;
  model.decoder.layers.resize(n_layers);
  for (uint32_t l = 0; l < n_layers; ++l) {
    DenseLayer& layer = model.decoder.layers[l];
    const uint32_t rows = r.get<uint32_t>();
    const uint32_t cols = r.get<uint32_t>();
    layer.direction.resize(rows, cols);
    for (uint32_t row = 0; row < rows; ++row)
      for (uint32_t c = 0; c < cols; ++c)
        layer.direction(row, c) = r.get<double>();
    layer.gain.resize(rows);
    for (uint32_t row = 0; row < rows; ++row) layer.gain[row] = r.get<double>();
    layer.bias.resize(rows);
    for (uint32_t row = 0; row < rows; ++row) layer.bias[row] = r.get<double>();
  }
  model.decoder.validate();

  const uint64_t n_latents = r.get<uint64_t>();
  for (uint64_t i = 0; i < n_latents; ++i) {
    const uint32_t len = r.get<uint32_t>();
    if (r.at + len > bytes.size()) throw DataError("checkpoint: bad id length");
    std::string id(reinterpret_cast<const char*>(bytes.data() + r.at), len);
    r.at += len;
    VecX z(cfg.latent_dim);
    for (Index j = 0; j < cfg.latent_dim; ++j) z[j] = r.get<double>();
    model.latents.emplace(std::move(id), std::move(z));
  }
  model.best_validation_loss = r.get<double>();
  model.frame.validate();
  return model;
}

}  // namespace nsdf
