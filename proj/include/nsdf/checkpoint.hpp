#pragma once

#include <string>

#include "nsdf/shapemodel.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// Single-file binary checkpoint: little-endian, length-prefixed arrays,
// CRC-32 trailer over everything before it.
//
//   magic "NSDF-CKP" + 7x 0x00 + 0x01      (16 bytes)
//   u32 version (= 1)
//   frame: 9x f64 rotation (row-major), 3x f64 translation, f64 scale
//   config: f64 lr, lambda_reg, val_latent_lr, weight_decay, noise_sigma,
//           test_band_factor, sax_slice_spacing, sax_thickness_tol;
//           u64 epochs, batch_size, latent_dim, validate_every,
//           val_latent_iters, hidden_width, hidden_layers, schedule_total,
//           schedule_per_batch, n_on, n_off, seed
//   decoder: u32 n_layers; per layer u32 rows, cols;
//            f64 direction (row-major), gain, bias
//   latents: u64 count; per entry u32 id length, id bytes, latent_dim f64
//   f64 best_validation_loss
//   u32 crc32 trailer
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const TrainedModel& model);

// Verifies magic, version and checksum before any deserialization work.
TrainedModel load_checkpoint(const std::string& path);

}  // namespace nsdf
