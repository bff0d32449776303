#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsdf/grid.hpp"
#include "nsdf/mesh.hpp"
#include "nsdf/sampling.hpp"
#include "nsdf/types.hpp"

namespace nsdf {

// ASCII OBJ (v / f lines, triangles only).
void write_obj(const std::string& path, const TriangleMesh& mesh);
TriangleMesh read_obj(const std::string& path);

// Binary little-endian PLY with double vertex coordinates.
void write_ply(const std::string& path, const TriangleMesh& mesh);
TriangleMesh read_ply(const std::string& path);

// Flat binary volumes. 16-byte magic, 3x u32 dims, 3x f64 spacing,
// 3x f64 origin, then payload in x-fastest order: u8 labels for label grids,
// f32 values for SDF grids.
void write_label_grid(const std::string& path, const LabelGrid& grid);
LabelGrid read_label_grid(const std::string& path);
void write_sdf_grid(const std::string& path, const SdfGrid& grid);
SdfGrid read_sdf_grid(const std::string& path);

// Sample sets: CSV with header "x,y,z,sdf_myo,sdf_rv,tag", and a binary
// format (16-byte magic, u64 n, rows of 5x f64 + u8 tag).
void write_sample_csv(const std::string& path, const SampleSet& set);
SampleSet read_sample_csv(const std::string& path);
void write_sample_binary(const std::string& path, const SampleSet& set);
SampleSet read_sample_binary(const std::string& path);

// CRC-32 (IEEE, reflected 0xEDB88320), used by the checkpoint trailer.
uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed = 0);

// Whole-file helpers.
std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path,
                      const std::vector<uint8_t>& bytes);

}  // namespace nsdf
