#include "nsdf/io.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nsdf {

namespace {

constexpr char kLabelMagic[16] = {'N', 'S', 'D', 'F', '-', 'L', 'B', 'L',
                                  0,   0,   0,   0,   0,   0,   0,   1};
constexpr char kSdfMagic[16] = {'N', 'S', 'D', 'F', '-', 'S', 'D', 'F',
                                0,   0,   0,   0,   0,   0,   0,   1};
constexpr char kSampleMagic[16] = {'N', 'S', 'D', 'F', '-', 'S', 'M', 'P',
                                   0,   0,   0,   0,   0,   0,   0,   1};

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot open for reading: " + path);
  return in;
}

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated file: " + path);
  return value;
}

void put_grid_header(std::ostream& out, const char magic[16], const Vec3i& dims,
                     const Vec3& spacing, const Vec3& origin) {
  out.write(magic, 16);
  for (int a = 0; a < 3; ++a) put(out, uint32_t(dims[a]));
  for (int a = 0; a < 3; ++a) put(out, double(spacing[a]));
  for (int a = 0; a < 3; ++a) put(out, double(origin[a]));
}

void get_grid_header(std::istream& in, const char magic[16],
                     const std::string& path, Vec3i& dims, Vec3& spacing,
                     Vec3& origin) {
  char head[16];
  in.read(head, 16);
  if (!in || std::memcmp(head, magic, 16) != 0)
    throw DataError("bad magic in " + path);
  for (int a = 0; a < 3; ++a) dims[a] = int(get<uint32_t>(in, path));
  for (int a = 0; a < 3; ++a) spacing[a] = get<double>(in, path);
  for (int a = 0; a < 3; ++a) origin[a] = get<double>(in, path);
}

const char* tag_name(SampleTag tag) {
  switch (tag) {
    case SampleTag::ON_MYO: return "on_myo";
    case SampleTag::ON_RV: return "on_rv";
    default: return "off";
  }
}

SampleTag tag_from_string(const std::string& s, const std::string& path) {
  if (s == "on_myo" || s == "0") return SampleTag::ON_MYO;
  if (s == "on_rv" || s == "1") return SampleTag::ON_RV;
  if (s == "off" || s == "2") return SampleTag::OFF;
  throw DataError("unknown sample tag '" + s + "' in " + path);
}

}  // namespace

void write_obj(const std::string& path, const TriangleMesh& mesh) {
  auto out = open_out(path, false);
  char line[128];
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    std::snprintf(line, sizeof(line), "v %.17g %.17g %.17g\n",
                  mesh.vertices(v, 0), mesh.vertices(v, 1), mesh.vertices(v, 2));
    out << line;
  }
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    std::snprintf(line, sizeof(line), "f %d %d %d\n", mesh.triangles(t, 0) + 1,
                  mesh.triangles(t, 1) + 1, mesh.triangles(t, 2) + 1);
    out << line;
  }
}

TriangleMesh read_obj(const std::string& path) {
  auto in = open_in(path, false);
  std::vector<Vec3> verts;
  std::vector<Eigen::Vector3i> tris;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    if (kind == "v") {
      Vec3 p;
      ss >> p[0] >> p[1] >> p[2];
      if (!ss) throw DataError("bad vertex line in " + path);
      verts.push_back(p);
    } else if (kind == "f") {
      std::array<int, 3> f{};
      for (int e = 0; e < 3; ++e) {
        std::string token;
        ss >> token;
        if (token.empty()) throw DataError("bad face line in " + path);
        f[static_cast<size_t>(e)] = std::atoi(token.c_str()) - 1;
      }
      tris.push_back({f[0], f[1], f[2]});
    }
  }
  TriangleMesh mesh;
  mesh.vertices.resize(Index(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i)
    mesh.vertices.row(Index(i)) = verts[i].transpose();
  mesh.triangles.resize(Index(tris.size()), 3);
  for (size_t i = 0; i < tris.size(); ++i)
    mesh.triangles.row(Index(i)) = tris[i].transpose();
  return mesh;
}

void write_ply(const std::string& path, const TriangleMesh& mesh) {
  auto out = open_out(path, true);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.num_vertices() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.num_triangles() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (Index v = 0; v < mesh.num_vertices(); ++v)
    for (int a = 0; a < 3; ++a) put(out, double(mesh.vertices(v, a)));
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    put(out, uint8_t(3));
    for (int e = 0; e < 3; ++e) put(out, int32_t(mesh.triangles(t, e)));
  }
}

TriangleMesh read_ply(const std::string& path) {
  auto in = open_in(path, true);
  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw DataError("not a PLY file: " + path);

  Index n_verts = -1, n_faces = -1;
  bool doubles = true;
  std::string element;
  std::vector<std::string> vertex_props;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    if (kind == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "binary_little_endian")
        throw DataError("unsupported PLY format in " + path);
    } else if (kind == "element") {
      std::string name;
      Index count;
      ss >> name >> count;
      element = name;
      if (name == "vertex") n_verts = count;
      if (name == "face") n_faces = count;
    } else if (kind == "property" && element == "vertex") {
      std::string type, name;
      ss >> type;
      if (type == "list") throw DataError("unexpected vertex list in " + path);
      ss >> name;
      if (type == "float" || type == "float32") doubles = false;
      vertex_props.push_back(name);
    } else if (kind == "end_header") {
      break;
    }
  }
  if (n_verts < 0 || n_faces < 0 || vertex_props.size() < 3)
    throw DataError("incomplete PLY header in " + path);

  TriangleMesh mesh;
  mesh.vertices.resize(n_verts, 3);
  for (Index v = 0; v < n_verts; ++v) {
    for (size_t p = 0; p < vertex_props.size(); ++p) {
      const double value =
          doubles ? get<double>(in, path) : double(get<float>(in, path));
      if (p < 3) mesh.vertices(v, Index(p)) = value;
    }
  }
  mesh.triangles.resize(n_faces, 3);
  for (Index t = 0; t < n_faces; ++t) {
    const uint8_t count = get<uint8_t>(in, path);
    if (count != 3) throw DataError("non-triangular face in " + path);
    for (int e = 0; e < 3; ++e)
      mesh.triangles(t, e) = get<int32_t>(in, path);
  }
  return mesh;
}

void write_label_grid(const std::string& path, const LabelGrid& grid) {
  grid.validate();
  auto out = open_out(path, true);
  put_grid_header(out, kLabelMagic, grid.dims, grid.spacing, grid.origin);
  out.write(reinterpret_cast<const char*>(grid.labels.data()),
            std::streamsize(grid.labels.size()));
}

LabelGrid read_label_grid(const std::string& path) {
  auto in = open_in(path, true);
  LabelGrid grid;
  get_grid_header(in, kLabelMagic, path, grid.dims, grid.spacing, grid.origin);
  grid.labels.resize(static_cast<size_t>(grid.size()));
  in.read(reinterpret_cast<char*>(grid.labels.data()),
          std::streamsize(grid.labels.size()));
  if (!in) throw DataError("truncated label grid: " + path);
  grid.validate();
  return grid;
}

void write_sdf_grid(const std::string& path, const SdfGrid& grid) {
  grid.validate();
  auto out = open_out(path, true);
  put_grid_header(out, kSdfMagic, grid.dims, grid.spacing, grid.origin);
  for (Index i = 0; i < grid.values.size(); ++i)
    put(out, float(grid.values[i]));
}

SdfGrid read_sdf_grid(const std::string& path) {
  auto in = open_in(path, true);
  SdfGrid grid;
  get_grid_header(in, kSdfMagic, path, grid.dims, grid.spacing, grid.origin);
  grid.values.resize(grid.size());
  for (Index i = 0; i < grid.values.size(); ++i)
    grid.values[i] = Real(get<float>(in, path));
  grid.validate();
  return grid;
}

void write_sample_csv(const std::string& path, const SampleSet& set) {
  auto out = open_out(path, false);
  out << "x,y,z,sdf_myo,sdf_rv,tag\n";
  char line[192];
  for (Index i = 0; i < set.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                  set.coords(i, 0), set.coords(i, 1), set.coords(i, 2),
                  set.sdf(i, 0), set.sdf(i, 1),
                  tag_name(set.tags[static_cast<size_t>(i)]));
    out << line;
  }
}

SampleSet read_sample_csv(const std::string& path) {
  auto in = open_in(path, false);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,z,sdf_myo,sdf_rv,tag", 0) != 0)
    throw DataError("bad sample CSV header in " + path);
  std::vector<std::array<Real, 5>> rows;
  std::vector<SampleTag> tags;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::array<Real, 5> row{};
    std::string field;
    for (int c = 0; c < 5; ++c) {
      if (!std::getline(ss, field, ','))
        throw DataError("short sample row in " + path);
      row[static_cast<size_t>(c)] = std::strtod(field.c_str(), nullptr);
    }
    if (!std::getline(ss, field)) throw DataError("missing tag in " + path);
    rows.push_back(row);
    tags.push_back(tag_from_string(field, path));
  }
  SampleSet set;
  set.coords.resize(Index(rows.size()), 3);
  set.sdf.resize(Index(rows.size()), 2);
  set.tags = tags;
  for (size_t i = 0; i < rows.size(); ++i) {
    set.coords.row(Index(i)) << rows[i][0], rows[i][1], rows[i][2];
    set.sdf.row(Index(i)) << rows[i][3], rows[i][4];
  }
  return set;
}

void write_sample_binary(const std::string& path, const SampleSet& set) {
  auto out = open_out(path, true);
  out.write(kSampleMagic, 16);
  put(out, uint64_t(set.size()));
  for (Index i = 0; i < set.size(); ++i) {
    for (int c = 0; c < 3; ++c) put(out, double(set.coords(i, c)));
    for (int c = 0; c < 2; ++c) put(out, double(set.sdf(i, c)));
    put(out, uint8_t(set.tags[static_cast<size_t>(i)]));
  }
}

SampleSet read_sample_binary(const std::string& path) {
  auto in = open_in(path, true);
  char head[16];
  in.read(head, 16);
  if (!in || std::memcmp(head, kSampleMagic, 16) != 0)
    throw DataError("bad magic in " + path);
  const uint64_t n = get<uint64_t>(in, path);
  SampleSet set;
  set.coords.resize(Index(n), 3);
  set.sdf.resize(Index(n), 2);
  set.tags.resize(n);
  for (Index i = 0; i < Index(n); ++i) {
    for (int c = 0; c < 3; ++c) set.coords(i, c) = get<double>(in, path);
    for (int c = 0; c < 2; ++c) set.sdf(i, c) = get<double>(in, path);
    const uint8_t tag = get<uint8_t>(in, path);
    if (tag > 2) throw DataError("bad tag byte in " + path);
    set.tags[static_cast<size_t>(i)] = SampleTag(tag);
  }
  return set;
}

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int b = 0; b < 8; ++b)
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  uint32_t crc = seed ^ 0xFFFFFFFFu;
  for (size_t i = 0; i < len; ++i)
    crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  auto in = open_in(path, true);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw DataError("cannot read " + path);
  return bytes;
}

void write_file_bytes(const std::string& path,
                      const std::vector<uint8_t>& bytes) {
  auto out = open_out(path, true);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
}

}  // namespace nsdf
