#include "curvetac/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "atomic_file.hpp"
#include "curvetac/errors.hpp"

namespace curvetac {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open mesh file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<size_t>(h);
  }
};

// Welds points closer than kVertexMergeTolerance. The first occurrence keeps
// its position, so the result does not depend on hash iteration order.
class VertexWelder {
 public:
  int insert(const Vec3& p) {
    const CellKey c = cell(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (int idx : it->second) {
            if ((points_[idx] - p).norm() <= kVertexMergeTolerance) return idx;
          }
        }
      }
    }
    const int idx = static_cast<int>(points_.size());
    points_.push_back(p);
    cells_[c].push_back(idx);
    return idx;
  }

  std::vector<Vec3> take() { return std::move(points_); }

 private:
  static CellKey cell(const Vec3& p) {
    return {static_cast<std::int64_t>(std::floor(p.x() / kVertexMergeTolerance)),
            static_cast<std::int64_t>(std::floor(p.y() / kVertexMergeTolerance)),
            static_cast<std::int64_t>(std::floor(p.z() / kVertexMergeTolerance))};
  }

  std::vector<Vec3> points_;
  std::unordered_map<CellKey, std::vector<int>, CellHash> cells_;
};

TriangleMesh build_from_soup(const std::vector<std::array<Vec3, 3>>& triangles) {
  if (triangles.empty()) throw FormatError("mesh file contains no triangles");
  VertexWelder welder;
  std::vector<Face> faces;
  faces.reserve(triangles.size());
  for (const auto& tri : triangles) {
    faces.push_back({welder.insert(tri[0]), welder.insert(tri[1]), welder.insert(tri[2])});
  }
  return TriangleMesh(welder.take(), std::move(faces));
}

bool looks_like_ascii_stl(std::string_view bytes) {
  size_t i = 0;
  while (i < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[i]))) ++i;
  if (bytes.substr(i, 5) != "solid") return false;
  // Some binary writers put "solid" in the 80-byte header; ASCII files have a
  // facet keyword early on.
  return bytes.find("facet", i) != std::string_view::npos;
}

TriangleMesh parse_binary_stl(std::string_view bytes) {
  if (bytes.size() < 84) throw FormatError("binary STL shorter than its 84-byte header");
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + 80, 4);
  const size_t expected = 84 + static_cast<size_t>(count) * 50;
  if (bytes.size() != expected) {
    throw FormatError("binary STL declares " + std::to_string(count) + " triangles (" +
                      std::to_string(expected) + " bytes) but the file has " + std::to_string(bytes.size()) +
                      " bytes");
  }
  std::vector<std::array<Vec3, 3>> tris(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    const char* rec = bytes.data() + 84 + static_cast<size_t>(t) * 50 + 12;  // skip normal
    for (int k = 0; k < 3; ++k) {
      float xyz[3];
      std::memcpy(xyz, rec + 12 * k, 12);
      tris[t][k] = Vec3(xyz[0], xyz[1], xyz[2]);
    }
  }
  return build_from_soup(tris);
}

TriangleMesh parse_ascii_stl(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  std::string token;
  std::vector<Vec3> corners;
  while (in >> token) {
    if (token != "vertex") continue;
    Vec3 p;
    if (!(in >> p.x() >> p.y() >> p.z())) throw FormatError("ASCII STL: malformed vertex record");
    corners.push_back(p);
  }
  if (corners.size() % 3 != 0) throw FormatError("ASCII STL: vertex count is not a multiple of three");
  std::vector<std::array<Vec3, 3>> tris(corners.size() / 3);
  for (size_t t = 0; t < tris.size(); ++t) tris[t] = {corners[3 * t], corners[3 * t + 1], corners[3 * t + 2]};
  return build_from_soup(tris);
}

int parse_obj_index(std::string_view token, int vertex_count, int line_no) {
  const auto slash = token.find('/');
  const std::string_view head = token.substr(0, slash);
  int idx = 0;
  const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0) {
    throw FormatError("OBJ line " + std::to_string(line_no) + ": bad face index '" + std::string(token) + "'");
  }
  const int resolved = idx > 0 ? idx - 1 : vertex_count + idx;
  if (resolved < 0 || resolved >= vertex_count) {
    throw FormatError("OBJ line " + std::to_string(line_no) + ": face index " + std::to_string(idx) +
                      " out of range");
  }
  return resolved;
}

}  // namespace

MeshFormat mesh_format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".stl") return MeshFormat::stl;
  if (ext == ".obj") return MeshFormat::obj;
  throw FormatError("cannot infer mesh format from extension '" + ext + "' (expected .stl or .obj)");
}

TriangleMesh parse_stl(std::string_view bytes) {
  if (bytes.size() >= 84) {
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, 4);
    if (bytes.size() == 84 + static_cast<size_t>(count) * 50) return parse_binary_stl(bytes);
  }
  if (looks_like_ascii_stl(bytes)) return parse_ascii_stl(bytes);
  return parse_binary_stl(bytes);
}

TriangleMesh parse_obj(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<Vec3> positions;
  std::vector<std::array<Vec3, 3>> tris;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) {
        throw FormatError("OBJ line " + std::to_string(line_no) + ": malformed vertex");
      }
      positions.push_back(p);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) poly.push_back(parse_obj_index(tok, static_cast<int>(positions.size()), line_no));
      if (poly.size() < 3) throw FormatError("OBJ line " + std::to_string(line_no) + ": face with fewer than 3 vertices");
      for (size_t k = 1; k + 1 < poly.size(); ++k) {
        tris.push_back({positions[poly[0]], positions[poly[k]], positions[poly[k + 1]]});
      }
    }
  }
  return build_from_soup(tris);
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  const std::string bytes = read_file(path);
  return format == MeshFormat::stl ? parse_stl(bytes) : parse_obj(bytes);
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  return load_mesh(path, mesh_format_from_path(path));
}

void save_stl_binary(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::string out(84, '\0');
  const char header[] = "binary STL";
  std::memcpy(out.data(), header, sizeof(header) - 1);
  const auto count = static_cast<std::uint32_t>(mesh.num_faces());
  std::memcpy(out.data() + 80, &count, 4);
  out.reserve(84 + 50 * static_cast<size_t>(count));
  for (int f = 0; f < mesh.num_faces(); ++f) {
    char rec[50] = {};
    const Vec3& n = mesh.face_normal(f);
    float vals[12] = {static_cast<float>(n.x()), static_cast<float>(n.y()), static_cast<float>(n.z())};
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = mesh.vertex(mesh.face(f)[k]);
      for (int a = 0; a < 3; ++a) vals[3 + 3 * k + a] = static_cast<float>(p[a]);
    }
    std::memcpy(rec, vals, sizeof(vals));
    out.append(rec, 50);
  }
  write_file_atomic(path, out);
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  for (const Vec3& p : mesh.vertices()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const Face& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  write_file_atomic(path, out.str());
}

}  // namespace curvetac
