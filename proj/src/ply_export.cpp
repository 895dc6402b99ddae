#include "curvetac/ply_export.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "atomic_file.hpp"
#include "curvetac/errors.hpp"

namespace curvetac {

namespace {

constexpr const char* kProperties[] = {"float x",  "float y",  "float z",  "float nx",     "float ny",
                                       "float nz", "float dx", "float dy", "float dz",     "uchar red",
                                       "uchar green", "uchar blue", "int light"};
constexpr size_t kRecordBytes = 9 * 4 + 3 + 4;

void put_f32(std::string& out, double x) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t x = 0;
  for (int b = 0; b < 4; ++b) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return x;
}

std::string header(size_t count) {
  std::string h = "ply\nformat binary_little_endian 1.0\ncomment light directions per membrane point\n";
  h += "element vertex " + std::to_string(count) + "\n";
  for (const char* p : kProperties) h += std::string("property ") + p + "\n";
  h += "end_header\n";
  return h;
}

}  // namespace

std::vector<FieldSample> field_samples(const LightField& field, const PixelSurface& surface) {
  std::vector<FieldSample> out;
  const int w = field.width();
  for (int m = 0; m < field.num_lights(); ++m) {
    for (int v = 0; v < field.height(); ++v) {
      for (int u = 0; u < w; ++u) {
        const size_t i = static_cast<size_t>(v) * w + u;
        if (!surface.valid[i] || field.is_zero(m, u, v)) continue;
        FieldSample s;
        s.position = surface.points[i].position;
        s.normal = surface.normals[i];
        s.direction = field.direction(m, u, v);
        for (int c = 0; c < 3; ++c) {
          s.rgb[c] = static_cast<std::uint8_t>(std::nearbyint(std::clamp((s.direction[c] + 1.0) * 127.5, 0.0, 255.0)));
        }
        s.light = m;
        out.push_back(s);
      }
    }
  }
  return out;
}

std::string encode_field_ply(const std::vector<FieldSample>& samples) {
  std::string out = header(samples.size());
  out.reserve(out.size() + samples.size() * kRecordBytes);
  for (const auto& s : samples) {
    for (int k = 0; k < 3; ++k) put_f32(out, s.position[k]);
    for (int k = 0; k < 3; ++k) put_f32(out, s.normal[k]);
    for (int k = 0; k < 3; ++k) put_f32(out, s.direction[k]);
    for (int k = 0; k < 3; ++k) out.push_back(static_cast<char>(s.rgb[k]));
    const auto light = static_cast<std::uint32_t>(s.light);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((light >> (8 * b)) & 0xFFu));
  }
  return out;
}

std::vector<FieldSample> decode_field_ply(std::string_view bytes) {
  const std::string_view end_marker = "end_header\n";
  const size_t end = bytes.find(end_marker);
  if (bytes.substr(0, 4) != "ply\n" || end == std::string_view::npos) throw FormatError("PLY: missing header");
  const std::string_view head = bytes.substr(0, end);
  const std::string_view key = "element vertex ";
  const size_t at = head.find(key);
  if (at == std::string_view::npos) throw FormatError("PLY: no vertex element");
  const size_t count = std::stoull(std::string(head.substr(at + key.size(), head.find('\n', at) - at - key.size())));
  if (std::string(bytes.substr(0, end + end_marker.size())) != header(count)) {
    throw FormatError("PLY: unexpected property layout");
  }
  const size_t body = end + end_marker.size();
  if (bytes.size() - body != count * kRecordBytes) throw FormatError("PLY: truncated vertex data");
  std::vector<FieldSample> out(count);
  const char* p = bytes.data() + body;
  for (auto& s : out) {
    for (int k = 0; k < 3; ++k, p += 4) s.position[k] = std::bit_cast<float>(get_u32(p));
    for (int k = 0; k < 3; ++k, p += 4) s.normal[k] = std::bit_cast<float>(get_u32(p));
    for (int k = 0; k < 3; ++k, p += 4) s.direction[k] = std::bit_cast<float>(get_u32(p));
    for (int k = 0; k < 3; ++k, ++p) s.rgb[k] = static_cast<std::uint8_t>(*p);
    s.light = static_cast<int>(get_u32(p));
    p += 4;
  }
  return out;
}

void save_field_ply(const std::vector<FieldSample>& samples, const std::filesystem::path& path) {
  write_file_atomic(path, encode_field_ply(samples));
}

}  // namespace curvetac
