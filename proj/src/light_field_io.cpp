#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "atomic_file.hpp"
#include "curvetac/errors.hpp"
#include "curvetac/light_field.hpp"

namespace curvetac {

namespace {

constexpr char kMagic[4] = {'T', 'L', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr size_t kHeaderBytes = 24;

void put_u32(std::string& out, std::uint32_t x) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((x >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view bytes, size_t pos) {
  std::uint32_t x = 0;
  for (int b = 0; b < 4; ++b) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + b])) << (8 * b);
  return x;
}

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 json_vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("light field metadata: expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string encode_light_field(const LightField& field) {
  nlohmann::ordered_json meta;
  meta["method"] = to_string(field.method);
  meta["mesh_hash"] = field.mesh_hash;
  meta["ref_depth_hash"] = field.ref_depth_hash;
  meta["bake_timestamp"] = field.bake_timestamp;
  meta["lights"] = nlohmann::ordered_json::array();
  for (const auto& l : field.lights) {
    meta["lights"].push_back(
        {{"position", vec_json(l.position)}, {"diffuse", vec_json(l.diffuse)}, {"specular", vec_json(l.specular)}});
  }
  const std::string meta_text = meta.dump();

  std::string out(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(field.width()));
  put_u32(out, static_cast<std::uint32_t>(field.height()));
  put_u32(out, static_cast<std::uint32_t>(field.num_lights()));
  put_u32(out, static_cast<std::uint32_t>(meta_text.size()));
  out += meta_text;
  out.reserve(out.size() + field.data().size() * 4);
  for (float f : field.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

LightField decode_light_field(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes) throw FormatError("light field: file shorter than its 24-byte header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("light field: bad magic (expected TLFB)");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kVersion) throw FormatError("light field: unsupported version " + std::to_string(version));
  const std::uint32_t w = get_u32(bytes, 8);
  const std::uint32_t h = get_u32(bytes, 12);
  const std::uint32_t n = get_u32(bytes, 16);
  const std::uint32_t meta_len = get_u32(bytes, 20);
  if (w == 0 || h == 0 || n == 0 || w > (1u << 16) || h > (1u << 16) || n > 4096) {
    throw FormatError("light field: implausible header " + std::to_string(w) + "x" + std::to_string(h) + ", " +
                      std::to_string(n) + " lights");
  }
  const std::uint64_t payload = static_cast<std::uint64_t>(w) * h * n * 3 * 4;
  const std::uint64_t expected = kHeaderBytes + static_cast<std::uint64_t>(meta_len) + payload;
  if (bytes.size() != expected) {
    throw FormatError("light field: truncated or oversized payload: header declares " + std::to_string(expected) +
                      " bytes, file has " + std::to_string(bytes.size()));
  }

  LightField field(static_cast<int>(w), static_cast<int>(h), static_cast<int>(n));
  try {
    const auto meta = nlohmann::json::parse(bytes.substr(kHeaderBytes, meta_len));
    field.method = parse_field_method(meta.at("method").get<std::string>());
    field.mesh_hash = meta.at("mesh_hash").get<std::string>();
    field.ref_depth_hash = meta.value("ref_depth_hash", std::string());
    field.bake_timestamp = meta.value("bake_timestamp", std::int64_t{0});
    for (const auto& l : meta.at("lights")) {
      LightSourceSpec spec;
      spec.position = json_vec(l.at("position"));
      spec.diffuse = json_vec(l.at("diffuse"));
      spec.specular = json_vec(l.at("specular"));
      field.lights.push_back(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("light field metadata: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("light field metadata: ") + e.what());
  }
  if (field.lights.size() != n) {
    throw FormatError("light field: metadata lists " + std::to_string(field.lights.size()) + " lights, header " +
                      std::to_string(n));
  }
  size_t pos = kHeaderBytes + meta_len;
  for (float& f : field.data()) {
    f = std::bit_cast<float>(get_u32(bytes, pos));
    pos += 4;
  }
  return field;
}

void save_light_field(const LightField& field, const std::filesystem::path& path) {
  write_file_atomic(path, encode_light_field(field));
}

LightField load_light_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open light field " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_light_field(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace curvetac
