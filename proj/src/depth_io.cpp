#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "atomic_file.hpp"
#include "curvetac/depth.hpp"
#include "curvetac/errors.hpp"

namespace curvetac {

namespace {

std::string read_all(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(std::string("cannot open ") + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Next whitespace-delimited header token starting at pos.
std::string_view header_token(std::string_view bytes, size_t& pos) {
  while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  const size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

}  // namespace

std::string encode_pfm(const DepthMap& d) {
  std::string out = "Pf\n" + std::to_string(d.width) + " " + std::to_string(d.height) + "\n-1.0\n";
  const size_t header = out.size();
  out.resize(header + d.size() * 4);
  char* dst = out.data() + header;
  for (int row = d.height - 1; row >= 0; --row) {
    for (int u = 0; u < d.width; ++u) {
      const float f = static_cast<float>(d.at(u, row));
      std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      std::memcpy(dst, &bits, 4);
      dst += 4;
    }
  }
  return out;
}

DepthMap decode_pfm(std::string_view bytes) {
  size_t pos = 0;
  const std::string_view magic = header_token(bytes, pos);
  if (magic == "PF") throw FormatError("PFM: colour (PF) files are not depth maps; expected grayscale Pf");
  if (magic != "Pf") throw FormatError("PFM: bad magic, expected 'Pf'");
  const std::string w_tok(header_token(bytes, pos));
  const std::string h_tok(header_token(bytes, pos));
  const std::string s_tok(header_token(bytes, pos));
  int w = 0;
  int h = 0;
  double scale = 0.0;
  try {
    size_t used = 0;
    w = std::stoi(w_tok, &used);
    if (used != w_tok.size()) throw std::invalid_argument(w_tok);
    h = std::stoi(h_tok, &used);
    if (used != h_tok.size()) throw std::invalid_argument(h_tok);
    scale = std::stod(s_tok, &used);
    if (used != s_tok.size()) throw std::invalid_argument(s_tok);
  } catch (const std::exception&) {
    throw FormatError("PFM: malformed header");
  }
  if (w <= 0 || h <= 0 || scale == 0.0 || !std::isfinite(scale)) throw FormatError("PFM: invalid header values");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("PFM: header not terminated");
  }
  ++pos;  // single whitespace byte before the raster
  const size_t expected = static_cast<size_t>(w) * h * 4;
  if (bytes.size() - pos != expected) {
    throw FormatError("PFM: header declares " + std::to_string(w) + "x" + std::to_string(h) + " (" +
                      std::to_string(expected) + " bytes) but the payload has " + std::to_string(bytes.size() - pos) +
                      " bytes");
  }
  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);
  DepthMap d(w, h);
  const char* src = bytes.data() + pos;
  for (int row = h - 1; row >= 0; --row) {
    for (int u = 0; u < w; ++u) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, src, 4);
      src += 4;
      if (swap) bits = __builtin_bswap32(bits);
      d.at(u, row) = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return d;
}

std::filesystem::path sidecar_path(const std::filesystem::path& pfm_path) {
  return std::filesystem::path(pfm_path.string() + ".json");
}

void save_depth_map(const DepthMap& d, const std::filesystem::path& path, double z_near, double z_far) {
  nlohmann::ordered_json side;
  side["normalised"] = d.normalised;
  side["z_near"] = z_near;
  side["z_far"] = z_far;
  write_file_atomic(path, encode_pfm(d));
  write_file_atomic(sidecar_path(path), side.dump(2) + "\n");
}

DepthMap load_depth_map(const std::filesystem::path& path, DepthSidecar* sidecar) {
  DepthMap d = decode_pfm(read_all(path, "depth map"));
  const auto side_file = sidecar_path(path);
  if (!std::filesystem::exists(side_file)) {
    throw FormatError("depth map " + path.string() + " has no sidecar " + side_file.string());
  }
  DepthSidecar side;
  try {
    const auto j = nlohmann::json::parse(read_all(side_file, "depth sidecar"));
    side.normalised = j.at("normalised").get<bool>();
    side.z_near = j.at("z_near").get<double>();
    side.z_far = j.at("z_far").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("depth sidecar " + side_file.string() + ": " + e.what());
  }
  d.normalised = side.normalised;
  if (sidecar) *sidecar = side;
  return d;
}

}  // namespace curvetac
