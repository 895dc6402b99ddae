#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace curvetac {

/// 8-bit RGB raster, row-major, three interleaved channels.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 0) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, fill) {}

  std::uint8_t& at(int u, int v, int c) { return data[(static_cast<size_t>(v) * width + u) * 3 + c]; }
  std::uint8_t at(int u, int v, int c) const { return data[(static_cast<size_t>(v) * width + u) * 3 + c]; }
  bool operator==(const RgbImage&) const = default;
};

/// Any 8/16-bit gray, gray+alpha, RGB, RGBA or palette PNG, converted to 8-bit RGB.
RgbImage load_png(const std::filesystem::path& path);
RgbImage decode_png(const std::string& bytes);

/// Deterministic encoder: fixed zlib level and filter set, no time chunk.
std::string encode_png(const RgbImage& img);
void save_png(const RgbImage& img, const std::filesystem::path& path);

}  // namespace curvetac
