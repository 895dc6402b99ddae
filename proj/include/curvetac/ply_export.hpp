#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "curvetac/light_field.hpp"

namespace curvetac {

/// One exported sample: membrane point, reference normal, baked direction.
struct FieldSample {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  Vec3 direction = Vec3::Zero();
  std::uint8_t rgb[3] = {0, 0, 0};  // direction mapped from [-1, 1] to [0, 255]
  int light = 0;
};

/// Samples for every valid pixel and light with a non-zero direction.
std::vector<FieldSample> field_samples(const LightField& field, const PixelSurface& surface);

/// Binary little-endian PLY: float x y z nx ny nz dx dy dz, uchar red green
/// blue, int light.
std::string encode_field_ply(const std::vector<FieldSample>& samples);
std::vector<FieldSample> decode_field_ply(std::string_view bytes);
void save_field_ply(const std::vector<FieldSample>& samples, const std::filesystem::path& path);

}  // namespace curvetac
