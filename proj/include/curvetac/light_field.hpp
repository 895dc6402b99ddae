#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "curvetac/depth.hpp"
#include "curvetac/mesh.hpp"

namespace curvetac {

enum class FieldMethod { linear, plane, geodesic, transport };

std::string to_string(FieldMethod m);
/// Throws ValidationError for unknown names.
FieldMethod parse_field_method(const std::string& name);

/// Point light inside the sensor, camera frame; colours per RGB channel in [0, 1].
struct LightSourceSpec {
  Vec3 position = Vec3::Zero();
  Vec3 diffuse = Vec3::Ones();
  Vec3 specular = Vec3::Ones();

  bool operator==(const LightSourceSpec&) const = default;
};

/// Baked per-pixel light directions, one raster per light.
///
/// Each vector is the unit direction in which light from that source arrives
/// at the pixel's membrane point (pointing away from the light). Zero vectors
/// mark pixels without a direction.
class LightField {
 public:
  LightField() = default;
  LightField(int width, int height, int num_lights);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_lights() const { return num_lights_; }

  Vec3 direction(int light, int u, int v) const;
  void set_direction(int light, int u, int v, const Vec3& d);
  bool is_zero(int light, int u, int v) const;

  /// Raw float32 payload: light-major, then row-major, xyz interleaved.
  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  FieldMethod method = FieldMethod::linear;
  std::string mesh_hash;
  std::string ref_depth_hash;
  std::int64_t bake_timestamp = 0;
  std::vector<LightSourceSpec> lights;

  bool operator==(const LightField&) const = default;

 private:
  size_t offset(int light, int u, int v) const {
    return ((static_cast<size_t>(light) * height_ + v) * width_ + u) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  int num_lights_ = 0;
  std::vector<float> data_;
};

struct BakeJob {
  const TriangleMesh* mesh = nullptr;  // in its own frame; `transform` maps it into the camera frame
  RigidTransform transform;
  CameraIntrinsics camera;
  DepthMap reference_depth;  // metric
  std::vector<LightSourceSpec> lights;
  FieldMethod method = FieldMethod::transport;
  int jobs = 1;
  double snap_distance = 2e-3;  // metres
  double t_scale = 1.0;         // heat-method time step factor
};

struct BakeReport {
  int total_pixels = 0;
  int valid_pixels = 0;
  std::vector<int> failed_pixels;    // per light: valid pixels left without a direction
  std::vector<double> light_seconds;  // per light wall time
  double setup_seconds = 0.0;
  double total_seconds = 0.0;

  double valid_fraction() const { return total_pixels ? static_cast<double>(valid_pixels) / total_pixels : 0.0; }
};

/// Pixels whose reference point lies within the snap distance of the mesh and
/// whose reference normal is defined. Shared by every method.
struct PixelSurface {
  std::vector<SurfacePoint> points;  // closest mesh point per pixel
  std::vector<Vec3> normals;         // reference surface normal per pixel
  std::vector<std::uint8_t> valid;
};

PixelSurface locate_pixels(const TriangleMesh& aligned, const CameraIntrinsics& cam, const DepthMap& reference_depth,
                           double snap_distance, int jobs);

/// Bake one field. Non-linear directions are projected into the tangent plane
/// of the reference surface normal computed from the reference depth with the
/// renderer's normal estimator. Throws ValidationError for inconsistent inputs
/// and NumericalError when a solver fails.
LightField bake(const BakeJob& job, BakeReport* report = nullptr);

/// FNV-1a 64 over the float32 depth values, as 16 hex digits.
std::string depth_hash(const DepthMap& d);

// TLFB files: "TLFB", u32 version, u32 width, u32 height, u32 num_lights,
// u32 metadata_length, UTF-8 JSON metadata, float32 payload; little-endian.
std::string encode_light_field(const LightField& field);
LightField decode_light_field(std::string_view bytes);
void save_light_field(const LightField& field, const std::filesystem::path& path);
LightField load_light_field(const std::filesystem::path& path);

}  // namespace curvetac
