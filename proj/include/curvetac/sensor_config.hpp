#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "curvetac/depth.hpp"
#include "curvetac/light_field.hpp"
#include "curvetac/mesh.hpp"
#include "curvetac/renderer.hpp"

namespace curvetac {

/// A complete simulated sensor. Paths are kept as written and resolved
/// against `base_dir` (the directory holding the config file).
struct SensorDescription {
  std::filesystem::path base_dir;
  std::string mesh_path;
  RigidTransform transform;
  double fov_deg = 0.0;
  CameraIntrinsics camera;  // fov in radians, derived from fov_deg
  std::vector<LightSourceSpec> lights;
  MaterialParams material;
  DeformationConfig smoothing;
  std::optional<std::string> background;
  std::optional<std::string> reference_depth;
  FieldMethod method = FieldMethod::transport;
  double snap_distance = 2e-3;
  double t_scale = 1.0;

  std::filesystem::path resolve(const std::string& p) const;
  std::filesystem::path mesh_file() const { return resolve(mesh_path); }
};

/// Parse and validate. Omitted material, smoothing, method, snap_distance
/// and t_scale take their defaults; smoothing defaults scale with the image
/// width. Schema problems and invariant violations throw ValidationError
/// naming the offending field; unreadable or unparsable documents and
/// missing referenced files throw FormatError.
SensorDescription parse_sensor_config(const std::string& json_text, const std::filesystem::path& base_dir,
                                      bool check_files = true);
SensorDescription load_sensor_config(const std::filesystem::path& path);

/// Canonical JSON with every field explicit; parsing it again reproduces the
/// same description.
std::string serialize_sensor_config(const SensorDescription& desc);

/// The membrane mesh moved into the camera frame.
TriangleMesh load_aligned_mesh(const SensorDescription& desc);

/// Metric no-contact depth: the configured reference depth file if present,
/// otherwise the aligned membrane ray-cast through every pixel. Ray-cast
/// values are rounded to float32, the precision of a saved depth file.
DepthMap sensor_reference_depth(const SensorDescription& desc, const TriangleMesh& aligned, int jobs = 1);

}  // namespace curvetac
