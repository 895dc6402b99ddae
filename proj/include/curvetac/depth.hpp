#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "curvetac/mesh.hpp"

namespace curvetac {

/// Pinhole camera looking along +z. Pixel (u, v) with integer coordinates is
/// the centre of column u, row v; rows grow along +y.
struct CameraIntrinsics {
  int width = 0;
  int height = 0;
  double fov = 0.0;  // radians
  double cx = 0.0;
  double cy = 0.0;
  double z_near = 0.0;
  double z_far = 0.0;

  /// Principal point at the image centre. Throws ValidationError on bad values.
  static CameraIntrinsics make(int width, int height, double fov, double z_near, double z_far);
  void validate() const;

  double fu() const;
  double fv() const;

  /// Camera-frame direction through pixel (u, v) with unit z component.
  Vec3 pixel_ray(double u, double v) const { return Vec3((u - cx) / fu(), (v - cy) / fv(), 1.0); }
  /// Forward pinhole projection of a camera-frame point with z > 0.
  Eigen::Vector2d project(const Vec3& p) const { return {fu() * p.x() / p.z() + cx, fv() * p.y() / p.z() + cy}; }
};

/// Row-major depth raster. Metric maps hold metres; normalised maps hold
/// values in [0, 1].
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  bool normalised = false;

  DepthMap() = default;
  DepthMap(int w, int h, double fill = 0.0, bool is_normalised = false)
      : width(w), height(h), values(static_cast<size_t>(w) * h, fill), normalised(is_normalised) {}

  double& at(int u, int v) { return values[static_cast<size_t>(v) * width + u]; }
  double at(int u, int v) const { return values[static_cast<size_t>(v) * width + u]; }
  size_t size() const { return values.size(); }
};

struct PointCloud {
  int width = 0;
  int height = 0;
  std::vector<Vec3> points;
  std::vector<std::uint8_t> valid;

  const Vec3& at(int u, int v) const { return points[static_cast<size_t>(v) * width + u]; }
  bool is_valid(int u, int v) const { return valid[static_cast<size_t>(v) * width + u] != 0; }
};

/// Gaussian smoothing used by the elastic deformation approximation.
struct DeformationConfig {
  int kernel_size = 21;
  double sigma = 7.0;

  void validate() const;
  /// 21 px / sigma 7 at 640 px image width, scaled linearly with width.
  static DeformationConfig scaled_default(int image_width);
};

/// Normalised 1-D Gaussian taps; the 2-D kernel is their outer product.
std::vector<double> gaussian_kernel_1d(const DeformationConfig& cfg);

/// z_near * z_far / (z_far - d * (z_far - z_near)) per pixel.
DepthMap unnormalize_depth(const DepthMap& d, const CameraIntrinsics& cam);

/// Separable Gaussian convolution with edge replication.
DepthMap gaussian_blur(const DepthMap& d, const DeformationConfig& cfg);

/// Elastic membrane approximation: the contact indentation D_ref - D is
/// blurred and subtracted from D_ref, and the element-wise minimum with D
/// keeps the contact itself undeformed:
///   D_deform = min(D, D_ref - G * (D_ref - D)).
DepthMap elastic_deformation(const DepthMap& d, const DepthMap& d_ref, const DeformationConfig& cfg);

/// Back-project every pixel: x = (u - cx) z / fu, y = (v - cy) z / fv.
/// Pixels with non-finite or non-positive depth are marked invalid.
PointCloud inverse_project(const DepthMap& d, const CameraIntrinsics& cam);

struct SpherePrimitive {
  Vec3 centre = Vec3::Zero();
  double radius = 0.0;
};

/// Axis-aligned box of full extents `dims` in its own frame, placed by `pose`.
struct BoxPrimitive {
  RigidTransform pose;
  Vec3 dims = Vec3::Zero();
};

using Primitive = std::variant<std::monostate, SpherePrimitive, BoxPrimitive>;

/// Ray-cast depth of the membrane (optional) and a primitive, both in camera
/// coordinates. Depth is the z of the nearest hit clamped to [z_near, z_far];
/// misses record z_far.
DepthMap synth_depth(const CameraIntrinsics& cam, const TriangleMesh* membrane, const Primitive& primitive,
                     int jobs = 1);

// ---------------------------------------------------------------------------
// PFM files with a JSON sidecar at "<path>.json".

struct DepthSidecar {
  bool normalised = false;
  double z_near = 0.0;
  double z_far = 0.0;
};

/// Grayscale little-endian PFM ("Pf", scale -1). Values are stored as float32
/// with rows bottom-to-top.
std::string encode_pfm(const DepthMap& d);
/// Accepts either endianness; the normalised flag is left false.
DepthMap decode_pfm(std::string_view bytes);

std::filesystem::path sidecar_path(const std::filesystem::path& pfm_path);
void save_depth_map(const DepthMap& d, const std::filesystem::path& path, double z_near, double z_far);
/// Reads the PFM and its sidecar; the sidecar sets the normalised flag.
DepthMap load_depth_map(const std::filesystem::path& path, DepthSidecar* sidecar = nullptr);

}  // namespace curvetac
