#pragma once

#include <vector>

#include "curvetac/depth.hpp"
#include "curvetac/image_io.hpp"
#include "curvetac/light_field.hpp"

namespace curvetac {

/// Phong reflectance of the membrane coating.
struct MaterialParams {
  double k_a = 1.0;
  double k_d = 0.6;
  double k_s = 0.2;
  double alpha = 16.0;

  void validate() const;
  bool operator==(const MaterialParams&) const = default;
};

struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> valid;

  const Vec3& at(int u, int v) const { return normals[static_cast<size_t>(v) * width + u]; }
  bool is_valid(int u, int v) const { return valid[static_cast<size_t>(v) * width + u] != 0; }
};

/// Sobel derivatives of the point grid (indices clamped at the image border),
/// crossed and oriented toward the camera. Pixels with an invalid point in
/// their 3x3 neighbourhood or a vanishing cross product are invalid.
NormalMap surface_normals(const PointCloud& cloud);

enum class AmbientKind { none, solid, background };

struct Ambient {
  AmbientKind kind = AmbientKind::none;
  Vec3 colour = Vec3::Zero();             // solid: RGB in [0, 1]
  const RgbImage* background = nullptr;  // background: aligned image

  static Ambient none() { return {}; }
  static Ambient solid(const Vec3& rgb) { return {AmbientKind::solid, rgb, nullptr}; }
  static Ambient image(const RgbImage& bg) { return {AmbientKind::background, Vec3::Zero(), &bg}; }
};

/// Below this L.N the light counts as grazing and adds no specular term.
inline constexpr double kGrazingCosine = 1e-5;

/// Unclamped intensity on the [0, 255] scale, three doubles per pixel:
///   I = k_a i_a + sum_m k_d max(L.N, 0) i_md + k_s max(R.V, 0)^alpha i_ms
/// with L the negated baked direction, R = 2 (L.N) N - L and V = (0, 0, 1).
/// The specular term is skipped when L.N <= kGrazingCosine.
std::vector<double> shade_radiance(const PointCloud& cloud, const NormalMap& normals, const LightField& field,
                                   const std::vector<LightSourceSpec>& lights, const MaterialParams& mat,
                                   const Ambient& ambient, int jobs = 1);

/// Clamp to [0, 255] and round half to even.
RgbImage quantize(const std::vector<double>& radiance, int width, int height);

RgbImage phong_shade(const PointCloud& cloud, const NormalMap& normals, const LightField& field,
                     const std::vector<LightSourceSpec>& lights, const MaterialParams& mat, const Ambient& ambient,
                     int jobs = 1);

/// Everything a frame needs besides the depth map.
struct RenderSetup {
  CameraIntrinsics camera;
  DepthMap reference_depth;  // metric, no contact
  DeformationConfig smoothing;
  MaterialParams material;
  std::vector<LightSourceSpec> lights;
  const LightField* field = nullptr;
  Ambient ambient;
};

/// unnormalise (if needed) -> elastic deformation -> back-projection ->
/// Sobel normals -> Phong shading.
RgbImage render_frame(const DepthMap& depth, const RenderSetup& setup, int jobs = 1);

}  // namespace curvetac
