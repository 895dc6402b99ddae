#include "curvetac/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "curvetac/errors.hpp"
#include "parallel.hpp"

namespace curvetac {

namespace {

void check_unit_range(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(std::string("material.") + name + " must lie in [0, 1]");
}

}  // namespace

void MaterialParams::validate() const {
  check_unit_range(k_a, "k_a");
  check_unit_range(k_d, "k_d");
  check_unit_range(k_s, "k_s");
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw ValidationError("material.alpha must be >= 1");
}

NormalMap surface_normals(const PointCloud& cloud) {
  const int w = cloud.width;
  const int h = cloud.height;
  NormalMap out;
  out.width = w;
  out.height = h;
  out.normals.assign(static_cast<size_t>(w) * h, Vec3::Zero());
  out.valid.assign(static_cast<size_t>(w) * h, 0);
  constexpr double kWeights[3] = {1.0, 2.0, 1.0};
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      Vec3 dx = Vec3::Zero();
      Vec3 dy = Vec3::Zero();
      bool ok = true;
      for (int k = -1; k <= 1 && ok; ++k) {
        const int vv = std::clamp(v + k, 0, h - 1);
        const int uu = std::clamp(u + k, 0, w - 1);
        const int ul = std::clamp(u - 1, 0, w - 1);
        const int ur = std::clamp(u + 1, 0, w - 1);
        const int vu = std::clamp(v - 1, 0, h - 1);
        const int vd = std::clamp(v + 1, 0, h - 1);
        ok = cloud.is_valid(ul, vv) && cloud.is_valid(ur, vv) && cloud.is_valid(uu, vu) && cloud.is_valid(uu, vd);
        dx += kWeights[k + 1] * (cloud.at(ur, vv) - cloud.at(ul, vv));
        dy += kWeights[k + 1] * (cloud.at(uu, vd) - cloud.at(uu, vu));
      }
      if (!ok || !cloud.is_valid(u, v)) continue;
      Vec3 n = dx.cross(dy);
      const double len = n.norm();
      if (!(len > 1e-12 * dx.norm() * dy.norm()) || !std::isfinite(len)) continue;
      n /= len;
      if (n.dot(Vec3(0.0, 0.0, -1.0)) < 0.0) n = -n;
      const size_t i = static_cast<size_t>(v) * w + u;
      out.normals[i] = n;
      out.valid[i] = 1;
    }
  }
  return out;
}

std::vector<double> shade_radiance(const PointCloud& cloud, const NormalMap& normals, const LightField& field,
                                   const std::vector<LightSourceSpec>& lights, const MaterialParams& mat,
                                   const Ambient& ambient, int jobs) {
  const int w = cloud.width;
  const int h = cloud.height;
  if (normals.width != w || normals.height != h || field.width() != w || field.height() != h) {
    throw ValidationError("phong_shade: point cloud is " + std::to_string(w) + "x" + std::to_string(h) +
                          ", normals " + std::to_string(normals.width) + "x" + std::to_string(normals.height) +
                          ", light field " + std::to_string(field.width()) + "x" + std::to_string(field.height()));
  }
  if (field.num_lights() != static_cast<int>(lights.size())) {
    throw ValidationError("phong_shade: light field has " + std::to_string(field.num_lights()) +
                          " lights but the sensor declares " + std::to_string(lights.size()));
  }
  if (ambient.kind == AmbientKind::background &&
      (!ambient.background || ambient.background->width != w || ambient.background->height != h)) {
    throw ValidationError("phong_shade: background image does not match the camera resolution");
  }
  mat.validate();

  std::vector<double> out(static_cast<size_t>(w) * h * 3, 0.0);
  parallel_for(static_cast<size_t>(h), jobs, [&](size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < w; ++u) {
      Vec3 rgb = Vec3::Zero();
      if (ambient.kind == AmbientKind::solid) {
        rgb = mat.k_a * 255.0 * ambient.colour;
      } else if (ambient.kind == AmbientKind::background) {
        for (int c = 0; c < 3; ++c) rgb[c] = mat.k_a * ambient.background->at(u, v, c);
      }
      if (cloud.is_valid(u, v) && normals.is_valid(u, v)) {
        const Vec3& n = normals.at(u, v);
        for (int m = 0; m < field.num_lights(); ++m) {
          const Vec3 l = -field.direction(m, u, v);
          const double ndl = l.dot(n);
          if (ndl > 0.0) rgb += (mat.k_d * ndl * 255.0) * lights[m].diffuse;
          if (ndl > kGrazingCosine && mat.k_s > 0.0) {
            const Vec3 r = 2.0 * ndl * n - l;
            const double rv = std::max(r.z(), 0.0);
            if (rv > 0.0) rgb += (mat.k_s * std::pow(rv, mat.alpha) * 255.0) * lights[m].specular;
          }
        }
      }
      const size_t i = (static_cast<size_t>(v) * w + u) * 3;
      out[i] = rgb[0];
      out[i + 1] = rgb[1];
      out[i + 2] = rgb[2];
    }
  });
  return out;
}

RgbImage quantize(const std::vector<double>& radiance, int width, int height) {
  RgbImage img(width, height);
  for (size_t i = 0; i < img.data.size(); ++i) {
    const double x = std::isnan(radiance[i]) ? 0.0 : std::clamp(radiance[i], 0.0, 255.0);
    img.data[i] = static_cast<std::uint8_t>(std::nearbyint(x));
  }
  return img;
}

RgbImage phong_shade(const PointCloud& cloud, const NormalMap& normals, const LightField& field,
                     const std::vector<LightSourceSpec>& lights, const MaterialParams& mat, const Ambient& ambient,
                     int jobs) {
  return quantize(shade_radiance(cloud, normals, field, lights, mat, ambient, jobs), cloud.width, cloud.height);
}

RgbImage render_frame(const DepthMap& depth, const RenderSetup& setup, int jobs) {
  if (!setup.field) throw ValidationError("render_frame: no light field");
  const CameraIntrinsics& cam = setup.camera;
  if (depth.width != cam.width || depth.height != cam.height) {
    throw ValidationError("render: depth map is " + std::to_string(depth.width) + "x" + std::to_string(depth.height) +
                          " but the camera is " + std::to_string(cam.width) + "x" + std::to_string(cam.height));
  }
  const DepthMap metric = depth.normalised ? unnormalize_depth(depth, cam) : depth;
  const DepthMap deformed = elastic_deformation(metric, setup.reference_depth, setup.smoothing);
  const PointCloud cloud = inverse_project(deformed, cam);
  const NormalMap normals = surface_normals(cloud);
  return phong_shade(cloud, normals, *setup.field, setup.lights, setup.material, setup.ambient, jobs);
}

}  // namespace curvetac
