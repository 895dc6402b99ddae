#include "curvetac/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "curvetac/errors.hpp"
#include "parallel.hpp"

namespace curvetac {

CameraIntrinsics CameraIntrinsics::make(int width, int height, double fov, double z_near, double z_far) {
  CameraIntrinsics cam;
  cam.width = width;
  cam.height = height;
  cam.fov = fov;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.z_near = z_near;
  cam.z_far = z_far;
  cam.validate();
  return cam;
}

void CameraIntrinsics::validate() const {
  if (width <= 0 || height <= 0) {
    throw ValidationError("camera: width and height must be positive, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
  if (!(fov > 0.0 && fov < std::numbers::pi)) {
    throw ValidationError("camera.fov must lie in (0, pi) radians, got " + std::to_string(fov));
  }
  if (!(z_near > 0.0 && z_near < z_far && std::isfinite(z_far))) {
    throw ValidationError("camera: need 0 < z_near < z_far, got z_near=" + std::to_string(z_near) +
                          " z_far=" + std::to_string(z_far));
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw ValidationError("camera: principal point must be finite");
}

namespace {

// tan(fov / 2) with the exactness of tanpi at a quarter turn, so a right-angle
// field of view gives focal lengths of exactly half the image size.
double half_fov_tangent(double fov) {
  if (fov / std::numbers::pi == 0.5) return 1.0;
  return std::tan(fov / 2.0);
}

}  // namespace

double CameraIntrinsics::fu() const { return width / (2.0 * half_fov_tangent(fov)); }
double CameraIntrinsics::fv() const { return height / (2.0 * half_fov_tangent(fov)); }

void DeformationConfig::validate() const {
  if (kernel_size < 3 || kernel_size % 2 == 0) {
    throw ValidationError("smoothing.kernel_size must be odd and >= 3, got " + std::to_string(kernel_size));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("smoothing.sigma must be positive, got " + std::to_string(sigma));
  }
}

DeformationConfig DeformationConfig::scaled_default(int image_width) {
  const double scale = image_width / 640.0;
  DeformationConfig cfg;
  int k = static_cast<int>(std::lround(21.0 * scale));
  if (k % 2 == 0) ++k;
  cfg.kernel_size = std::max(3, k);
  cfg.sigma = 7.0 * scale;
  return cfg;
}

std::vector<double> gaussian_kernel_1d(const DeformationConfig& cfg) {
  cfg.validate();
  const int r = cfg.kernel_size / 2;
  std::vector<double> taps(cfg.kernel_size);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    taps[i + r] = std::exp(-0.5 * (i * i) / (cfg.sigma * cfg.sigma));
    sum += taps[i + r];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

DepthMap unnormalize_depth(const DepthMap& d, const CameraIntrinsics& cam) {
  if (!d.normalised) throw ValidationError("unnormalize_depth: input depth map is already metric");
  DepthMap out(d.width, d.height, 0.0, false);
  const double n = cam.z_near;
  const double f = cam.z_far;
  for (size_t i = 0; i < d.size(); ++i) {
    const double x = d.values[i];
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ValidationError("normalised depth value " + std::to_string(x) + " at index " + std::to_string(i) +
                            " lies outside [0, 1]");
    }
    // Same value either way; each factorisation is exact at its own endpoint.
    const double denom = std::lerp(f, n, x);
    out.values[i] = x < 0.5 ? n * (f / denom) : f * (n / denom);
  }
  return out;
}

DepthMap gaussian_blur(const DepthMap& d, const DeformationConfig& cfg) {
  const std::vector<double> taps = gaussian_kernel_1d(cfg);
  const int r = cfg.kernel_size / 2;
  const int w = d.width;
  const int h = d.height;
  DepthMap tmp(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * d.at(std::clamp(u + k, 0, w - 1), v);
      tmp.at(u, v) = acc;
    }
  }
  DepthMap out(w, h, 0.0, d.normalised);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += taps[k + r] * tmp.at(u, std::clamp(v + k, 0, h - 1));
      out.at(u, v) = acc;
    }
  }
  return out;
}

DepthMap elastic_deformation(const DepthMap& d, const DepthMap& d_ref, const DeformationConfig& cfg) {
  if (d.width != d_ref.width || d.height != d_ref.height) {
    throw ValidationError("elastic_deformation: depth is " + std::to_string(d.width) + "x" +
                          std::to_string(d.height) + " but reference is " + std::to_string(d_ref.width) + "x" +
                          std::to_string(d_ref.height));
  }
  if (d.normalised || d_ref.normalised) throw ValidationError("elastic_deformation: inputs must be metric");
  DepthMap indent(d.width, d.height);
  for (size_t i = 0; i < d.size(); ++i) indent.values[i] = d_ref.values[i] - d.values[i];
  const DepthMap spread = gaussian_blur(indent, cfg);
  DepthMap out(d.width, d.height);
  for (size_t i = 0; i < d.size(); ++i) out.values[i] = std::min(d.values[i], d_ref.values[i] - spread.values[i]);
  return out;
}

PointCloud inverse_project(const DepthMap& d, const CameraIntrinsics& cam) {
  if (d.width != cam.width || d.height != cam.height) {
    throw ValidationError("inverse_project: depth map is " + std::to_string(d.width) + "x" +
                          std::to_string(d.height) + " but the camera is " + std::to_string(cam.width) + "x" +
                          std::to_string(cam.height));
  }
  PointCloud pc;
  pc.width = d.width;
  pc.height = d.height;
  pc.points.resize(d.size());
  pc.valid.resize(d.size());
  const double fu = cam.fu();
  const double fv = cam.fv();
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      const double z = d.at(u, v);
      const size_t i = static_cast<size_t>(v) * d.width + u;
      pc.points[i] = Vec3((u - cam.cx) * z / fu, (v - cam.cy) * z / fv, z);
      pc.valid[i] = std::isfinite(z) && z > 0.0;
    }
  }
  return pc;
}

namespace {

double ray_sphere(const Vec3& dir, const SpherePrimitive& s) {
  // |t dir - c|^2 = r^2 with the ray starting at the camera origin.
  const double a = dir.squaredNorm();
  const double b = -2.0 * dir.dot(s.centre);
  const double c = s.centre.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  const double t1 = (-b + sq) / (2.0 * a);
  if (t0 > 0.0) return t0;
  if (t1 > 0.0) return t1;
  return std::numeric_limits<double>::infinity();
}

double ray_box(const Vec3& dir, const BoxPrimitive& b) {
  const Eigen::Matrix3d rt = b.pose.rotation.transpose();
  const Vec3 o = rt * (-b.pose.translation);
  const Vec3 d = rt * dir;
  const Vec3 half = 0.5 * b.dims;
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < -half[a] || o[a] > half[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double t0 = (-half[a] - o[a]) / d[a];
    double t1 = (half[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || t_exit <= 0.0) return std::numeric_limits<double>::infinity();
  return t_enter > 0.0 ? t_enter : t_exit;
}

}  // namespace

DepthMap synth_depth(const CameraIntrinsics& cam, const TriangleMesh* membrane, const Primitive& primitive,
                     int jobs) {
  cam.validate();
  if (const auto* s = std::get_if<SpherePrimitive>(&primitive); s && !(s->radius > 0.0)) {
    throw ValidationError("sphere radius must be positive, got " + std::to_string(s->radius));
  }
  if (const auto* b = std::get_if<BoxPrimitive>(&primitive); b && !(b->dims.minCoeff() > 0.0)) {
    throw ValidationError("box dimensions must be positive");
  }
  DepthMap out(cam.width, cam.height, cam.z_far, false);
  parallel_for(static_cast<size_t>(cam.height), jobs, [&](size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 dir = cam.pixel_ray(u, v);
      double t = std::numeric_limits<double>::infinity();
      if (membrane) {
        if (auto hit = membrane->raycast(Vec3::Zero(), dir)) t = hit->t;
      }
      if (const auto* s = std::get_if<SpherePrimitive>(&primitive)) t = std::min(t, ray_sphere(dir, *s));
      if (const auto* b = std::get_if<BoxPrimitive>(&primitive)) t = std::min(t, ray_box(dir, *b));
      // dir has unit z, so the ray parameter is the depth.
      out.at(u, v) = std::isfinite(t) ? std::clamp(t, cam.z_near, cam.z_far) : cam.z_far;
    }
  });
  return out;
}

}  // namespace curvetac
