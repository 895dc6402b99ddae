#include "curvetac/light_field.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include "curvetac/errors.hpp"
#include "curvetac/renderer.hpp"
#include "curvetac/surface_paths.hpp"
#include "parallel.hpp"

namespace curvetac {

std::string to_string(FieldMethod m) {
  switch (m) {
    case FieldMethod::linear: return "linear";
    case FieldMethod::plane: return "plane";
    case FieldMethod::geodesic: return "geodesic";
    case FieldMethod::transport: return "transport";
  }
  return "unknown";
}

FieldMethod parse_field_method(const std::string& name) {
  if (name == "linear") return FieldMethod::linear;
  if (name == "plane") return FieldMethod::plane;
  if (name == "geodesic") return FieldMethod::geodesic;
  if (name == "transport") return FieldMethod::transport;
  throw ValidationError("unknown field method '" + name + "' (expected linear, plane, geodesic or transport)");
}

LightField::LightField(int width, int height, int num_lights)
    : width_(width),
      height_(height),
      num_lights_(num_lights),
      data_(static_cast<size_t>(width) * height * num_lights * 3, 0.0f) {}

Vec3 LightField::direction(int light, int u, int v) const {
  const size_t i = offset(light, u, v);
  return Vec3(data_[i], data_[i + 1], data_[i + 2]);
}

void LightField::set_direction(int light, int u, int v, const Vec3& d) {
  const size_t i = offset(light, u, v);
  data_[i] = static_cast<float>(d.x());
  data_[i + 1] = static_cast<float>(d.y());
  data_[i + 2] = static_cast<float>(d.z());
}

bool LightField::is_zero(int light, int u, int v) const {
  const size_t i = offset(light, u, v);
  return data_[i] == 0.0f && data_[i + 1] == 0.0f && data_[i + 2] == 0.0f;
}

std::string depth_hash(const DepthMap& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint32_t word) {
    for (int b = 0; b < 4; ++b) {
      h ^= (word >> (8 * b)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint32_t>(d.width));
  mix(static_cast<std::uint32_t>(d.height));
  for (double x : d.values) mix(std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PixelSurface locate_pixels(const TriangleMesh& aligned, const CameraIntrinsics& cam, const DepthMap& reference_depth,
                           double snap_distance, int jobs) {
  const PointCloud cloud = inverse_project(reference_depth, cam);
  const NormalMap normals = surface_normals(cloud);
  const size_t n = static_cast<size_t>(cam.width) * cam.height;
  PixelSurface px;
  px.points.resize(n);
  px.normals.assign(n, Vec3::Zero());
  px.valid.assign(n, 0);
  parallel_for(static_cast<size_t>(cam.height), jobs, [&](size_t row) {
    for (int u = 0; u < cam.width; ++u) {
      const size_t i = row * cam.width + u;
      if (!cloud.valid[i] || !normals.valid[i]) continue;
      const ClosestPointResult cp = aligned.closest_point(cloud.points[i]);
      if (cp.distance > snap_distance) continue;
      px.points[i] = cp.point;
      px.normals[i] = normals.normals[i];
      px.valid[i] = 1;
    }
  });
  return px;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::optional<Vec3> tangent_unit(const Vec3& d, const Vec3& normal) {
  const Vec3 t = d - d.dot(normal) * normal;
  const double len = t.norm();
  if (!(len > 1e-12)) return std::nullopt;
  return Vec3(t / len);
}

std::int64_t bake_timestamp() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long long v = std::strtoll(env, &end, 10);
  return (end && *end == '\0') ? static_cast<std::int64_t>(v) : 0;
}

void validate_job(const BakeJob& job) {
  if (!job.mesh) throw ValidationError("bake: no mesh");
  if (!job.transform.is_proper()) throw ValidationError("bake: alignment transform is not a proper rigid motion");
  job.camera.validate();
  if (job.reference_depth.width != job.camera.width || job.reference_depth.height != job.camera.height) {
    throw ValidationError("bake: reference depth is " + std::to_string(job.reference_depth.width) + "x" +
                          std::to_string(job.reference_depth.height) + " but the camera is " +
                          std::to_string(job.camera.width) + "x" + std::to_string(job.camera.height));
  }
  if (job.reference_depth.normalised) throw ValidationError("bake: reference depth must be metric");
  if (job.lights.empty()) throw ValidationError("bake: at least one light is required");
  if (!(job.snap_distance > 0.0)) throw ValidationError("bake: snap distance must be positive");
}

}  // namespace

LightField bake(const BakeJob& job, BakeReport* report) {
  const auto t_start = Clock::now();
  validate_job(job);
  const CameraIntrinsics& cam = job.camera;
  const int w = cam.width;
  const int h = cam.height;
  const int num_lights = static_cast<int>(job.lights.size());

  const TriangleMesh aligned = job.mesh->transformed(job.transform);
  const PixelSurface px = locate_pixels(aligned, cam, job.reference_depth, job.snap_distance, job.jobs);

  std::unique_ptr<HeatGeodesicSolver> heat;
  if (job.method == FieldMethod::transport) heat = std::make_unique<HeatGeodesicSolver>(aligned, job.t_scale);

  LightField field(w, h, num_lights);
  field.method = job.method;
  field.mesh_hash = job.mesh->content_hash();
  field.ref_depth_hash = depth_hash(job.reference_depth);
  field.bake_timestamp = bake_timestamp();
  field.lights = job.lights;

  BakeReport rep;
  rep.total_pixels = w * h;
  rep.valid_pixels = static_cast<int>(std::accumulate(px.valid.begin(), px.valid.end(), 0));
  rep.setup_seconds = seconds_since(t_start);

  for (int m = 0; m < num_lights; ++m) {
    const auto t_light = Clock::now();
    const Vec3& light = job.lights[m].position;
    const SurfacePoint source = aligned.closest_point(light).point;

    std::optional<GeodesicFan> fan;
    std::optional<DistanceField> distance;
    if (job.method == FieldMethod::geodesic) fan.emplace(aligned, source);
    if (job.method == FieldMethod::transport) distance = heat->distance_from(source);

    std::vector<int> row_failures(h, 0);
    parallel_for(static_cast<size_t>(h), job.jobs, [&](size_t row) {
      const int v = static_cast<int>(row);
      for (int u = 0; u < w; ++u) {
        const size_t i = static_cast<size_t>(v) * w + u;
        if (!px.valid[i]) continue;
        const SurfacePoint& target = px.points[i];
        const Vec3& normal = px.normals[i];
        std::optional<Vec3> dir;
        switch (job.method) {
          case FieldMethod::linear: {
            const Vec3 d = target.position - light;
            if (d.norm() > 0.0) dir = Vec3(d.normalized());
            break;
          }
          case FieldMethod::plane: {
            if (auto path = try_plane_slice_path(aligned, source, target)) dir = endpoint_direction(*path, normal);
            break;
          }
          case FieldMethod::geodesic: {
            if ((target.position - source.position).norm() > 0.0) {
              if (auto path = fan->path_to(target)) {
                dir = endpoint_direction(*path, normal);
              }
            }
            break;
          }
          case FieldMethod::transport: {
            if (auto g = distance_gradient_direction(aligned, *distance, target)) dir = tangent_unit(*g, normal);
            break;
          }
        }
        if (dir) {
          field.set_direction(m, u, v, *dir);
        } else {
          ++row_failures[v];
        }
      }
    });
    rep.failed_pixels.push_back(std::accumulate(row_failures.begin(), row_failures.end(), 0));
    rep.light_seconds.push_back(seconds_since(t_light));
  }
  rep.total_seconds = seconds_since(t_start);
  if (report) *report = std::move(rep);
  return field;
}

}  // namespace curvetac
