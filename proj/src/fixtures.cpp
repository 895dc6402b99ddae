#include "curvetac/fixtures.hpp"

#include <cmath>
#include <numbers>

#include "atomic_file.hpp"
#include "curvetac/mesh_io.hpp"
#include "curvetac/mesh_primitives.hpp"

namespace curvetac {

namespace {

SensorDescription base_description(int width, int height) {
  SensorDescription d;
  d.base_dir = ".";
  d.mesh_path = "membrane.obj";
  d.background = "background.png";
  d.fov_deg = 90.0;
  d.camera = CameraIntrinsics::make(width, height, std::numbers::pi / 2.0, 0.001, 0.1);
  d.smoothing = DeformationConfig::scaled_default(width);
  d.method = FieldMethod::transport;
  return d;
}

// Soft vignetted gradient standing in for a real no-contact capture.
RgbImage synthetic_background(int width, int height) {
  RgbImage img(width, height);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const double x = (u - width / 2.0) / width;
      const double y = (v - height / 2.0) / height;
      const double fall = 1.0 - 0.8 * (x * x + y * y);
      img.at(u, v, 0) = static_cast<std::uint8_t>(std::lround(40.0 + 60.0 * fall + 30.0 * x));
      img.at(u, v, 1) = static_cast<std::uint8_t>(std::lround(50.0 + 70.0 * fall));
      img.at(u, v, 2) = static_cast<std::uint8_t>(std::lround(60.0 + 60.0 * fall - 30.0 * y));
    }
  }
  return img;
}

const Vec3 kColours[3] = {Vec3(0.9, 0.15, 0.1), Vec3(0.1, 0.85, 0.2), Vec3(0.15, 0.2, 0.95)};

}  // namespace

SensorFixture geltip_fixture(int width, int height) {
  constexpr double kRadius = 0.01;
  SensorFixture f{make_fingertip(kRadius, 0.03, 128, 61, 32), base_description(width, height),
                  synthetic_background(width, height)};
  for (int k = 0; k < 6; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / 6.0;
    LightSourceSpec l;
    l.position = Vec3(kRadius * std::cos(theta), kRadius * std::sin(theta), 0.002);
    l.diffuse = kColours[k % 3];
    l.specular = kColours[k % 3];
    f.desc.lights.push_back(l);
  }
  return f;
}

SensorFixture flat_fixture(int width, int height) {
  constexpr double kPlaneZ = 0.03;
  SensorFixture f{make_tri_grid(128, 0.04, kPlaneZ), base_description(width, height), synthetic_background(width, height)};
  const Vec3 spots[4] = {Vec3(0.035, 0.0, kPlaneZ), Vec3(-0.035, 0.0, kPlaneZ), Vec3(0.0, 0.035, kPlaneZ),
                         Vec3(0.0, -0.035, kPlaneZ)};
  for (int k = 0; k < 4; ++k) {
    LightSourceSpec l;
    l.position = spots[k];
    l.diffuse = kColours[k % 3];
    l.specular = kColours[k % 3];
    f.desc.lights.push_back(l);
  }
  return f;
}

void write_fixture(const SensorFixture& fixture, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_obj(fixture.mesh, dir / fixture.desc.mesh_path);
  if (fixture.desc.background) save_png(fixture.background, dir / *fixture.desc.background);
  write_file_atomic(dir / "sensor.json", serialize_sensor_config(fixture.desc));
}

}  // namespace curvetac
