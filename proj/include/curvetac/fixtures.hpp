#pragma once

#include <filesystem>

#include "curvetac/image_io.hpp"
#include "curvetac/mesh.hpp"
#include "curvetac/sensor_config.hpp"

namespace curvetac {

// Ready-made sensors for demos, tests and the acceptance suite.

struct SensorFixture {
  TriangleMesh mesh;
  SensorDescription desc;  // mesh_path "membrane.obj", background "background.png"
  RgbImage background;
};

/// Finger-shaped membrane (radius 10 mm, 30 mm tube, hemispherical tip,
/// 23680 faces) seen from inside by a 90 degree camera at the origin looking
/// along +z, with six LEDs on the tube wall at z = 2 mm in three colour pairs.
SensorFixture geltip_fixture(int width = 640, int height = 480);

/// Flat 80 x 80 mm membrane 30 mm in front of the same camera, lit by four
/// LEDs lying in the membrane plane outside the field of view.
SensorFixture flat_fixture(int width = 640, int height = 480);

/// Writes membrane.obj, background.png and sensor.json into `dir`.
void write_fixture(const SensorFixture& fixture, const std::filesystem::path& dir);

}  // namespace curvetac
