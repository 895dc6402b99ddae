#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "curvetac/errors.hpp"
#include "curvetac/fixtures.hpp"
#include "curvetac/mesh_io.hpp"
#include "curvetac/mesh_primitives.hpp"
#include "curvetac/sensor_config.hpp"

using namespace curvetac;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "curvetac_test_sensor_config" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

json minimal() {
  return json::parse(R"({
    "mesh_path": "membrane.obj",
    "camera": {"width": 640, "height": 480, "fov_deg": 90, "z_near": 0.001, "z_far": 0.1},
    "lights": [{"position": [0.01, 0, 0.002], "diffuse": [1, 0, 0]}]
  })");
}

SensorDescription parse(const json& doc) { return parse_sensor_config(doc.dump(), ".", false); }

std::string error_of(const json& doc) {
  try {
    parse(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const SensorDescription d = parse(minimal());
  CHECK(d.camera.fu() == 320.0);
  CHECK(d.camera.fv() == 240.0);
  CHECK(d.camera.fov == std::numbers::pi / 2);
  CHECK(d.material == MaterialParams{});
  CHECK(d.material.k_a == 1.0);
  CHECK(d.smoothing.kernel_size == 21);
  CHECK(d.smoothing.sigma == 7.0);
  CHECK(d.method == FieldMethod::transport);
  CHECK(d.snap_distance == 2e-3);
  CHECK(d.t_scale == 1.0);
  CHECK(d.transform.rotation == Eigen::Matrix3d::Identity());
  REQUIRE(d.lights.size() == 1);
  CHECK(d.lights[0].specular == d.lights[0].diffuse);
  CHECK_FALSE(d.background.has_value());

  json half = minimal();
  half["camera"]["width"] = 320;
  half["camera"]["height"] = 240;
  CHECK(parse(half).smoothing.kernel_size == 11);
  CHECK(parse(half).smoothing.sigma == 3.5);
}

TEST_CASE("invalid configs name the field") {
  json doc = minimal();
  doc["camera"]["fov_deg"] = 200;
  CHECK(error_of(doc).find("camera.fov_deg") != std::string::npos);

  doc = minimal();
  doc["camera"]["z_near"] = 0.5;
  CHECK(error_of(doc).find("camera") != std::string::npos);

  doc = minimal();
  doc["lights"] = json::array();
  CHECK(error_of(doc).find("lights") != std::string::npos);

  doc = minimal();
  doc["lights"][0]["diffuse"] = {1.5, 0, 0};
  CHECK(error_of(doc).find("lights[0].diffuse") != std::string::npos);

  doc = minimal();
  doc["material"] = {{"k_s", -0.1}};
  CHECK(error_of(doc).find("material.k_s") != std::string::npos);

  doc = minimal();
  doc["smoothing"] = {{"kernel_size", 8}};
  CHECK(error_of(doc).find("smoothing.kernel_size") != std::string::npos);

  doc = minimal();
  doc["transform"] = {{"rotation", {1, 0, 0, 0, 1, 0, 0, 0, -1}}, {"translation", {0, 0, 0}}};
  CHECK(error_of(doc).find("transform.rotation") != std::string::npos);

  doc = minimal();
  doc["transform"] = {{"rotation", {1, 0, 0, 0, 1.01, 0, 0, 0, 1}}, {"translation", {0, 0, 0}}};
  CHECK(error_of(doc).find("transform.rotation") != std::string::npos);

  doc = minimal();
  doc["lights"][0]["colour"] = {1, 1, 1};
  CHECK(error_of(doc).find("colour") != std::string::npos);

  doc = minimal();
  doc["method"] = "exact";
  CHECK_THROWS_AS(parse(doc), ValidationError);

  doc = minimal();
  doc.erase("mesh_path");
  CHECK(error_of(doc).find("mesh_path") != std::string::npos);

  doc = minimal();
  doc["camera"]["width"] = "640";
  CHECK(error_of(doc).find("camera.width") != std::string::npos);

  CHECK_THROWS_AS(parse_sensor_config("{not json", ".", false), FormatError);
}

TEST_CASE("referenced files must exist") {
  const auto dir = fresh_dir("files");
  CHECK_THROWS_AS(parse_sensor_config(minimal().dump(), dir, true), FormatError);
  save_obj(make_grid(2, 0.01, 0.03), dir / "membrane.obj");
  CHECK_NOTHROW(parse_sensor_config(minimal().dump(), dir, true));
  json doc = minimal();
  doc["background"] = "bg.png";
  CHECK_THROWS_AS(parse_sensor_config(doc.dump(), dir, true), FormatError);
  CHECK_THROWS_AS(load_sensor_config(dir / "missing.json"), FormatError);
}

TEST_CASE("serialisation is a fixed point") {
  json doc = minimal();
  doc["transform"] = {{"rotation", {0, -1, 0, 1, 0, 0, 0, 0, 1}}, {"translation", {0.001, 0.002, 0.003}}};
  doc["material"] = {{"k_d", 0.3}};
  doc["background"] = "bg.png";
  doc["method"] = "plane";
  const SensorDescription d = parse(doc);
  const std::string once = serialize_sensor_config(d);
  const std::string twice = serialize_sensor_config(parse(json::parse(once)));
  CHECK(once == twice);
  CHECK(parse(json::parse(once)).method == FieldMethod::plane);
  CHECK(parse(json::parse(once)).transform.translation == d.transform.translation);
}

TEST_CASE("six leds in three colour pairs") {
  const SensorFixture fx = geltip_fixture();
  const SensorDescription d = parse(json::parse(serialize_sensor_config(fx.desc)));
  REQUIRE(d.lights.size() == 6);
  for (int k = 0; k < 6; ++k) {
    CHECK(d.lights[k].position == fx.desc.lights[k].position);
    CHECK(d.lights[k].diffuse == fx.desc.lights[(k + 3) % 6].diffuse);
  }
}

TEST_CASE("fixture directory loads back") {
  const auto dir = fresh_dir("fixture");
  const SensorFixture fx = flat_fixture(64, 48);
  write_fixture(fx, dir);
  const SensorDescription d = load_sensor_config(dir / "sensor.json");
  CHECK(d.base_dir == dir);
  CHECK(d.lights == fx.desc.lights);
  const TriangleMesh aligned = load_aligned_mesh(d);
  CHECK(aligned.num_faces() == fx.mesh.num_faces());
  const DepthMap ref = sensor_reference_depth(d, aligned);
  CHECK(ref.width == 64);
  for (double z : ref.values) CHECK(z == doctest::Approx(0.03));
}
