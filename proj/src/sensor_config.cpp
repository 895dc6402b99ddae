#include "curvetac/sensor_config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "curvetac/errors.hpp"
#include "curvetac/mesh_io.hpp"

namespace curvetac {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ValidationError("config field '" + field + "': " + msg);
}

const json& require(const json& obj, const std::string& key, const std::string& prefix) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(prefix + key, "missing");
  return *it;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(field, "must be finite");
  return x;
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

std::string string_field(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string");
  return j.get<std::string>();
}

std::vector<double> number_array(const json& j, size_t n, const std::string& field) {
  if (!j.is_array() || j.size() != n) fail(field, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (size_t i = 0; i < n; ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Vec3 vec3(const json& j, const std::string& field) {
  const auto v = number_array(j, 3, field);
  return Vec3(v[0], v[1], v[2]);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) fail(prefix + key, "unknown field");
  }
}

void require_object(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object");
}

Vec3 colour(const json& j, const std::string& field) {
  const Vec3 c = vec3(j, field);
  for (int k = 0; k < 3; ++k) {
    if (c[k] < 0.0 || c[k] > 1.0) fail(field, "colour channels must lie in [0, 1]");
  }
  return c;
}

ordered_json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

std::filesystem::path SensorDescription::resolve(const std::string& p) const {
  const std::filesystem::path path = std::filesystem::u8path(p);
  return path.is_absolute() ? path : base_dir / path;
}

SensorDescription parse_sensor_config(const std::string& json_text, const std::filesystem::path& base_dir,
                                      bool check_files) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  require_object(doc, "<root>");
  reject_unknown(doc,
                 {"mesh_path", "transform", "camera", "lights", "material", "smoothing", "background", "method",
                  "reference_depth", "snap_distance", "t_scale"},
                 "");

  SensorDescription d;
  d.base_dir = base_dir;
  d.mesh_path = string_field(require(doc, "mesh_path", ""), "mesh_path");

  if (doc.contains("transform")) {
    const json& t = doc["transform"];
    require_object(t, "transform");
    reject_unknown(t, {"rotation", "translation"}, "transform.");
    const auto r = number_array(require(t, "rotation", "transform."), 9, "transform.rotation");
    for (int i = 0; i < 9; ++i) d.transform.rotation(i / 3, i % 3) = r[i];
    d.transform.translation = vec3(require(t, "translation", "transform."), "transform.translation");
    if (!d.transform.is_proper()) fail("transform.rotation", "must be orthonormal with determinant +1");
  }

  {
    const json& c = require(doc, "camera", "");
    require_object(c, "camera");
    reject_unknown(c, {"width", "height", "fov_deg", "z_near", "z_far"}, "camera.");
    const int w = integer(require(c, "width", "camera."), "camera.width");
    const int h = integer(require(c, "height", "camera."), "camera.height");
    if (w <= 0) fail("camera.width", "must be positive");
    if (h <= 0) fail("camera.height", "must be positive");
    d.fov_deg = number(require(c, "fov_deg", "camera."), "camera.fov_deg");
    if (!(d.fov_deg > 0.0 && d.fov_deg < 180.0)) fail("camera.fov_deg", "must lie in (0, 180) degrees");
    const double zn = number(require(c, "z_near", "camera."), "camera.z_near");
    const double zf = number(require(c, "z_far", "camera."), "camera.z_far");
    if (!(zn > 0.0)) fail("camera.z_near", "must be positive");
    if (!(zf > zn)) fail("camera.z_far", "must exceed z_near");
    d.camera = CameraIntrinsics::make(w, h, d.fov_deg * std::numbers::pi / 180.0, zn, zf);
  }

  {
    const json& ls = require(doc, "lights", "");
    if (!ls.is_array() || ls.empty()) fail("lights", "expected a non-empty array");
    for (size_t i = 0; i < ls.size(); ++i) {
      const std::string prefix = "lights[" + std::to_string(i) + "].";
      require_object(ls[i], prefix.substr(0, prefix.size() - 1));
      reject_unknown(ls[i], {"position", "diffuse", "specular"}, prefix);
      LightSourceSpec spec;
      spec.position = vec3(require(ls[i], "position", prefix), prefix + "position");
      spec.diffuse = colour(require(ls[i], "diffuse", prefix), prefix + "diffuse");
      spec.specular = ls[i].contains("specular") ? colour(ls[i]["specular"], prefix + "specular") : spec.diffuse;
      d.lights.push_back(spec);
    }
  }

  if (doc.contains("material")) {
    const json& m = doc["material"];
    require_object(m, "material");
    reject_unknown(m, {"k_a", "k_d", "k_s", "alpha"}, "material.");
    if (m.contains("k_a")) d.material.k_a = number(m["k_a"], "material.k_a");
    if (m.contains("k_d")) d.material.k_d = number(m["k_d"], "material.k_d");
    if (m.contains("k_s")) d.material.k_s = number(m["k_s"], "material.k_s");
    if (m.contains("alpha")) d.material.alpha = number(m["alpha"], "material.alpha");
  }
  d.material.validate();

  d.smoothing = DeformationConfig::scaled_default(d.camera.width);
  if (doc.contains("smoothing")) {
    const json& s = doc["smoothing"];
    require_object(s, "smoothing");
    reject_unknown(s, {"kernel_size", "sigma"}, "smoothing.");
    if (s.contains("kernel_size")) d.smoothing.kernel_size = integer(s["kernel_size"], "smoothing.kernel_size");
    if (s.contains("sigma")) d.smoothing.sigma = number(s["sigma"], "smoothing.sigma");
  }
  d.smoothing.validate();

  if (doc.contains("background") && !doc["background"].is_null()) {
    d.background = string_field(doc["background"], "background");
  }
  if (doc.contains("reference_depth") && !doc["reference_depth"].is_null()) {
    d.reference_depth = string_field(doc["reference_depth"], "reference_depth");
  }
  if (doc.contains("method")) d.method = parse_field_method(string_field(doc["method"], "method"));
  if (doc.contains("snap_distance")) {
    d.snap_distance = number(doc["snap_distance"], "snap_distance");
    if (!(d.snap_distance > 0.0)) fail("snap_distance", "must be positive");
  }
  if (doc.contains("t_scale")) {
    d.t_scale = number(doc["t_scale"], "t_scale");
    if (!(d.t_scale > 0.0)) fail("t_scale", "must be positive");
  }

  if (check_files) {
    auto check = [&](const std::string& field, const std::string& p) {
      if (!std::filesystem::is_regular_file(d.resolve(p))) {
        throw FormatError("config field '" + field + "': file not found: " + d.resolve(p).string());
      }
    };
    check("mesh_path", d.mesh_path);
    if (d.background) check("background", *d.background);
    if (d.reference_depth) check("reference_depth", *d.reference_depth);
  }
  return d;
}

SensorDescription load_sensor_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::filesystem::path base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_sensor_config(ss.str(), base);
}

std::string serialize_sensor_config(const SensorDescription& d) {
  ordered_json doc;
  doc["mesh_path"] = d.mesh_path;
  ordered_json rot = ordered_json::array();
  for (int i = 0; i < 9; ++i) rot.push_back(d.transform.rotation(i / 3, i % 3));
  doc["transform"] = {{"rotation", rot}, {"translation", vec_json(d.transform.translation)}};
  doc["camera"] = {{"width", d.camera.width},
                   {"height", d.camera.height},
                   {"fov_deg", d.fov_deg},
                   {"z_near", d.camera.z_near},
                   {"z_far", d.camera.z_far}};
  doc["lights"] = ordered_json::array();
  for (const auto& l : d.lights) {
    doc["lights"].push_back(
        {{"position", vec_json(l.position)}, {"diffuse", vec_json(l.diffuse)}, {"specular", vec_json(l.specular)}});
  }
  doc["material"] = {
      {"k_a", d.material.k_a}, {"k_d", d.material.k_d}, {"k_s", d.material.k_s}, {"alpha", d.material.alpha}};
  doc["smoothing"] = {{"kernel_size", d.smoothing.kernel_size}, {"sigma", d.smoothing.sigma}};
  if (d.background) doc["background"] = *d.background;
  if (d.reference_depth) doc["reference_depth"] = *d.reference_depth;
  doc["method"] = to_string(d.method);
  doc["snap_distance"] = d.snap_distance;
  doc["t_scale"] = d.t_scale;
  return doc.dump(2) + "\n";
}

TriangleMesh load_aligned_mesh(const SensorDescription& desc) {
  return load_mesh(desc.mesh_file()).transformed(desc.transform);
}

DepthMap sensor_reference_depth(const SensorDescription& desc, const TriangleMesh& aligned, int jobs) {
  if (desc.reference_depth) {
    DepthMap d = load_depth_map(desc.resolve(*desc.reference_depth));
    if (d.width != desc.camera.width || d.height != desc.camera.height) {
      throw ValidationError("reference depth is " + std::to_string(d.width) + "x" + std::to_string(d.height) +
                            " but the camera is " + std::to_string(desc.camera.width) + "x" +
                            std::to_string(desc.camera.height));
    }
    return d.normalised ? unnormalize_depth(d, desc.camera) : d;
  }
  DepthMap d = synth_depth(desc.camera, &aligned, std::monostate{}, jobs);
  for (double& x : d.values) x = static_cast<double>(static_cast<float>(x));
  return d;
}

}  // namespace curvetac
