#include "curvetac/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "atomic_file.hpp"
#include "curvetac/depth.hpp"
#include "curvetac/errors.hpp"
#include "curvetac/light_field.hpp"
#include "curvetac/mesh_io.hpp"
#include "curvetac/metrics.hpp"
#include "curvetac/ply_export.hpp"
#include "curvetac/renderer.hpp"
#include "curvetac/sensor_config.hpp"
#include "parallel.hpp"

namespace curvetac {

namespace {

// Bad flag combinations detected after parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct BakeArgs {
  std::string config;
  std::string method;
  std::string ref_depth;
  std::string out;
  int jobs = 0;
};

struct RenderArgs {
  std::string config;
  std::string fields;
  std::string depth;
  std::string depth_dir;
  std::string out;
  std::string ambient = "none";
  bool force = false;
  int jobs = 0;
};

struct SynthArgs {
  std::string config;
  std::string primitive;
  bool none = false;
  double radius = 0.0;
  std::vector<double> pos;
  std::vector<double> dims;
  std::string out;
  int jobs = 0;
};

struct CompareArgs {
  std::string real;
  std::string sim;
  std::string out;
  int jobs = 0;
};

struct VizArgs {
  std::string fields;
  std::string config;
  std::string out;
  int jobs = 0;
};

DepthMap load_metric_depth(const std::filesystem::path& path, const CameraIntrinsics& cam) {
  DepthMap d = load_depth_map(path);
  if (d.width != cam.width || d.height != cam.height) {
    throw ValidationError(path.string() + " is " + std::to_string(d.width) + "x" + std::to_string(d.height) +
                          " but the camera is " + std::to_string(cam.width) + "x" + std::to_string(cam.height));
  }
  return d.normalised ? unnormalize_depth(d, cam) : d;
}

int cmd_bake(const BakeArgs& a, std::ostream& err) {
  const SensorDescription desc = load_sensor_config(a.config);
  const TriangleMesh mesh = load_mesh(desc.mesh_file());
  BakeJob job;
  job.mesh = &mesh;
  job.transform = desc.transform;
  job.camera = desc.camera;
  job.reference_depth = load_metric_depth(a.ref_depth, desc.camera);
  job.lights = desc.lights;
  job.method = a.method.empty() ? desc.method : parse_field_method(a.method);
  job.jobs = resolve_jobs(a.jobs);
  job.snap_distance = desc.snap_distance;
  job.t_scale = desc.t_scale;

  BakeReport report;
  const LightField field = bake(job, &report);
  save_light_field(field, a.out);

  err << "baked " << to_string(job.method) << " field " << field.width() << "x" << field.height() << ", "
      << field.num_lights() << " lights, " << job.jobs << " jobs\n";
  err << std::fixed << std::setprecision(2);
  err << "valid pixels: " << report.valid_pixels << "/" << report.total_pixels << " ("
      << 100.0 * report.valid_fraction() << "%)\n";
  err << "setup: " << report.setup_seconds << " s\n";
  for (size_t m = 0; m < report.light_seconds.size(); ++m) {
    err << "light " << m << ": " << report.light_seconds[m] << " s, " << report.failed_pixels[m]
        << " pixels without a path\n";
  }
  err << "total: " << report.total_seconds << " s\n";
  err << "wrote " << a.out << "\n";
  return kExitOk;
}

Ambient parse_ambient(const std::string& spec, const RgbImage* background) {
  if (spec == "none") return Ambient::none();
  if (spec == "background") {
    if (!background) throw UsageError("--ambient background needs a 'background' image in the config");
    return Ambient::image(*background);
  }
  if (spec.rfind("solid:#", 0) == 0 && spec.size() == 13) {
    Vec3 rgb;
    for (int c = 0; c < 3; ++c) {
      const std::string hex = spec.substr(7 + 2 * c, 2);
      if (!std::all_of(hex.begin(), hex.end(), [](unsigned char ch) { return std::isxdigit(ch); })) {
        throw UsageError("bad colour in --ambient " + spec);
      }
      rgb[c] = std::stoi(hex, nullptr, 16) / 255.0;
    }
    return Ambient::solid(rgb);
  }
  throw UsageError("--ambient must be none, background or solid:#rrggbb, got '" + spec + "'");
}

std::vector<std::filesystem::path> list_depth_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pfm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no .pfm depth maps in " + dir.string());
  return files;
}

int cmd_render(const RenderArgs& a, std::ostream& err) {
  if (a.depth.empty() == a.depth_dir.empty()) throw UsageError("render needs exactly one of --depth or --depth-dir");
  const SensorDescription desc = load_sensor_config(a.config);
  const TriangleMesh mesh = load_mesh(desc.mesh_file());
  const LightField field = load_light_field(a.fields);

  if (field.mesh_hash != mesh.content_hash()) {
    err << "warning: light field was baked for mesh " << field.mesh_hash << " but the config mesh is "
        << mesh.content_hash() << "\n";
    if (!a.force) throw ValidationError("mesh hash mismatch; rerun with --force to render anyway");
  }
  if (field.width() != desc.camera.width || field.height() != desc.camera.height) {
    throw ValidationError("light field is " + std::to_string(field.width()) + "x" + std::to_string(field.height()) +
                          " but the camera is " + std::to_string(desc.camera.width) + "x" +
                          std::to_string(desc.camera.height));
  }

  std::optional<RgbImage> background;
  if (desc.background) background = load_png(desc.resolve(*desc.background));
  const int jobs = resolve_jobs(a.jobs);

  RenderSetup setup;
  setup.camera = desc.camera;
  setup.reference_depth = sensor_reference_depth(desc, mesh.transformed(desc.transform), jobs);
  setup.smoothing = desc.smoothing;
  setup.material = desc.material;
  setup.lights = desc.lights;
  setup.field = &field;
  setup.ambient = parse_ambient(a.ambient, background ? &*background : nullptr);
  if (!field.ref_depth_hash.empty() && field.ref_depth_hash != depth_hash(setup.reference_depth)) {
    err << "warning: reference depth differs from the one used at bake time\n";
  }

  if (!a.depth.empty()) {
    save_png(render_frame(load_metric_depth(a.depth, desc.camera), setup, jobs), a.out);
    err << "wrote " << a.out << "\n";
    return kExitOk;
  }
  const auto files = list_depth_files(a.depth_dir);
  std::filesystem::create_directories(a.out);
  for (const auto& f : files) {
    const auto target = std::filesystem::path(a.out) / (f.stem().string() + ".png");
    save_png(render_frame(load_metric_depth(f, desc.camera), setup, jobs), target);
  }
  err << "wrote " << files.size() << " images to " << a.out << "\n";
  return kExitOk;
}

int cmd_synth_depth(const SynthArgs& a, std::ostream& err) {
  if (a.none == !a.primitive.empty()) throw UsageError("synth-depth needs exactly one of --primitive or --none");
  Primitive primitive;
  if (a.primitive == "sphere") {
    if (!(a.radius > 0.0)) throw UsageError("--radius must be positive");
    if (a.pos.size() != 3) throw UsageError("--pos needs X,Y,Z");
    primitive = SpherePrimitive{Vec3(a.pos[0], a.pos[1], a.pos[2]), a.radius};
  } else if (a.primitive == "box") {
    if (a.pos.size() != 3) throw UsageError("--pos needs X,Y,Z");
    if (a.dims.size() != 3 || !(std::min({a.dims[0], a.dims[1], a.dims[2]}) > 0.0)) {
      throw UsageError("--dims needs three positive extents DX,DY,DZ");
    }
    BoxPrimitive box;
    box.pose.translation = Vec3(a.pos[0], a.pos[1], a.pos[2]);
    box.dims = Vec3(a.dims[0], a.dims[1], a.dims[2]);
    primitive = box;
  } else if (!a.primitive.empty()) {
    throw UsageError("--primitive must be sphere or box");
  }
  const SensorDescription desc = load_sensor_config(a.config);
  const TriangleMesh aligned = load_aligned_mesh(desc);
  const DepthMap d = synth_depth(desc.camera, &aligned, primitive, resolve_jobs(a.jobs));
  save_depth_map(d, a.out, desc.camera.z_near, desc.camera.z_far);
  err << "wrote " << a.out << " and " << sidecar_path(a.out).string() << "\n";
  return kExitOk;
}

int cmd_compare(const CompareArgs& a, std::ostream& err) {
  const MetricsReport report = dataset_compare(a.real, a.sim, resolve_jobs(a.jobs));
  write_file_atomic(a.out, report_to_json(report));
  for (const auto& n : report.unmatched_real) err << "unmatched in --real: " << n << "\n";
  for (const auto& n : report.unmatched_sim) err << "unmatched in --sim: " << n << "\n";
  err << report.pairs.size() << " pairs: MAE " << std::fixed << std::setprecision(3) << report.mean_mae_percent
      << "%, SSIM " << std::setprecision(6) << report.mean_ssim << ", PSNR ";
  if (report.mean_psnr_db) {
    err << std::setprecision(2) << *report.mean_psnr_db << " dB\n";
  } else {
    err << "infinite\n";
  }
  return kExitOk;
}

int cmd_field_viz(const VizArgs& a, std::ostream& err) {
  const SensorDescription desc = load_sensor_config(a.config);
  const TriangleMesh mesh = load_mesh(desc.mesh_file());
  const LightField field = load_light_field(a.fields);
  if (field.width() != desc.camera.width || field.height() != desc.camera.height) {
    throw ValidationError("light field resolution does not match the camera");
  }
  if (field.mesh_hash != mesh.content_hash()) err << "warning: light field was baked for a different mesh\n";
  const int jobs = resolve_jobs(a.jobs);
  const TriangleMesh aligned = mesh.transformed(desc.transform);
  const PixelSurface surface =
      locate_pixels(aligned, desc.camera, sensor_reference_depth(desc, aligned, jobs), desc.snap_distance, jobs);
  const auto samples = field_samples(field, surface);
  save_field_ply(samples, a.out);
  err << "wrote " << samples.size() << " points to " << a.out << "\n";
  return kExitOk;
}

void add_jobs(CLI::App* cmd, int& jobs) {
  cmd->add_option("--jobs", jobs, "Worker threads (default: all hardware threads)")
      ->envname("CURVETAC_JOBS")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate tactile images of curved camera-based sensors from baked light fields"};
  app.name("curvetac");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  BakeArgs bake_args;
  auto* bake_cmd = app.add_subcommand("bake", "Bake per-pixel light directions for a sensor");
  bake_cmd->add_option("--config", bake_args.config, "Sensor config JSON")->required()->check(CLI::ExistingFile);
  bake_cmd->add_option("--method", bake_args.method, "Field method (default: config method)")
      ->check(CLI::IsMember({"linear", "plane", "geodesic", "transport"}));
  bake_cmd->add_option("--ref-depth", bake_args.ref_depth, "No-contact depth map (PFM)")->required();
  bake_cmd->add_option("--out", bake_args.out, "Output light field (.tlfb)")->required();
  add_jobs(bake_cmd, bake_args.jobs);

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "Render tactile images from depth maps");
  render_cmd->add_option("--config", render_args.config, "Sensor config JSON")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--fields", render_args.fields, "Baked light field (.tlfb)")->required();
  auto* depth_opt = render_cmd->add_option("--depth", render_args.depth, "Single depth map (PFM)");
  auto* dir_opt = render_cmd->add_option("--depth-dir", render_args.depth_dir, "Directory of depth maps");
  depth_opt->excludes(dir_opt);
  render_cmd->add_option("--out", render_args.out, "Output PNG, or directory with --depth-dir")->required();
  render_cmd->add_option("--ambient", render_args.ambient, "none | solid:#rrggbb | background");
  render_cmd->add_flag("--force", render_args.force, "Render even if the field was baked for another mesh");
  add_jobs(render_cmd, render_args.jobs);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth-depth", "Ray-cast a synthetic depth map");
  synth_cmd->add_option("--config", synth_args.config, "Sensor config JSON")->required()->check(CLI::ExistingFile);
  auto* prim_opt = synth_cmd->add_option("--primitive", synth_args.primitive, "sphere | box");
  auto* none_opt = synth_cmd->add_flag("--none", synth_args.none, "Membrane only (reference depth)");
  prim_opt->excludes(none_opt);
  synth_cmd->add_option("--radius", synth_args.radius, "Sphere radius (m)");
  synth_cmd->add_option("--pos", synth_args.pos, "Primitive centre X,Y,Z in camera frame (m)")->delimiter(',');
  synth_cmd->add_option("--dims", synth_args.dims, "Box extents DX,DY,DZ (m)")->delimiter(',');
  synth_cmd->add_option("--out", synth_args.out, "Output PFM (sidecar written next to it)")->required();
  add_jobs(synth_cmd, synth_args.jobs);

  CompareArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare", "Compare real and simulated image sets");
  compare_cmd->add_option("--real", compare_args.real, "Directory of real PNGs")->required();
  compare_cmd->add_option("--sim", compare_args.sim, "Directory of simulated PNGs")->required();
  compare_cmd->add_option("--out", compare_args.out, "Report JSON")->required();
  add_jobs(compare_cmd, compare_args.jobs);

  VizArgs viz_args;
  auto* viz_cmd = app.add_subcommand("field-viz", "Export a light field as a PLY point cloud");
  viz_cmd->add_option("--fields", viz_args.fields, "Baked light field (.tlfb)")->required();
  viz_cmd->add_option("--config", viz_args.config, "Sensor config JSON")->required()->check(CLI::ExistingFile);
  viz_cmd->add_option("--out", viz_args.out, "Output PLY")->required();
  add_jobs(viz_cmd, viz_args.jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*bake_cmd) return cmd_bake(bake_args, err);
    if (*render_cmd) return cmd_render(render_args, err);
    if (*synth_cmd) return cmd_synth_depth(synth_args, err);
    if (*compare_cmd) return cmd_compare(compare_args, err);
    if (*viz_cmd) return cmd_field_viz(viz_args, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace curvetac
