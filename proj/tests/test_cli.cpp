#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "curvetac/cli.hpp"
#include "curvetac/depth.hpp"
#include "curvetac/fixtures.hpp"
#include "curvetac/image_io.hpp"
#include "curvetac/light_field.hpp"
#include "curvetac/mesh_primitives.hpp"
#include "curvetac/ply_export.hpp"

using namespace curvetac;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "curvetac");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small flat sensor on disk with its reference depth and a linear bake.
struct Workspace {
  fs::path dir;
  fs::path config;
  fs::path ref;
  fs::path fields;

  Workspace(const std::string& name, SensorFixture fixture) {
    dir = fs::temp_directory_path() / "curvetac_test_cli" / name;
    fs::remove_all(dir);
    write_fixture(fixture, dir);
    config = dir / "sensor.json";
    ref = dir / "ref.pfm";
    fields = dir / "linear.tlfb";
    REQUIRE(run({"synth-depth", "--config", config.string(), "--none", "--out", ref.string()}).code == 0);
    REQUIRE(run({"bake", "--config", config.string(), "--method", "linear", "--ref-depth", ref.string(), "--out",
                 fields.string()})
                .code == 0);
  }

  std::vector<fs::path> entries() const {
    std::vector<fs::path> e;
    for (const auto& x : fs::directory_iterator(dir)) e.push_back(x.path().filename());
    std::sort(e.begin(), e.end());
    return e;
  }
};

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  const Result help = run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("bake") != std::string::npos);

  Workspace ws("usage", flat_fixture(32, 24));
  const Result missing = run({"bake", "--config", ws.config.string(), "--out", (ws.dir / "x.tlfb").string()});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("--ref-depth") != std::string::npos);
  CHECK(run({"synth-depth", "--config", ws.config.string(), "--primitive", "sphere", "--radius", "0", "--pos",
             "0,0,0.03", "--out", (ws.dir / "s.pfm").string()})
            .code == kExitUsage);
  CHECK(run({"synth-depth", "--config", ws.config.string(), "--out", (ws.dir / "s.pfm").string()}).code ==
        kExitUsage);
  CHECK(run({"render", "--config", ws.config.string(), "--fields", ws.fields.string(), "--depth", ws.ref.string(),
             "--out", (ws.dir / "x.png").string(), "--ambient", "purple"})
            .code == kExitUsage);
}

TEST_CASE("synthetic depth and rendering") {
  Workspace ws("render", flat_fixture(32, 24));
  const auto png = ws.dir / "ref.png";

  SUBCASE("the reference frame reproduces the background") {
    REQUIRE(run({"render", "--config", ws.config.string(), "--fields", ws.fields.string(), "--depth",
                 ws.ref.string(), "--out", png.string(), "--ambient", "background"})
                .code == 0);
    const RgbImage img = load_png(png);
    const RgbImage bg = load_png(ws.dir / "background.png");
    REQUIRE(img.width == bg.width);
    for (size_t i = 0; i < img.data.size(); ++i) CHECK(std::abs(int(img.data[i]) - int(bg.data[i])) <= 1);
  }
  SUBCASE("solid ambient") {
    REQUIRE(run({"render", "--config", ws.config.string(), "--fields", ws.fields.string(), "--depth",
                 ws.ref.string(), "--out", png.string(), "--ambient", "solid:#204060"})
                .code == 0);
    const RgbImage img = load_png(png);
    CHECK(img.at(0, 0, 0) >= 0x20);
  }
  SUBCASE("a sphere changes depth only inside its contact disc") {
    const auto pressed = ws.dir / "pressed.pfm";
    REQUIRE(run({"synth-depth", "--config", ws.config.string(), "--primitive", "sphere", "--radius", "0.01",
                 "--pos", "0,0,0.039", "--out", pressed.string()})
                .code == 0);
    const DepthMap ref = load_depth_map(ws.ref);
    const DepthMap d = load_depth_map(pressed);
    const CameraIntrinsics cam = CameraIntrinsics::make(32, 24, std::numbers::pi / 2, 0.001, 0.1);
    int changed = 0;
    for (int v = 0; v < 24; ++v) {
      for (int u = 0; u < 32; ++u) {
        const Vec3 ray = cam.pixel_ray(u, v);
        // The disc where the sphere pokes through the plane z = 0.03.
        const Vec3 on_plane = ray * (0.03 / ray.z());
        const bool inside = (on_plane - Vec3(0, 0, 0.039)).norm() < 0.01;
        if (d.at(u, v) != ref.at(u, v)) {
          ++changed;
          CHECK(inside);
        }
      }
    }
    CHECK(changed > 0);
  }
  SUBCASE("directory batches keep names") {
    const auto in = ws.dir / "depths";
    const auto out = ws.dir / "frames";
    fs::create_directories(in);
    for (int k = 0; k < 18; ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%02d.pfm", k);
      fs::copy_file(ws.ref, in / name);
      fs::copy_file(sidecar_path(ws.ref), sidecar_path(in / name));
    }
    REQUIRE(run({"render", "--config", ws.config.string(), "--fields", ws.fields.string(), "--depth-dir",
                 in.string(), "--out", out.string()})
                .code == 0);
    int count = 0;
    for (const auto& e : fs::directory_iterator(out)) {
      CHECK(e.path().extension() == ".png");
      CHECK(fs::exists(in / (e.path().stem().string() + ".pfm")));
      ++count;
    }
    CHECK(count == 18);
  }
  SUBCASE("corrupted light field") {
    std::string bytes = slurp(ws.fields);
    bytes.resize(bytes.size() - 7);
    const auto bad = ws.dir / "bad.tlfb";
    std::ofstream(bad, std::ios::binary) << bytes;
    const Result r = run({"render", "--config", ws.config.string(), "--fields", bad.string(), "--depth",
                          ws.ref.string(), "--out", png.string()});
    CHECK(r.code == kExitData);
    CHECK(r.err.find("truncated") != std::string::npos);
    CHECK_FALSE(fs::exists(png));
  }
  SUBCASE("a field baked for another mesh needs --force") {
    SensorFixture coarse = flat_fixture(32, 24);
    coarse.mesh = make_tri_grid(64, 0.04, 0.03);
    Workspace other("render_other", coarse);
    const std::vector<std::string> args = {"render", "--config", ws.config.string(), "--fields",
                                           other.fields.string(), "--depth", ws.ref.string(), "--out", png.string()};
    CHECK(run(args).code == kExitData);
    std::vector<std::string> forced = args;
    forced.push_back("--force");
    CHECK(run(forced).code == 0);
  }
}

TEST_CASE("failed commands leave nothing behind") {
  Workspace ws("atomic", flat_fixture(32, 24));
  const auto before = ws.entries();
  const auto small = ws.dir / "small";
  fs::create_directories(small);
  write_fixture(flat_fixture(16, 12), small);
  const auto small_ref = small / "ref.pfm";
  REQUIRE(run({"synth-depth", "--config", (small / "sensor.json").string(), "--none", "--out", small_ref.string()})
              .code == 0);

  const Result bake = run({"bake", "--config", ws.config.string(), "--ref-depth", small_ref.string(), "--out",
                           (ws.dir / "out.tlfb").string()});
  CHECK(bake.code == kExitData);
  const Result render = run({"render", "--config", ws.config.string(), "--fields", ws.fields.string(), "--depth",
                             small_ref.string(), "--out", (ws.dir / "out.png").string()});
  CHECK(render.code == kExitData);
  CHECK(ws.entries() == [&] {
    auto e = before;
    e.push_back("small");
    std::sort(e.begin(), e.end());
    return e;
  }());
}

TEST_CASE("compare and field export") {
  Workspace ws("compare", geltip_fixture(48, 36));
  const auto frames = ws.dir / "frames";
  fs::create_directories(frames);
  save_png(load_png(ws.dir / "background.png"), frames / "a.png");
  save_png(RgbImage(48, 36, 7), frames / "b.png");

  const auto report = ws.dir / "report.json";
  REQUIRE(run({"compare", "--real", frames.string(), "--sim", frames.string(), "--out", report.string()}).code == 0);
  const auto doc = nlohmann::json::parse(slurp(report));
  CHECK(doc["aggregate"]["mae_percent"] == 0.0);
  CHECK(doc["aggregate"]["ssim"] == 1.0);
  CHECK(doc["pairs"].size() == 2);

  const auto empty = ws.dir / "empty";
  fs::create_directories(empty);
  CHECK(run({"compare", "--real", frames.string(), "--sim", empty.string(), "--out", report.string()}).code ==
        kExitData);

  const auto transport = ws.dir / "transport.tlfb";
  REQUIRE(run({"bake", "--config", ws.config.string(), "--ref-depth", ws.ref.string(), "--out", transport.string()})
              .code == 0);
  const auto ply = ws.dir / "field.ply";
  REQUIRE(run({"field-viz", "--fields", transport.string(), "--config", ws.config.string(), "--out", ply.string()})
              .code == 0);
  const auto samples = decode_field_ply(slurp(ply));
  REQUIRE(!samples.empty());
  int tangent = 0;
  for (const auto& s : samples) tangent += std::abs(s.direction.dot(s.normal)) <= 0.05;
  CHECK(tangent >= 0.99 * samples.size());

  REQUIRE(run({"field-viz", "--fields", ws.fields.string(), "--config", ws.config.string(), "--out", ply.string()})
              .code == 0);
  const SensorFixture fx = geltip_fixture(48, 36);
  for (const auto& s : decode_field_ply(slurp(ply))) {
    const Vec3 radial = (s.position - fx.desc.lights[s.light].position).normalized();
    CHECK((s.direction - radial).norm() < 1e-5);
  }
}

TEST_CASE("the installed tool honours the jobs variable") {
  Workspace ws("binary", geltip_fixture(48, 36));
  const auto one = ws.dir / "one.tlfb";
  const auto many = ws.dir / "many.tlfb";
  const std::string bin = CURVETAC_BIN;
  const std::string common = " bake --config " + ws.config.string() + " --method plane --ref-depth " +
                             ws.ref.string() + " 2>/dev/null";
  REQUIRE(std::system(("CURVETAC_JOBS=1 " + bin + common + " --out " + one.string()).c_str()) == 0);
  REQUIRE(std::system(("CURVETAC_JOBS=3 " + bin + common + " --out " + many.string()).c_str()) == 0);
  CHECK(slurp(one) == slurp(many));
  const int status = std::system((bin + " bake --config /nonexistent.json 2>/dev/null").c_str());
  CHECK(WEXITSTATUS(status) == kExitUsage);
}
