#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "curvetac/errors.hpp"
#include "curvetac/fixtures.hpp"
#include "curvetac/renderer.hpp"

using namespace curvetac;

namespace {

constexpr double kPi = std::numbers::pi;

double angle_deg(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)) * 180.0 / kPi;
}

PointCloud grid_cloud(int w, int h, const std::function<Vec3(int, int)>& point) {
  PointCloud c;
  c.width = w;
  c.height = h;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) c.points.push_back(point(u, v));
  }
  c.valid.assign(c.points.size(), 1);
  return c;
}

// One-pixel scene with a prescribed normal and, per light, the unit vector
// toward the light.
struct Pixel {
  PointCloud cloud;
  NormalMap normals;
  LightField field;
  std::vector<LightSourceSpec> lights;
};

Pixel single_pixel(const Vec3& n, const std::vector<Vec3>& to_light) {
  Pixel p;
  p.cloud = grid_cloud(1, 1, [](int, int) { return Vec3(0, 0, 0.03); });
  p.normals.width = p.normals.height = 1;
  p.normals.normals = {n};
  p.normals.valid = {1};
  p.field = LightField(1, 1, static_cast<int>(to_light.size()));
  for (size_t m = 0; m < to_light.size(); ++m) {
    p.field.set_direction(static_cast<int>(m), 0, 0, -to_light[m]);
    p.lights.push_back(LightSourceSpec{});
  }
  return p;
}

struct BakedSensor {
  SensorFixture fixture;
  DepthMap reference;
  LightField field;

  RenderSetup setup(const Ambient& ambient) const {
    RenderSetup s;
    s.camera = fixture.desc.camera;
    s.reference_depth = reference;
    s.smoothing = fixture.desc.smoothing;
    s.material = fixture.desc.material;
    s.lights = fixture.desc.lights;
    s.field = &field;
    s.ambient = ambient;
    return s;
  }
};

BakedSensor bake_sensor(SensorFixture fixture, FieldMethod method) {
  BakedSensor b{std::move(fixture), {}, {}};
  const TriangleMesh aligned = b.fixture.mesh.transformed(b.fixture.desc.transform);
  b.reference = sensor_reference_depth(b.fixture.desc, aligned);
  BakeJob job;
  job.mesh = &b.fixture.mesh;
  job.transform = b.fixture.desc.transform;
  job.camera = b.fixture.desc.camera;
  job.reference_depth = b.reference;
  job.lights = b.fixture.desc.lights;
  job.method = method;
  b.field = bake(job);
  return b;
}

}  // namespace

TEST_CASE("sobel normals") {
  SUBCASE("plane facing the camera") {
    const PointCloud c = grid_cloud(9, 7, [](int u, int v) { return Vec3(u * 1e-3, v * 1e-3, 0.05); });
    const NormalMap n = surface_normals(c);
    for (int v = 0; v < 7; ++v) {
      for (int u = 0; u < 9; ++u) {
        REQUIRE(n.is_valid(u, v));
        CHECK((n.at(u, v) - Vec3(0, 0, -1)).norm() < 1e-12);
      }
    }
  }
  SUBCASE("ramp z = x") {
    const PointCloud c = grid_cloud(9, 7, [](int u, int v) { return Vec3(u * 1e-3, v * 1e-3, 0.05 + u * 1e-3); });
    const NormalMap n = surface_normals(c);
    const Vec3 want = Vec3(1, 0, -1).normalized();
    for (int v = 1; v < 6; ++v) {
      for (int u = 1; u < 8; ++u) CHECK(angle_deg(n.at(u, v), want) <= 1.0);
    }
  }
  SUBCASE("sphere cap") {
    // The sphere fills the whole view, so every pixel sees the cap.
    const CameraIntrinsics cam = CameraIntrinsics::make(64, 64, kPi / 6, 0.01, 1.0);
    const Vec3 centre(0, 0, 0.5);
    const DepthMap d = synth_depth(cam, nullptr, SpherePrimitive{centre, 0.2});
    const PointCloud c = inverse_project(d, cam);
    const NormalMap n = surface_normals(c);
    double sum = 0.0;
    int checked = 0;
    for (int v = 1; v < 63; ++v) {
      for (int u = 1; u < 63; ++u) {
        REQUIRE(d.at(u, v) < 1.0);
        REQUIRE(n.is_valid(u, v));
        const double err = angle_deg(n.at(u, v), c.at(u, v) - centre);
        CHECK(err <= 3.0);
        sum += err;
        ++checked;
      }
    }
    CHECK(sum / checked < 1.0);
  }
  SUBCASE("invalid neighbours") {
    PointCloud c = grid_cloud(5, 5, [](int u, int v) { return Vec3(u, v, 1.0); });
    c.valid[2 * 5 + 2] = 0;
    const NormalMap n = surface_normals(c);
    for (int v = 1; v <= 3; ++v) {
      for (int u = 1; u <= 3; ++u) CHECK_FALSE(n.is_valid(u, v));
    }
    CHECK(n.is_valid(0, 0));
    CHECK(std::abs(n.at(0, 0).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("phong shading of single pixels") {
  MaterialParams mat{0.0, 1.0, 0.0, 16.0};
  const Vec3 n(0, 0, 1);

  SUBCASE("full diffuse") {
    Pixel p = single_pixel(n, {Vec3(0, 0, 1)});
    p.lights[0].diffuse = Vec3(1, 0, 0);
    const RgbImage img = phong_shade(p.cloud, p.normals, p.field, p.lights, mat, Ambient::none());
    CHECK(img.at(0, 0, 0) == 255);
    CHECK(img.at(0, 0, 1) == 0);
    CHECK(img.at(0, 0, 2) == 0);
  }
  SUBCASE("tangent light is dark") {
    const Pixel p = single_pixel(n, {Vec3(1, 0, 0)});
    const MaterialParams shiny{0.0, 1.0, 1.0, 1.0};
    const auto rad = shade_radiance(p.cloud, p.normals, p.field, p.lights, shiny, Ambient::none());
    for (double x : rad) CHECK(x == 0.0);
  }
  SUBCASE("specular peak along the view direction") {
    const Pixel p = single_pixel(n, {Vec3(0, 0, 1)});
    const MaterialParams spec{0.0, 0.0, 0.5, 8.0};
    const auto rad = shade_radiance(p.cloud, p.normals, p.field, p.lights, spec, Ambient::none());
    for (double x : rad) CHECK(x == doctest::Approx(127.5));
  }
  SUBCASE("back-facing light adds nothing") {
    const Pixel p = single_pixel(n, {Vec3(0, 0.6, -0.8)});
    const MaterialParams all{0.0, 1.0, 1.0, 2.0};
    for (double x : shade_radiance(p.cloud, p.normals, p.field, p.lights, all, Ambient::none())) CHECK(x == 0.0);
  }
  SUBCASE("light count mismatch") {
    Pixel p = single_pixel(n, {Vec3(0, 0, 1)});
    p.lights.push_back(LightSourceSpec{});
    CHECK_THROWS_AS(phong_shade(p.cloud, p.normals, p.field, p.lights, mat, Ambient::none()), ValidationError);
  }
}

TEST_CASE("quantisation rounds half to even") {
  const RgbImage img = quantize({0.5, 1.5, 2.5, -3.0, 300.0, 254.5}, 2, 1);
  CHECK(img.data == std::vector<std::uint8_t>{0, 2, 2, 0, 255, 254});
}

TEST_CASE("shading properties on random scenes") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int w = 16, h = 12;
  const PointCloud cloud = grid_cloud(w, h, [](int u, int v) { return Vec3(u, v, 1.0); });
  NormalMap normals;
  normals.width = w;
  normals.height = h;
  for (int i = 0; i < w * h; ++i) {
    Vec3 nv(unit(rng), unit(rng), -1.0);
    normals.normals.push_back(nv.normalized());
  }
  normals.valid.assign(w * h, 1);
  LightField both(w, h, 2);
  LightField only_a(w, h, 1), only_b(w, h, 1);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Vec3 a = Vec3(unit(rng), unit(rng), unit(rng)).normalized();
      const Vec3 b = Vec3(unit(rng), unit(rng), unit(rng)).normalized();
      both.set_direction(0, u, v, a);
      both.set_direction(1, u, v, b);
      only_a.set_direction(0, u, v, a);
      only_b.set_direction(0, u, v, b);
    }
  }
  LightSourceSpec la{Vec3::Zero(), Vec3(0.4, 0.3, 0.2), Vec3(0.3, 0.2, 0.1)};
  LightSourceSpec lb{Vec3::Zero(), Vec3(0.1, 0.3, 0.4), Vec3(0.2, 0.2, 0.2)};
  const MaterialParams mat{1.0, 0.6, 0.2, 16.0};

  SUBCASE("lights add up") {
    const auto sum = shade_radiance(cloud, normals, both, {la, lb}, mat, Ambient::none());
    const auto a = shade_radiance(cloud, normals, only_a, {la}, mat, Ambient::none());
    const auto b = shade_radiance(cloud, normals, only_b, {lb}, mat, Ambient::none());
    for (size_t i = 0; i < sum.size(); ++i) CHECK(sum[i] == doctest::Approx(a[i] + b[i]).epsilon(1e-12));
  }
  SUBCASE("diffuse scales linearly") {
    const MaterialParams diffuse{0.0, 0.6, 0.0, 16.0};
    const auto base = shade_radiance(cloud, normals, both, {la, lb}, diffuse, Ambient::none());
    LightSourceSpec sa = la, sb = lb;
    sa.diffuse *= 0.37;
    sb.diffuse *= 0.37;
    const auto scaled = shade_radiance(cloud, normals, both, {sa, sb}, diffuse, Ambient::none());
    for (size_t i = 0; i < base.size(); ++i) CHECK(scaled[i] == doctest::Approx(0.37 * base[i]).epsilon(1e-12));
  }
  SUBCASE("background compositing") {
    RgbImage bg(w, h);
    for (auto& x : bg.data) x = static_cast<std::uint8_t>(rng() % 256);
    const MaterialParams ambient_only{0.7, 0.0, 0.0, 16.0};
    const auto rad = shade_radiance(cloud, normals, both, {la, lb}, ambient_only, Ambient::image(bg));
    for (size_t i = 0; i < rad.size(); ++i) CHECK(rad[i] == 0.7 * bg.data[i]);
    RgbImage small(w - 1, h);
    CHECK_THROWS_AS(shade_radiance(cloud, normals, both, {la, lb}, mat, Ambient::image(small)), ValidationError);
  }
  SUBCASE("parallel shading is identical") {
    CHECK(phong_shade(cloud, normals, both, {la, lb}, mat, Ambient::solid(Vec3(0.1, 0.2, 0.3)), 1) ==
          phong_shade(cloud, normals, both, {la, lb}, mat, Ambient::solid(Vec3(0.1, 0.2, 0.3)), 4));
  }
}

TEST_CASE("material validation") {
  CHECK_NOTHROW(MaterialParams{}.validate());
  CHECK_THROWS_AS((MaterialParams{1.2, 0.6, 0.2, 16.0}.validate()), ValidationError);
  CHECK_THROWS_AS((MaterialParams{1.0, 0.6, 0.2, 0.5}.validate()), ValidationError);
}

TEST_CASE("rendering a fingertip sensor") {
  const BakedSensor transport = bake_sensor(geltip_fixture(160, 120), FieldMethod::transport);
  const RgbImage& bg = transport.fixture.background;

  SUBCASE("no contact is dark without ambient light") {
    const RgbImage img = render_frame(transport.reference, transport.setup(Ambient::none()));
    for (auto x : img.data) CHECK(x <= 1);
  }
  SUBCASE("no contact reproduces the background") {
    const RgbImage img = render_frame(transport.reference, transport.setup(Ambient::image(bg)));
    for (size_t i = 0; i < img.data.size(); ++i) CHECK(std::abs(int(img.data[i]) - int(bg.data[i])) <= 1);
  }
  SUBCASE("the linear field lights up the tip") {
    const BakedSensor linear = bake_sensor(geltip_fixture(160, 120), FieldMethod::linear);
    const RgbImage img = render_frame(linear.reference, linear.setup(Ambient::none()));
    int bright = 0;
    for (int v = 50; v < 70; ++v) {
      for (int u = 70; u < 90; ++u) bright += (img.at(u, v, 0) + img.at(u, v, 1) + img.at(u, v, 2)) > 0;
    }
    CHECK(bright > 300);
  }
  SUBCASE("a pressed sphere only lights its neighbourhood") {
    const CameraIntrinsics& cam = transport.fixture.desc.camera;
    const TriangleMesh aligned = transport.fixture.mesh.transformed(transport.fixture.desc.transform);
    DepthMap pressed = synth_depth(cam, &aligned, SpherePrimitive{Vec3(0.0135, 0.0, 0.02), 0.004});
    for (double& x : pressed.values) x = static_cast<float>(x);
    std::vector<std::pair<int, int>> contact;
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        if (pressed.at(u, v) != transport.reference.at(u, v)) contact.emplace_back(u, v);
      }
    }
    REQUIRE(!contact.empty());
    REQUIRE(contact.size() < 2000);
    const RgbImage img = render_frame(pressed, transport.setup(Ambient::none()));
    const double reach = 3.0 * transport.fixture.desc.smoothing.sigma;
    int far = 0, far_dark = 0, lit_near = 0;
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        double nearest = 1e9;
        for (const auto& [cu, cv] : contact) nearest = std::min(nearest, std::hypot(u - cu, v - cv));
        const bool dark = img.at(u, v, 0) == 0 && img.at(u, v, 1) == 0 && img.at(u, v, 2) == 0;
        if (nearest > reach) {
          ++far;
          far_dark += dark;
        } else {
          lit_near += !dark;
        }
      }
    }
    CHECK(static_cast<double>(far_dark) / far >= 0.995);
    CHECK(lit_near > 0);
  }
  SUBCASE("resolution mismatch") {
    CHECK_THROWS_AS(render_frame(DepthMap(10, 10, 0.05), transport.setup(Ambient::none())), ValidationError);
  }
}
