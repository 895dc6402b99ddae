#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include <json.hpp>

#include "curvetac/errors.hpp"
#include "curvetac/metrics.hpp"

using namespace curvetac;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "curvetac_test_metrics" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

RgbImage pattern(int w, int h) {
  RgbImage img(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      for (int c = 0; c < 3; ++c) img.at(u, v, c) = (u * 7 + v * 13 + c * 29 + ((u * v) % 17) * 5) % 256;
    }
  }
  return img;
}

RgbImage perturbed(const RgbImage& a) {
  RgbImage b = a;
  for (int v = 0; v < a.height; ++v) {
    for (int u = 0; u < a.width; ++u) {
      for (int c = 0; c < 3; ++c) b.at(u, v, c) = (a.at(u, v, c) + ((u * 3 + v * 5 + c) % 23) * 3) % 256;
    }
  }
  return b;
}

RgbImage waves(int w, int h, double base, double amp, double fu, double fv) {
  RgbImage img(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      for (int c = 0; c < 3; ++c) {
        img.at(u, v, c) = static_cast<std::uint8_t>(std::floor(base + amp * std::sin(u / fu + c) * std::cos(v / fv)));
      }
    }
  }
  return img;
}

RgbImage random_image(std::mt19937& rng, int w, int h, int lo = 0, int hi = 255) {
  RgbImage img(w, h);
  std::uniform_int_distribution<int> d(lo, hi);
  for (auto& x : img.data) x = static_cast<std::uint8_t>(d(rng));
  return img;
}

}  // namespace

TEST_CASE("mean absolute error") {
  const RgbImage black(20, 10, 0), white(20, 10, 255);
  CHECK(mae_percent(black, black) == 0.0);
  CHECK(mae_percent(black, white) == 100.0);
  RgbImage half = black;
  for (int v = 0; v < 5; ++v) {
    for (int u = 0; u < 20; ++u) {
      for (int c = 0; c < 3; ++c) half.at(u, v, c) = 51;
    }
  }
  CHECK(mae_percent(black, half) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(mae_percent(black, RgbImage(10, 20)), ValidationError);
}

TEST_CASE("psnr") {
  const RgbImage a(16, 16, 100), b(16, 16, 101);
  CHECK_FALSE(psnr(a, a).has_value());
  CHECK(*psnr(a, b) == doctest::Approx(48.1308).epsilon(1e-5));
  CHECK(std::abs(*psnr(a, b) - 48.13) <= 0.01);
  CHECK(*psnr(RgbImage(4, 4, 0), RgbImage(4, 4, 255)) == 0.0);
}

TEST_CASE("ssim") {
  SUBCASE("reference values") {
    // Pinned from scikit-image structural_similarity (gaussian_weights, sigma 1.5,
    // population covariance, data_range 255, channel mean).
    const RgbImage a = pattern(40, 30);
    CHECK(ssim(a, perturbed(a)) == doctest::Approx(0.345961735).epsilon(1e-7));
    RgbImage neg = a;
    for (auto& x : neg.data) x = 255 - x;
    CHECK(ssim(a, neg) == doctest::Approx(-0.780326078).epsilon(1e-7));
    CHECK(ssim(a, neg) < 0.5);
    CHECK(ssim(waves(40, 30, 100, 60, 5.0, 7.0), waves(40, 30, 110, 50, 5.5, 6.0)) ==
          doctest::Approx(0.851309995).epsilon(1e-7));
  }
  SUBCASE("constant patches") {
    const double c1 = (0.01 * 255) * (0.01 * 255);
    const double want = (2.0 * 100 * 110 + c1) / (100.0 * 100 + 110.0 * 110 + c1);
    CHECK(ssim(RgbImage(20, 20, 100), RgbImage(20, 20, 110)) == doctest::Approx(want).epsilon(1e-12));
  }
  SUBCASE("identity, symmetry and size") {
    std::mt19937 rng(4);
    const RgbImage a = random_image(rng, 32, 24), b = random_image(rng, 32, 24);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ssim(a, b) == ssim(b, a));
    CHECK(mae_percent(a, b) == mae_percent(b, a));
    CHECK(*psnr(a, b) == *psnr(b, a));
    CHECK(ssim(a, b) >= -1.0);
    CHECK(ssim(a, b) <= 1.0);
    CHECK_THROWS_AS(ssim(RgbImage(10, 30), RgbImage(10, 30)), ValidationError);
  }
}

TEST_CASE("dataset comparison") {
  std::mt19937 rng(12);
  const auto real = fresh_dir("real");
  const auto sim = fresh_dir("sim");
  const RgbImage a1 = random_image(rng, 24, 16), a2 = random_image(rng, 24, 16);
  const RgbImage b1 = random_image(rng, 24, 16), b2 = a2;
  save_png(a1, real / "f1.png");
  save_png(a2, real / "f2.png");
  save_png(a1, real / "only_real.png");
  save_png(b1, sim / "f1.png");
  save_png(b2, sim / "f2.png");

  SUBCASE("a directory against itself") {
    const MetricsReport r = dataset_compare(real, real);
    REQUIRE(r.pairs.size() == 3);
    for (const auto& p : r.pairs) {
      CHECK(p.mae_percent == 0.0);
      CHECK(p.ssim == 1.0);
      CHECK_FALSE(p.psnr_db.has_value());
    }
    CHECK_FALSE(r.mean_psnr_db.has_value());
    const auto doc = nlohmann::json::parse(report_to_json(r));
    CHECK(doc["pairs"][0]["psnr_db"].is_null());
    CHECK(doc["pairs"][0]["psnr_infinite"] == true);
  }
  SUBCASE("aggregates are plain means over matched pairs") {
    const MetricsReport r = dataset_compare(real, sim, 2);
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.pairs[0].name == "f1.png");
    CHECK(r.pairs[1].name == "f2.png");
    CHECK(r.unmatched_real == std::vector<std::string>{"only_real.png"});
    CHECK(r.unmatched_sim.empty());
    CHECK(r.mean_mae_percent == doctest::Approx((mae_percent(a1, b1) + 0.0) / 2));
    CHECK(r.mean_ssim == doctest::Approx((ssim(a1, b1) + 1.0) / 2));
    REQUIRE(r.mean_psnr_db.has_value());
    CHECK(*r.mean_psnr_db == doctest::Approx(*psnr(a1, b1)));
    const auto doc = nlohmann::json::parse(report_to_json(r));
    CHECK(doc["pairs"].size() == 2);
    CHECK(doc["pairs"][0]["mae_percent"].get<double>() == doctest::Approx(r.pairs[0].mae_percent).epsilon(1e-5));
    CHECK(doc["unmatched"]["real"][0] == "only_real.png");
  }
  SUBCASE("nothing in common") {
    const auto empty = fresh_dir("empty");
    save_png(a1, empty / "other.png");
    CHECK_THROWS_AS(dataset_compare(real, empty), ValidationError);
  }
  SUBCASE("mismatched sizes") {
    const auto odd = fresh_dir("odd");
    save_png(RgbImage(8, 8), odd / "f1.png");
    CHECK_THROWS_AS(dataset_compare(real, odd), ValidationError);
  }
}
