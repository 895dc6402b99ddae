#include "curvetac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "curvetac/errors.hpp"
#include "parallel.hpp"

namespace curvetac {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

void require_same_size(const RgbImage& a, const RgbImage& b, const char* what) {
  if (a.width != b.width || a.height != b.height) {
    throw ValidationError(std::string(what) + ": image sizes differ (" + std::to_string(a.width) + "x" +
                          std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                          std::to_string(b.height) + ")");
  }
}

std::vector<double> window_taps() {
  std::vector<double> g(kWindow);
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    g[i] = std::exp(-x * x / (2.0 * kWindowSigma * kWindowSigma));
    sum += g[i];
  }
  for (double& t : g) t /= sum;
  return g;
}

// "Valid" separable filtering: output is (w - 10) x (h - 10).
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h, const std::vector<double>& g) {
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> tmp(static_cast<size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * img[static_cast<size_t>(y) * w + x + k];
      tmp[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[k] * tmp[static_cast<size_t>(y + k) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

double ssim_channel(const RgbImage& a, const RgbImage& b, int c, const std::vector<double>& g) {
  const int w = a.width;
  const int h = a.height;
  const size_t n = static_cast<size_t>(w) * h;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = a.data[i * 3 + c];
    y[i] = b.data[i * 3 + c];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, w, h, g);
  const auto my = filter_valid(y, w, h, g);
  const auto sxx = filter_valid(xx, w, h, g);
  const auto syy = filter_valid(yy, w, h, g);
  const auto sxy = filter_valid(xy, w, h, g);
  double total = 0.0;
  for (size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + kC1) * (2.0 * cov + kC2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2));
  }
  return total / static_cast<double>(mx.size());
}

double round6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return std::strtod(buf, nullptr);
}

std::set<std::string> png_names(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::set<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".png") names.insert(entry.path().filename().string());
  }
  return names;
}

}  // namespace

double mae_percent(const RgbImage& a, const RgbImage& b) {
  require_same_size(a, b, "mae");
  if (a.data.empty()) throw ValidationError("mae: empty images");
  std::uint64_t total = 0;
  for (size_t i = 0; i < a.data.size(); ++i) total += static_cast<std::uint64_t>(std::abs(a.data[i] - b.data[i]));
  return 100.0 * static_cast<double>(total) / (255.0 * static_cast<double>(a.data.size()));
}

double ssim(const RgbImage& a, const RgbImage& b) {
  require_same_size(a, b, "ssim");
  if (a.width < kWindow || a.height < kWindow) {
    throw ValidationError("ssim: images must be at least 11x11, got " + std::to_string(a.width) + "x" +
                          std::to_string(a.height));
  }
  const auto g = window_taps();
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) sum += ssim_channel(a, b, c, g);
  return sum / 3.0;
}

std::optional<double> psnr(const RgbImage& a, const RgbImage& b) {
  require_same_size(a, b, "psnr");
  if (a.data.empty()) throw ValidationError("psnr: empty images");
  std::uint64_t sq = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const std::int64_t d = static_cast<int>(a.data[i]) - static_cast<int>(b.data[i]);
    sq += static_cast<std::uint64_t>(d * d);
  }
  if (sq == 0) return std::nullopt;
  const double mse = static_cast<double>(sq) / static_cast<double>(a.data.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

MetricsReport dataset_compare(const std::filesystem::path& real_dir, const std::filesystem::path& sim_dir, int jobs) {
  const auto real = png_names(real_dir);
  const auto sim = png_names(sim_dir);
  MetricsReport report;
  std::vector<std::string> common;
  for (const auto& n : real) {
    if (sim.count(n)) {
      common.push_back(n);
    } else {
      report.unmatched_real.push_back(n);
    }
  }
  for (const auto& n : sim) {
    if (!real.count(n)) report.unmatched_sim.push_back(n);
  }
  if (common.empty()) {
    throw ValidationError("compare: no PNG file names are shared by " + real_dir.string() + " and " +
                          sim_dir.string());
  }
  report.pairs.resize(common.size());
  parallel_for(common.size(), jobs, [&](size_t i) {
    const RgbImage a = load_png(real_dir / common[i]);
    const RgbImage b = load_png(sim_dir / common[i]);
    PairMetrics& p = report.pairs[i];
    p.name = common[i];
    p.mae_percent = mae_percent(a, b);
    p.ssim = ssim(a, b);
    p.psnr_db = psnr(a, b);
  });
  double psnr_sum = 0.0;
  int finite = 0;
  for (const auto& p : report.pairs) {
    report.mean_mae_percent += p.mae_percent;
    report.mean_ssim += p.ssim;
    if (p.psnr_db) {
      psnr_sum += *p.psnr_db;
      ++finite;
    }
  }
  report.mean_mae_percent /= static_cast<double>(report.pairs.size());
  report.mean_ssim /= static_cast<double>(report.pairs.size());
  if (finite > 0) report.mean_psnr_db = psnr_sum / finite;
  return report;
}

std::string report_to_json(const MetricsReport& report) {
  using nlohmann::ordered_json;
  auto psnr_fields = [](ordered_json& j, const std::optional<double>& v) {
    j["psnr_db"] = v ? ordered_json(round6(*v)) : ordered_json(nullptr);
    j["psnr_infinite"] = !v.has_value();
  };
  ordered_json doc;
  doc["pairs"] = ordered_json::array();
  for (const auto& p : report.pairs) {
    ordered_json j;
    j["name"] = p.name;
    j["mae_percent"] = round6(p.mae_percent);
    j["ssim"] = round6(p.ssim);
    psnr_fields(j, p.psnr_db);
    doc["pairs"].push_back(j);
  }
  ordered_json agg;
  agg["count"] = report.pairs.size();
  agg["mae_percent"] = round6(report.mean_mae_percent);
  agg["ssim"] = round6(report.mean_ssim);
  psnr_fields(agg, report.mean_psnr_db);
  doc["aggregate"] = agg;
  doc["unmatched"] = {{"real", report.unmatched_real}, {"sim", report.unmatched_sim}};
  return doc.dump(2) + "\n";
}

}  // namespace curvetac
