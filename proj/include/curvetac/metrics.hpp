#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "curvetac/image_io.hpp"

namespace curvetac {

/// Mean absolute difference over all samples, as a percentage of 255.
double mae_percent(const RgbImage& a, const RgbImage& b);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, L = 255, mean over window positions lying fully inside the
/// image, computed per channel and averaged over the three channels.
double ssim(const RgbImage& a, const RgbImage& b);

/// Peak signal-to-noise ratio in dB; nullopt for identical images.
std::optional<double> psnr(const RgbImage& a, const RgbImage& b);

struct PairMetrics {
  std::string name;
  double mae_percent = 0.0;
  double ssim = 0.0;
  std::optional<double> psnr_db;
};

struct MetricsReport {
  std::vector<PairMetrics> pairs;  // sorted by name
  std::vector<std::string> unmatched_real;
  std::vector<std::string> unmatched_sim;
  double mean_mae_percent = 0.0;
  double mean_ssim = 0.0;
  std::optional<double> mean_psnr_db;  // over pairs with finite PSNR
};

/// Pairs *.png files with equal names in both directories. Throws
/// ValidationError when no names match or a pair differs in size.
MetricsReport dataset_compare(const std::filesystem::path& real_dir, const std::filesystem::path& sim_dir,
                              int jobs = 1);

/// JSON document with numbers rounded to 6 significant digits. Infinite
/// PSNR is written as null with "psnr_infinite": true.
std::string report_to_json(const MetricsReport& report);

}  // namespace curvetac
