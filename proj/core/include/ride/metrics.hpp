#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "ride/grid.hpp"

namespace ride {

struct MetricConfig {
  int trim = 2;  // pixels dropped on every side
  double dynamic_range = 1.0;
  int window = 11;
  double window_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;

  void validate() const;
};

/// 10 log10(L^2 / MSE) over the trimmed interior; +infinity for identical interiors.
double psnr(const Grid2D& a, const Grid2D& b, const MetricConfig& config = {});

/// Mean local SSIM (Gaussian window, valid positions only) over the trimmed interior.
double ssim(const Grid2D& a, const Grid2D& b, const MetricConfig& config = {});

struct MetricRow {
  std::string image_id;
  double measurement_rate = 1.0;
  std::string method;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// "inf" for infinite PSNR, otherwise fixed-precision decimal.
std::string format_psnr(double db);

/// Header: image_id,mr,method,psnr_db,ssim
std::string metrics_csv(const std::vector<MetricRow>& rows);
void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path);

}  // namespace ride
