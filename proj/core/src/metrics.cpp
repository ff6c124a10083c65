#include "ride/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ride {
namespace {

struct Interior {
  int r0, c0, rows, cols;
};

Interior interior(const Grid2D& a, const Grid2D& b, const MetricConfig& config, const char* what) {
  config.validate();
  require_same_shape(a, b, what);
  const int rows = a.rows() - 2 * config.trim;
  const int cols = a.cols() - 2 * config.trim;
  if (rows < 1 || cols < 1) throw std::invalid_argument(std::string(what) + ": image too small for the boundary trim");
  return {config.trim, config.trim, rows, cols};
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size) * size);
  const double c = (size - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double d2 = (i - c) * (i - c) + (j - c) * (j - c);
      w[static_cast<std::size_t>(i) * size + j] = std::exp(-d2 / (2.0 * sigma * sigma));
      total += w[static_cast<std::size_t>(i) * size + j];
    }
  }
  for (auto& v : w) v /= total;
  return w;
}

}  // namespace

void MetricConfig::validate() const {
  if (trim < 0) throw std::invalid_argument("MetricConfig: trim must be >= 0");
  if (!(dynamic_range > 0.0)) throw std::invalid_argument("MetricConfig: dynamic range must be > 0");
  if (window < 1 || !(window_sigma > 0.0)) throw std::invalid_argument("MetricConfig: invalid SSIM window");
}

double psnr(const Grid2D& a, const Grid2D& b, const MetricConfig& config) {
  const Interior in = interior(a, b, config, "psnr");
  double sse = 0.0;
  for (int i = 0; i < in.rows; ++i) {
    for (int j = 0; j < in.cols; ++j) {
      const double d = a(in.r0 + i, in.c0 + j) - b(in.r0 + i, in.c0 + j);
      sse += d * d;
    }
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / (static_cast<double>(in.rows) * in.cols);
  return 10.0 * std::log10(config.dynamic_range * config.dynamic_range / mse);
}

double ssim(const Grid2D& a, const Grid2D& b, const MetricConfig& config) {
  const Interior in = interior(a, b, config, "ssim");
  const int w = config.window;
  if (in.rows < w || in.cols < w) {
    throw std::invalid_argument("ssim: trimmed image smaller than the " + std::to_string(w) + "x" + std::to_string(w) +
                                " window");
  }
  const std::vector<double> kernel = gaussian_window(w, config.window_sigma);
  const double c1 = std::pow(config.k1 * config.dynamic_range, 2);
  const double c2 = std::pow(config.k2 * config.dynamic_range, 2);

  double total = 0.0;
  const int out_rows = in.rows - w + 1;
  const int out_cols = in.cols - w + 1;
  for (int i = 0; i < out_rows; ++i) {
    for (int j = 0; j < out_cols; ++j) {
      double mu_a = 0, mu_b = 0, saa = 0, sbb = 0, sab = 0;
      for (int u = 0; u < w; ++u) {
        for (int v = 0; v < w; ++v) {
          const double k = kernel[static_cast<std::size_t>(u) * w + v];
          const double x = a(in.r0 + i + u, in.c0 + j + v);
          const double y = b(in.r0 + i + u, in.c0 + j + v);
          mu_a += k * x;
          mu_b += k * y;
          saa += k * x * x;
          sbb += k * y * y;
          sab += k * x * y;
        }
      }
      const double var_a = saa - mu_a * mu_a;
      const double var_b = sbb - mu_b * mu_b;
      const double cov = sab - mu_a * mu_b;
      total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
  }
  return total / (static_cast<double>(out_rows) * out_cols);
}

std::string format_psnr(double db) {
  if (std::isinf(db) && db > 0) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", db);
  return buf;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream os;
  os << "image_id,mr,method,psnr_db,ssim\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.image_id << ',';
    std::snprintf(buf, sizeof(buf), "%.4g", r.measurement_rate);
    os << buf << ',' << r.method << ',' << format_psnr(r.psnr_db) << ',';
    std::snprintf(buf, sizeof(buf), "%.6f", r.ssim);
    os << buf << '\n';
  }
  return os.str();
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << metrics_csv(rows);
}

}  // namespace ride
