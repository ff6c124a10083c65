#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ride::testing {

Grid2D gaussian_texture(int rows, int cols, std::uint64_t seed) {
  SeededRng rng(derive_seed(seed, "texture"));
  const int pad = 8;
  Grid2D noise(rows + 2 * pad, cols + 2 * pad);
  for (auto& v : noise.values()) v = rng.normal();

  const double theta = rng.uniform(0.0, std::numbers::pi);
  const double period = rng.uniform(4.0, 7.0);
  const double ct = std::cos(theta), st = std::sin(theta);
  std::vector<double> kernel((2 * pad + 1) * (2 * pad + 1));
  for (int u = -pad; u <= pad; ++u) {
    for (int v = -pad; v <= pad; ++v) {
      const double along = u * ct + v * st;
      const double across = -u * st + v * ct;
      const double envelope = std::exp(-(along * along) / (2 * 2.5 * 2.5) - (across * across) / (2 * 5.0 * 5.0));
      kernel[(u + pad) * (2 * pad + 1) + (v + pad)] =
          envelope * (0.3 + std::cos(2 * std::numbers::pi * along / period));
    }
  }

  Grid2D out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      double acc = 0.2 * noise(i + pad, j + pad);
      for (int u = -pad; u <= pad; ++u) {
        for (int v = -pad; v <= pad; ++v) {
          acc += kernel[(u + pad) * (2 * pad + 1) + (v + pad)] * noise(i + pad + u, j + pad + v);
        }
      }
      out(i, j) = acc;
    }
  }

  double mean = 0.0, sq = 0.0;
  for (double v : out.values()) mean += v;
  mean /= static_cast<double>(out.size());
  for (double v : out.values()) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / static_cast<double>(out.size()));
  for (auto& v : out.values()) {
    const double x = std::clamp(0.5 + 0.15 * (v - mean) / sd, 0.0, 1.0);
    v = std::round(x * 255.0) / 255.0;
  }
  return out;
}

std::vector<Grid2D> texture_corpus(int count, int size, std::uint64_t seed) {
  std::vector<Grid2D> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(gaussian_texture(size, size, derive_seed(seed, "corpus/" + std::to_string(k))));
  return out;
}

RideModel unit_gaussian_model(int hidden) {
  RideConfig cfg;
  cfg.hidden = hidden;
  cfg.components = 1;
  cfg.scales = 1;
  cfg.preprocessing.offset = 0.0;
  SeededRng rng(7);
  RideModel m = RideModel::create(cfg, rng);
  for (auto& v : m.mcgsm.values()) v = 0.0;
  return m;
}

RideModel random_model(int hidden, int components, int scales, std::uint64_t seed, double log_precision) {
  RideConfig cfg;
  cfg.hidden = hidden;
  cfg.components = components;
  cfg.scales = scales;
  cfg.log_precision = log_precision;
  cfg.preprocessing.offset = 0.0;
  SeededRng rng(seed);
  RideModel m = RideModel::create(cfg, rng);
  // Larger factors and predictors than the training init so every term of
  // the gradient carries weight.
  for (int c = 0; c < components; ++c) {
    m.mcgsm.quad_factor(c) *= 5.0;
    m.mcgsm.predictor(c) *= 5.0;
    for (int s = 0; s < scales; ++s) m.mcgsm.eta(c, s) = 0.5 * rng.normal();
  }
  return m;
}

Grid2D random_image(int rows, int cols, SeededRng& rng, double lo, double hi) {
  Grid2D g(rows, cols);
  for (auto& v : g.values()) v = rng.uniform(lo, hi);
  return g;
}

double rel_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

double max_rel_error(const Grid2D& a, const Grid2D& b, double floor) {
  require_same_shape(a, b, "max_rel_error");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, rel_error(a[k], b[k], floor));
  return worst;
}

double max_abs_diff(const Grid2D& a, const Grid2D& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

McgsmParams random_mcgsm_params(int C, int S, int D, SeededRng& rng, int R) {
  McgsmParams p(C, S, D, R);
  for (int c = 0; c < C; ++c) {
    for (int s = 0; s < S; ++s) {
      p.eta(c, s) = rng.normal();
      p.alpha(c, s) = 0.5 * rng.normal() + 0.3 * (s - (S - 1) / 2.0);
    }
    for (int r = 0; r < p.rank(); ++r) {
      for (int d = 0; d < D; ++d) p.quad_factor(c)(r, d) = 0.5 * rng.normal();
    }
    for (int d = 0; d < D; ++d) p.predictor(c)(d) = 0.5 * rng.normal();
  }
  return p;
}

std::vector<double> random_vector(int n, SeededRng& rng) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = rng.normal();
  return v;
}

McgsmBruteForce mcgsm_brute_force(const McgsmParams& p, const std::vector<double>& h, double x) {
  const int C = p.components(), S = p.scales(), D = p.features();
  McgsmBruteForce out;
  std::vector<double> unnorm;
  for (int c = 0; c < C; ++c) {
    const Eigen::MatrixXd B = p.quad_factor(c);
    const Eigen::MatrixXd K = B.transpose() * B;
    double quad = 0.0;
    for (int u = 0; u < D; ++u)
      for (int v = 0; v < D; ++v) quad += h[u] * K(u, v) * h[v];
    for (int s = 0; s < S; ++s) unnorm.push_back(std::exp(p.eta(c, s) - 0.5 * std::exp(p.alpha(c, s)) * quad));
  }
  const double z = std::accumulate(unnorm.begin(), unnorm.end(), 0.0);
  for (double u : unnorm) out.gate.push_back(u / z);
  for (int c = 0; c < C; ++c) {
    double mean = 0.0;
    for (int d = 0; d < D; ++d) mean += p.predictor(c)(d) * h[d];
    for (int s = 0; s < S; ++s) {
      const double var = std::exp(-p.alpha(c, s));
      const double pdf = std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2 * std::numbers::pi * var);
      out.joint.push_back(out.gate[c * S + s] * pdf);
    }
  }
  out.density = std::accumulate(out.joint.begin(), out.joint.end(), 0.0);
  for (double j : out.joint) out.posterior.push_back(j / out.density);
  for (double q : out.posterior) {
    if (q > 0) out.entropy -= q * std::log(q);
  }
  return out;
}

}  // namespace ride::testing
