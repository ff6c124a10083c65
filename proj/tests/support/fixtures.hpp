#pragma once

#include <cstdint>
#include <vector>

#include "ride/grid.hpp"
#include "ride/mcgsm.hpp"
#include "ride/model.hpp"
#include "ride/rng.hpp"

namespace ride::testing {

/// Stationary Gaussian random field: white noise smoothed by an oriented
/// anisotropic kernel plus a little isotropic detail, rescaled to mean 0.5 and
/// standard deviation 0.15, clamped to [0,1] and quantized to 8 bits. Each
/// seed gets its own orientation, so a corpus mixes several texture classes.
Grid2D gaussian_texture(int rows, int cols, std::uint64_t seed);
std::vector<Grid2D> texture_corpus(int count, int size, std::uint64_t seed);

/// Context-free model: C = S = 1, a = 0, alpha = 0, B = 0 and no intensity
/// offset, so log p(x) = sum_ij log N(x_ij; 0, 1).
RideModel unit_gaussian_model(int hidden = 3);

/// Small randomly initialized model with no intensity offset.
RideModel random_model(int hidden, int components, int scales, std::uint64_t seed, double log_precision = 1.0);

/// MCGSM with N(0,1)-ish gate weights, spread log-precisions and 0.5-scaled factors.
McgsmParams random_mcgsm_params(int C, int S, int D, SeededRng& rng, int R = 0);
std::vector<double> random_vector(int n, SeededRng& rng);

/// Term-by-term reference for one MCGSM conditional: explicit K_c = B_cᵀB_c,
/// plain exp and normalization, no log-sum-exp.
struct McgsmBruteForce {
  std::vector<double> gate;
  std::vector<double> joint;
  double density = 0.0;
  std::vector<double> posterior;
  double entropy = 0.0;
};
McgsmBruteForce mcgsm_brute_force(const McgsmParams& p, const std::vector<double>& h, double x);

Grid2D random_image(int rows, int cols, SeededRng& rng, double lo = 0.0, double hi = 1.0);

/// |a - b| / max(|a|, |b|, floor): relative error with an absolute floor for entries near zero.
double rel_error(double a, double b, double floor = 1e-6);
double max_rel_error(const Grid2D& a, const Grid2D& b, double floor = 1e-6);
double max_abs_diff(const Grid2D& a, const Grid2D& b);

}  // namespace ride::testing
