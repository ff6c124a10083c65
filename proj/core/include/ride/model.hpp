#pragma once

#include <array>
#include <span>

#include "ride/grid.hpp"
#include "ride/mcgsm.hpp"
#include "ride/rng.hpp"
#include "ride/slstm.hpp"

namespace ride {

/// How raw intensities enter the model. Pixels are shifted by `offset` before
/// they reach the recurrence and the mixture (a volume-preserving change of
/// variables, so densities are unaffected). `dequantize` asks training to add
/// U(0, 1/255) noise to 8-bit data.
struct Preprocessing {
  double low = 0.0;
  double high = 1.0;
  double offset = 0.5;
  bool dequantize = true;

  friend bool operator==(const Preprocessing&, const Preprocessing&) = default;
};

struct RideConfig {
  int hidden = 64;
  int components = 12;
  int scales = 4;
  int rank = 0;  // 0: full rank (rank == hidden)
  CausalWindow window = CausalWindow::standard();
  double forget_bias = 1.0;
  double log_precision = 4.0;
  Preprocessing preprocessing;
};

/// Spatial LSTM feeding a mixture of conditional GSMs:
/// log p(x) = sum_ij log p(x_ij | h_ij).
struct RideModel {
  SlstmParams slstm;
  McgsmParams mcgsm;
  CausalWindow window = CausalWindow::standard();
  Preprocessing preprocessing;

  static RideModel create(const RideConfig& config, SeededRng& rng);

  /// Checks cross-module shape agreement and finiteness; throws on violation.
  void validate() const;
  std::size_t parameter_count() const { return slstm.values().size() + mcgsm.values().size(); }

  friend bool operator==(const RideModel&, const RideModel&) = default;
};

struct ModelGrads {
  SlstmParams slstm;
  McgsmParams mcgsm;
};

struct EvalOptions {
  bool input_grad = false;
  bool entropy = false;
  bool param_grads = false;
};

/// Everything one forward (and optional backward) pass can produce.
struct Evaluation {
  double log_likelihood = 0.0;
  Grid2D input_grad;  // d log p(x) / dx, when requested
  Grid2D entropy;     // posterior entropy per pixel (nats), when requested
  ModelGrads param_grads;
};

Evaluation evaluate(const RideModel& model, const Grid2D& image, const EvalOptions& options);

struct LogLikelihood {
  double total = 0.0;
  double per_pixel = 0.0;
};
LogLikelihood log_likelihood(const RideModel& model, const Grid2D& image);

/// Exact gradient of log p(x) with respect to every pixel, single raster direction.
Grid2D grad_log_likelihood_input(const RideModel& model, const Grid2D& image);

/// The four raster orientations. Each flip is its own inverse.
enum class Flip { none, horizontal, vertical, both };
inline constexpr std::array<Flip, 4> kAllFlips = {Flip::none, Flip::horizontal, Flip::vertical, Flip::both};

Grid2D flip(const Grid2D& grid, Flip direction);

/// unflip(grad(flip(image))) for one orientation.
Grid2D grad_log_likelihood_direction(const RideModel& model, const Grid2D& image, Flip direction);
/// Mean of the four per-orientation gradients.
Grid2D grad_log_likelihood_4dir(const RideModel& model, const Grid2D& image);

/// Posterior entropy H(i,j) of the mixture assignment given the observed pixel.
using EntropyMap = Grid2D;
EntropyMap entropy_map(const RideModel& model, const Grid2D& image);

/// Raster-order ancestral sample.
Grid2D sample(const RideModel& model, int rows, int cols, SeededRng& rng);

}  // namespace ride
