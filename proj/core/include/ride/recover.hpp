#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ride/errors.hpp"
#include "ride/grid.hpp"
#include "ride/model.hpp"
#include "ride/patches.hpp"
#include "ride/sensing.hpp"

namespace ride {

inline constexpr double kEntropyThresholdDisabled = std::numeric_limits<double>::infinity();

/// Called after every iteration with the 1-based iteration index and the iterate.
using IterationObserver = std::function<void(int iteration, const Grid2D& iterate)>;

struct RecoveryConfig {
  double step_size = 1e-4;
  double momentum = 0.9;
  int iterations = 300;
  /// Prior gradients are zeroed where the posterior entropy exceeds this (nats).
  double entropy_threshold = 3.5;
  /// Average the gradients of the four flipped raster orders.
  bool four_directions = true;
  /// Soft-constraint weight for noisy recovery.
  double lambda = 0.0;
  /// Noise level of the measurements (recorded; lambda is what the solver uses).
  double sigma = 0.0;
  /// Initial iterate; when unset, uniform(0,1) noise drawn from `seed`.
  std::optional<Grid2D> initial;
  std::uint64_t seed = 0;
  /// Box applied to iterates of inpainting and noisy recovery.
  double clamp_low = 0.0;
  double clamp_high = 1.0;
  IterationObserver observer;

  /// 300 iterations at measurement rates >= 0.25, 400 below.
  static int default_iterations(double measurement_rate) { return measurement_rate >= 0.25 ? 300 : 400; }
  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  double log_prior = 0.0;        // log p(x) of the iterate after the update
  double residual = 0.0;         // ||Phi x - y||_2 (0 for inpainting)
  double masked_fraction = 0.0;  // share of pixels whose prior gradient was zeroed
};

struct RecoveryTrace {
  std::vector<TraceEntry> entries;

  /// Columns: iteration,log_prior,residual,masked_fraction
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

struct RecoveryResult {
  Grid2D image;
  RecoveryTrace trace;
};

/// Divergence during recovery; carries the trace up to the failure.
class RecoveryError : public NumericError {
 public:
  RecoveryError(const std::string& what, RecoveryTrace trace) : NumericError(what), trace_(std::move(trace)) {}
  const RecoveryTrace& trace() const { return trace_; }

 private:
  RecoveryTrace trace_;
};

struct PriorGradient {
  Grid2D grad;
  Grid2D entropy;  // identity-orientation posterior entropy
  double log_prior = 0.0;
  double masked_fraction = 0.0;
};

/// Prior gradient (four-direction average, or identity orientation only) with
/// entries set to exactly 0 wherever the identity-orientation posterior
/// entropy exceeds `threshold`.
PriorGradient masked_prior_gradient(const RideModel& model, const Grid2D& image, double threshold,
                                    bool four_directions = true);
Grid2D masked_prior_grad(const RideModel& model, const Grid2D& image, double threshold);

/// Prior ascent on the missing pixels only; observed pixels never change.
RecoveryResult inpaint(const RideModel& model, const Grid2D& observed, const PixelMask& mask,
                       const RecoveryConfig& config);

/// Projected gradient ascent: heavy-ball step on the masked prior gradient,
/// then projection onto {x : Phi x = y}. Requires a row-orthonormal operator.
RecoveryResult cs_recover(const RideModel& model, const MeasurementOperator& op, const Measurements& y,
                          const RecoveryConfig& config);

/// Soft-constrained ascent on log p(x) - lambda ||y - Phi x||^2, clamped to the box.
RecoveryResult cs_recover_noisy(const RideModel& model, const MeasurementOperator& op, const Measurements& y,
                                const RecoveryConfig& config);

}  // namespace ride
