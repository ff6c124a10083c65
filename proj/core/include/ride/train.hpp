#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ride/grid.hpp"
#include "ride/model.hpp"

namespace ride {

/// Maximum-likelihood training with a growing patch curriculum: epoch e uses
/// patch size min(patch_start + e * patch_step, patch_end) and learning rate
/// learning_rate * lr_decay^e.
struct TrainConfig {
  int epochs = 8;
  int patch_start = 8;
  int patch_end = 22;
  int patch_step = 2;
  double learning_rate = 1e-4;
  double lr_decay = 0.5;
  int batch_size = 16;
  int patches_per_epoch = 1024;
  std::uint64_t seed = 0;

  int patch_size(int epoch) const;
  /// Throws std::invalid_argument for inconsistent settings.
  void validate() const;
};

struct EpochReport {
  int epoch = 0;
  int patch_size = 0;
  double learning_rate = 0.0;
  /// Mean per-pixel log-likelihood over the epoch's minibatches (pre-update).
  double avg_log_likelihood = 0.0;
};

struct TrainResult {
  RideModel model;
  std::vector<EpochReport> epochs;
};

using TrainProgress = std::function<void(const EpochReport&)>;

/// Adam ascent on the mean per-pixel log-likelihood. Throws NumericError with
/// the epoch/batch position if the loss or any parameter turns non-finite.
TrainResult train(RideModel model, std::span<const Grid2D> images, const TrainConfig& config,
                  const TrainProgress& progress = {});

/// Mean per-pixel log-likelihood over a set of images.
double average_log_likelihood(const RideModel& model, std::span<const Grid2D> images);

}  // namespace ride
