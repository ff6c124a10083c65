#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ride {

/// Moment buffers for Adam. Empty buffers mean a fresh state; they are sized
/// on the first step.
struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;
};

/// One bias-corrected Adam descent step, params -= lr * m_hat / (sqrt(v_hat) + eps).
/// Throws std::invalid_argument on shape mismatch and NumericError on a
/// non-finite gradient (parameters are left untouched in both cases).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace ride
