#include "ride/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ride/errors.hpp"

namespace ride {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: params/grads length mismatch (" + std::to_string(params.size()) +
                                " vs " + std::to_string(grads.size()) + ")");
  }
  if (state.first_moment.empty() && state.second_moment.empty()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: state buffers do not match parameter length");
  }
  for (std::size_t k = 0; k < grads.size(); ++k) {
    if (!std::isfinite(grads[k])) {
      throw NumericError("adam_step: non-finite gradient at index " + std::to_string(k));
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    m = state.beta1 * m + (1.0 - state.beta1) * grads[k];
    v = state.beta2 * v + (1.0 - state.beta2) * grads[k] * grads[k];
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    params[k] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace ride
