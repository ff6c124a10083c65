#include "ride/recover.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ride {
namespace {

double l2_residual(const MeasurementOperator& op, const Grid2D& x, const Measurements& y) {
  const auto phi_x = op.apply(x.values());
  double acc = 0.0;
  for (std::size_t k = 0; k < phi_x.size(); ++k) {
    const double d = phi_x[k] - y.values[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

Grid2D initial_iterate(const RecoveryConfig& config, int rows, int cols) {
  if (config.initial) {
    if (config.initial->rows() != rows || config.initial->cols() != cols) {
      throw std::invalid_argument("recovery: initial image has the wrong shape");
    }
    return *config.initial;
  }
  SeededRng rng(derive_seed(config.seed, "recover/init"));
  Grid2D x(rows, cols);
  for (auto& v : x.values()) v = rng.uniform();
  return x;
}

void check_measurements(const MeasurementOperator& op, const Measurements& y) {
  if (static_cast<int>(y.values.size()) != op.m()) {
    throw std::invalid_argument("recovery: " + std::to_string(y.values.size()) + " measurements for an operator with m = " +
                                std::to_string(op.m()));
  }
  if (y.rows * y.cols != op.n()) {
    throw std::invalid_argument("recovery: measurement image shape does not match operator n");
  }
}

void check_finite(const Grid2D& x, int iteration, const RecoveryTrace& trace) {
  if (!x.all_finite()) {
    throw RecoveryError("recovery diverged (non-finite iterate) at iteration " + std::to_string(iteration), trace);
  }
}

}  // namespace

void RecoveryConfig::validate() const {
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) throw std::invalid_argument("RecoveryConfig: step size must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("RecoveryConfig: momentum must lie in [0, 1)");
  if (iterations < 0) throw std::invalid_argument("RecoveryConfig: iterations must be >= 0");
  if (!(entropy_threshold > 0.0)) throw std::invalid_argument("RecoveryConfig: entropy threshold must be > 0");
  if (!(lambda >= 0.0) || !(sigma >= 0.0)) throw std::invalid_argument("RecoveryConfig: lambda and sigma must be >= 0");
  if (!(clamp_low < clamp_high)) throw std::invalid_argument("RecoveryConfig: empty clamp range");
}

std::string RecoveryTrace::to_csv() const {
  std::ostringstream os;
  os << "iteration,log_prior,residual,masked_fraction\n";
  char buf[128];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.6f\n", e.iteration, e.log_prior, e.residual, e.masked_fraction);
    os << buf;
  }
  return os.str();
}

void RecoveryTrace::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_csv();
}

PriorGradient masked_prior_gradient(const RideModel& model, const Grid2D& image, double threshold,
                                    bool four_directions) {
  Evaluation identity = evaluate(model, image, {.input_grad = true, .entropy = true});
  PriorGradient out;
  out.log_prior = identity.log_likelihood;
  out.entropy = std::move(identity.entropy);
  out.grad = std::move(identity.input_grad);
  if (four_directions) {
    for (Flip d : {Flip::horizontal, Flip::vertical, Flip::both}) {
      const Grid2D g = grad_log_likelihood_direction(model, image, d);
      for (std::size_t k = 0; k < g.size(); ++k) out.grad[k] += g[k];
    }
    for (auto& v : out.grad.values()) v *= 0.25;
  }
  std::size_t masked = 0;
  for (std::size_t k = 0; k < out.grad.size(); ++k) {
    if (out.entropy[k] > threshold) {
      out.grad[k] = 0.0;
      ++masked;
    }
  }
  out.masked_fraction = static_cast<double>(masked) / static_cast<double>(out.grad.size());
  return out;
}

Grid2D masked_prior_grad(const RideModel& model, const Grid2D& image, double threshold) {
  return masked_prior_gradient(model, image, threshold, true).grad;
}

RecoveryResult inpaint(const RideModel& model, const Grid2D& observed, const PixelMask& mask,
                       const RecoveryConfig& config) {
  config.validate();
  if (!mask.matches(observed)) throw std::invalid_argument("inpaint: mask shape does not match image");

  RecoveryResult result;
  Grid2D x = observed;
  const Grid2D init = initial_iterate(config, observed.rows(), observed.cols());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!mask.observed(k)) x[k] = init[k];
  }
  if (mask.missing_count() == 0 || config.iterations == 0) {
    result.image = std::move(x);
    return result;
  }

  Grid2D velocity(x.rows(), x.cols());
  PriorGradient prior = masked_prior_gradient(model, x, config.entropy_threshold, config.four_directions);
  for (int it = 1; it <= config.iterations; ++it) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (mask.observed(k)) continue;
      velocity[k] = config.momentum * velocity[k] + config.step_size * prior.grad[k];
      x[k] = std::clamp(x[k] + velocity[k], config.clamp_low, config.clamp_high);
    }
    check_finite(x, it, result.trace);
    const double masked_fraction = prior.masked_fraction;
    if (it < config.iterations) {
      prior = masked_prior_gradient(model, x, config.entropy_threshold, config.four_directions);
    } else {
      prior.log_prior = log_likelihood(model, x).total;
    }
    result.trace.entries.push_back({it, prior.log_prior, 0.0, masked_fraction});
    if (config.observer) config.observer(it, x);
  }
  result.image = std::move(x);
  return result;
}

RecoveryResult cs_recover(const RideModel& model, const MeasurementOperator& op, const Measurements& y,
                          const RecoveryConfig& config) {
  config.validate();
  if (!op.row_orthonormal()) throw std::invalid_argument("cs_recover: operator rows are not orthonormal");
  check_measurements(op, y);

  RecoveryResult result;
  Grid2D x = initial_iterate(config, y.rows, y.cols);
  if (config.iterations == 0) {
    result.image = std::move(x);
    return result;
  }

  Grid2D velocity(x.rows(), x.cols());
  PriorGradient prior = masked_prior_gradient(model, x, config.entropy_threshold, config.four_directions);
  for (int it = 1; it <= config.iterations; ++it) {
    Grid2D stepped = x;
    for (std::size_t k = 0; k < x.size(); ++k) {
      velocity[k] = config.momentum * velocity[k] + config.step_size * prior.grad[k];
      stepped[k] += velocity[k];
    }
    x = project_affine(op, stepped, y);
    check_finite(x, it, result.trace);
    const double masked_fraction = prior.masked_fraction;
    if (it < config.iterations) {
      prior = masked_prior_gradient(model, x, config.entropy_threshold, config.four_directions);
    } else {
      prior.log_prior = log_likelihood(model, x).total;
    }
    result.trace.entries.push_back({it, prior.log_prior, l2_residual(op, x, y), masked_fraction});
    if (config.observer) config.observer(it, x);
  }
  result.image = std::move(x);
  return result;
}

RecoveryResult cs_recover_noisy(const RideModel& model, const MeasurementOperator& op, const Measurements& y,
                                const RecoveryConfig& config) {
  config.validate();
  check_measurements(op, y);

  RecoveryResult result;
  Grid2D x = initial_iterate(config, y.rows, y.cols);
  for (auto& v : x.values()) v = std::clamp(v, config.clamp_low, config.clamp_high);
  if (config.iterations == 0) {
    result.image = std::move(x);
    return result;
  }

  Grid2D velocity(x.rows(), x.cols());
  PriorGradient prior = masked_prior_gradient(model, x, config.entropy_threshold, config.four_directions);
  for (int it = 1; it <= config.iterations; ++it) {
    // d/dx [-lambda ||y - Phi x||^2] = 2 lambda Phiᵀ(y - Phi x)
    std::vector<double> misfit = op.apply(x.values());
    for (std::size_t k = 0; k < misfit.size(); ++k) misfit[k] = y.values[k] - misfit[k];
    const std::vector<double> data_grad = op.adjoint(misfit);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double g = prior.grad[k] + 2.0 * config.lambda * data_grad[k];
      velocity[k] = config.momentum * velocity[k] + config.step_size * g;
      x[k] = std::clamp(x[k] + velocity[k], config.clamp_low, config.clamp_high);
    }
    check_finite(x, it, result.trace);
    const double masked_fraction = prior.masked_fraction;
    if (it < config.iterations) {
      prior = masked_prior_gradient(model, x, config.entropy_threshold, config.four_directions);
    } else {
      prior.log_prior = log_likelihood(model, x).total;
    }
    result.trace.entries.push_back({it, prior.log_prior, l2_residual(op, x, y), masked_fraction});
    if (config.observer) config.observer(it, x);
  }
  result.image = std::move(x);
  return result;
}

}  // namespace ride
