#include "ride/mcgsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ride/errors.hpp"

namespace ride {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

// log(sum(exp(v))) with max subtraction.
double log_sum_exp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

void check_features(std::span<const double> h, int expected) {
  if (static_cast<int>(h.size()) != expected) {
    throw std::invalid_argument("mcgsm: feature length " + std::to_string(h.size()) + " != " +
                                std::to_string(expected));
  }
  for (double v : h) {
    if (!std::isfinite(v)) throw NumericError("mcgsm: non-finite feature value");
  }
}

}  // namespace

McgsmParams::McgsmParams(int components, int scales, int features, int rank)
    : components_(components), scales_(scales), features_(features), rank_(rank <= 0 ? features : rank) {
  if (components < 1 || scales < 1 || features < 1) {
    throw std::invalid_argument("McgsmParams: components, scales and features must be >= 1");
  }
  const std::size_t n = 2 * static_cast<std::size_t>(components * scales) +
                        static_cast<std::size_t>(components) * static_cast<std::size_t>(rank_ * features) +
                        static_cast<std::size_t>(components) * static_cast<std::size_t>(features);
  data_.assign(n, 0.0);
}

McgsmParams McgsmParams::random(int components, int scales, int features, int rank, SeededRng& rng,
                                double log_precision, double factor_scale, double predictor_scale) {
  McgsmParams p(components, scales, features, rank);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(features));
  for (int c = 0; c < components; ++c) {
    for (int s = 0; s < scales; ++s) {
      // Scales spread one nat of log-precision apart, centred on log_precision.
      const double offset = static_cast<double>(s) - 0.5 * static_cast<double>(scales - 1);
      p.alpha(c, s) = log_precision + offset + 0.1 * rng.normal();
    }
  }
  auto factors = p.stacked_factors();
  for (Eigen::Index k = 0; k < factors.size(); ++k) factors.data()[k] = factor_scale * inv_sqrt_d * rng.normal();
  for (int c = 0; c < components; ++c) {
    auto a = p.predictor(c);
    for (Eigen::Index k = 0; k < a.size(); ++k) a[k] = predictor_scale * inv_sqrt_d * rng.normal();
  }
  return p;
}

bool McgsmParams::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

McgsmEvaluator::McgsmEvaluator(const McgsmParams& params)
    : params_(params),
      C_(params.components()),
      S_(params.scales()),
      precision_(params.mixture_size()),
      h_(params.features()),
      projected_(params.components() * params.rank()),
      quad_(params.components()),
      mean_(params.components()),
      log_gate_(static_cast<std::size_t>(params.mixture_size())),
      gate_(static_cast<std::size_t>(params.mixture_size())),
      joint_(static_cast<std::size_t>(params.mixture_size())),
      posterior_(static_cast<std::size_t>(params.mixture_size())) {
  for (int c = 0; c < C_; ++c) {
    for (int s = 0; s < S_; ++s) precision_[c * S_ + s] = std::exp(params.alpha(c, s));
  }
}

void McgsmEvaluator::evaluate_gate(std::span<const double> h) {
  check_features(h, params_.features());
  h_ = ConstVectorMap(h.data(), static_cast<Eigen::Index>(h.size()));
  projected_.noalias() = params_.stacked_factors() * h_;
  const int R = params_.rank();
  for (int c = 0; c < C_; ++c) quad_[c] = projected_.segment(c * R, R).squaredNorm();
  mean_.noalias() = params_.stacked_predictors() * h_;

  for (int c = 0; c < C_; ++c) {
    for (int s = 0; s < S_; ++s) {
      const int k = c * S_ + s;
      log_gate_[static_cast<std::size_t>(k)] = params_.eta(c, s) - 0.5 * precision_[k] * quad_[c];
    }
  }
  const double norm = log_sum_exp(log_gate_);
  for (std::size_t k = 0; k < log_gate_.size(); ++k) {
    log_gate_[k] -= norm;
    gate_[k] = std::exp(log_gate_[k]);
  }
}

double McgsmEvaluator::evaluate(std::span<const double> h, double x) {
  if (!std::isfinite(x)) throw NumericError("mcgsm: non-finite pixel value");
  evaluate_gate(h);
  x_ = x;
  for (int c = 0; c < C_; ++c) {
    const double diff = x - mean_[c];
    for (int s = 0; s < S_; ++s) {
      const int k = c * S_ + s;
      const double log_expert =
          0.5 * params_.alpha(c, s) - kHalfLog2Pi - 0.5 * precision_[k] * diff * diff;
      joint_[static_cast<std::size_t>(k)] = log_gate_[static_cast<std::size_t>(k)] + log_expert;
    }
  }
  log_density_ = log_sum_exp(joint_);
  if (!std::isfinite(log_density_)) {
    throw NumericError("mcgsm: all mixture weights vanish (log density " + std::to_string(log_density_) + ")");
  }
  for (std::size_t k = 0; k < joint_.size(); ++k) posterior_[k] = std::exp(joint_[k] - log_density_);
  return log_density_;
}

double McgsmEvaluator::entropy() const {
  double h = 0.0;
  for (std::size_t k = 0; k < posterior_.size(); ++k) {
    if (posterior_[k] > 0.0) h -= posterior_[k] * (joint_[k] - log_density_);
  }
  return std::max(h, 0.0);
}

double McgsmEvaluator::grad_x() const {
  double g = 0.0;
  for (int c = 0; c < C_; ++c) {
    const double diff = x_ - mean_[c];
    for (int s = 0; s < S_; ++s) {
      const int k = c * S_ + s;
      g -= posterior_[static_cast<std::size_t>(k)] * precision_[k] * diff;
    }
  }
  return g;
}

void McgsmEvaluator::grad_h(std::span<double> out) const {
  const int R = params_.rank();
  VectorMap dh(out.data(), static_cast<Eigen::Index>(out.size()));
  dh.setZero();
  for (int c = 0; c < C_; ++c) {
    const double diff = x_ - mean_[c];
    double d_mean = 0.0;
    double d_quad = 0.0;
    for (int s = 0; s < S_; ++s) {
      const int k = c * S_ + s;
      const double r = posterior_[static_cast<std::size_t>(k)];
      d_mean += r * precision_[k] * diff;
      d_quad -= 0.5 * (r - gate_[static_cast<std::size_t>(k)]) * precision_[k];
    }
    dh.noalias() += d_mean * params_.predictor(c);
    // d(hᵀB_cᵀB_c h)/dh = 2 B_cᵀ (B_c h)
    dh.noalias() += (2.0 * d_quad) * (params_.quad_factor(c).transpose() * projected_.segment(c * R, R));
  }
}

void McgsmEvaluator::accumulate_param_grad(McgsmParams& grads, double scale) const {
  const int R = params_.rank();
  for (int c = 0; c < C_; ++c) {
    const double diff = x_ - mean_[c];
    double d_mean = 0.0;
    double d_quad = 0.0;
    for (int s = 0; s < S_; ++s) {
      const int k = c * S_ + s;
      const double r = posterior_[static_cast<std::size_t>(k)];
      const double pi = gate_[static_cast<std::size_t>(k)];
      const double prec = precision_[k];
      grads.eta(c, s) += scale * (r - pi);
      grads.alpha(c, s) += scale * ((r - pi) * (-0.5 * prec * quad_[c]) + r * (0.5 - 0.5 * prec * diff * diff));
      d_mean += r * prec * diff;
      d_quad -= 0.5 * (r - pi) * prec;
    }
    grads.predictor(c).noalias() += (scale * d_mean) * h_;
    grads.quad_factor(c).noalias() += (2.0 * scale * d_quad) * projected_.segment(c * R, R) * h_.transpose();
  }
}

double McgsmEvaluator::sample(SeededRng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  int chosen = static_cast<int>(gate_.size()) - 1;
  for (std::size_t k = 0; k < gate_.size(); ++k) {
    acc += gate_[k];
    if (u < acc) {
      chosen = static_cast<int>(k);
      break;
    }
  }
  const int c = chosen / S_;
  const double stddev = 1.0 / std::sqrt(precision_[chosen]);
  return mean_[c] + stddev * rng.normal();
}

std::vector<double> gate_log_probs(const McgsmParams& params, std::span<const double> h) {
  McgsmEvaluator ev(params);
  ev.evaluate_gate(h);
  auto lp = ev.gate_log_probs();
  return {lp.begin(), lp.end()};
}

double cond_log_density(const McgsmParams& params, std::span<const double> h, double x) {
  McgsmEvaluator ev(params);
  return ev.evaluate(h, x);
}

std::vector<double> posterior(const McgsmParams& params, std::span<const double> h, double x) {
  McgsmEvaluator ev(params);
  ev.evaluate(h, x);
  auto p = ev.posterior();
  return {p.begin(), p.end()};
}

double posterior_entropy(const McgsmParams& params, std::span<const double> h, double x) {
  McgsmEvaluator ev(params);
  ev.evaluate(h, x);
  return ev.entropy();
}

McgsmGrads cond_grads(const McgsmParams& params, std::span<const double> h, double x) {
  McgsmEvaluator ev(params);
  McgsmGrads out;
  out.log_density = ev.evaluate(h, x);
  out.dx = ev.grad_x();
  out.dh.assign(h.size(), 0.0);
  ev.grad_h(out.dh);
  out.dparams = params.zeros_like();
  ev.accumulate_param_grad(out.dparams);
  if (!std::isfinite(out.dx) || !out.dparams.all_finite()) throw NumericError("cond_grads: non-finite gradient");
  return out;
}

double sample_pixel(const McgsmParams& params, std::span<const double> h, SeededRng& rng) {
  McgsmEvaluator ev(params);
  ev.evaluate_gate(h);
  return ev.sample(rng);
}

}  // namespace ride
