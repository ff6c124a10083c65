#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "ride/rng.hpp"

namespace ride {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixMap = Eigen::Map<RowMatrix>;
using ConstRowMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

/// Parameters of a mixture of conditional Gaussian scale mixtures.
///
/// For a feature vector h and pixel x:
///   gate    p(c,s|h)   ∝ exp(eta_cs - 0.5 exp(alpha_cs) hᵀK_c h),  K_c = B_cᵀB_c
///   expert  p(x|h,c,s) = N(x; a_cᵀh, exp(-alpha_cs))
///
/// All values live in one flat vector laid out as
///   [eta (C*S) | alpha (C*S) | B_0..B_{C-1} (R*D each, row-major) | a_0..a_{C-1} (D each)]
/// so optimizers and serializers can treat the parameter set as a single span.
/// The same type doubles as the container for parameter gradients.
class McgsmParams {
 public:
  McgsmParams() = default;
  /// rank <= 0 selects rank == features.
  McgsmParams(int components, int scales, int features, int rank = 0);

  /// Small random initialization: eta = 0, log-precisions spread across scales
  /// around `log_precision`, B_c and a_c Gaussian with standard deviations
  /// `factor_scale`/sqrt(D) and `predictor_scale`/sqrt(D).
  static McgsmParams random(int components, int scales, int features, int rank, SeededRng& rng,
                            double log_precision = 4.0, double factor_scale = 0.1,
                            double predictor_scale = 0.1);

  int components() const { return components_; }
  int scales() const { return scales_; }
  int features() const { return features_; }
  int rank() const { return rank_; }
  int mixture_size() const { return components_ * scales_; }

  double& eta(int c, int s) { return data_[static_cast<std::size_t>(c * scales_ + s)]; }
  double eta(int c, int s) const { return data_[static_cast<std::size_t>(c * scales_ + s)]; }
  double& alpha(int c, int s) { return data_[alpha_offset() + static_cast<std::size_t>(c * scales_ + s)]; }
  double alpha(int c, int s) const { return data_[alpha_offset() + static_cast<std::size_t>(c * scales_ + s)]; }

  /// B_c, R x D.
  RowMatrixMap quad_factor(int c) { return {data_.data() + factor_offset(c), rank_, features_}; }
  ConstRowMatrixMap quad_factor(int c) const { return {data_.data() + factor_offset(c), rank_, features_}; }
  /// All B_c stacked vertically, (C*R) x D.
  ConstRowMatrixMap stacked_factors() const {
    return {data_.data() + factor_offset(0), components_ * rank_, features_};
  }
  RowMatrixMap stacked_factors() { return {data_.data() + factor_offset(0), components_ * rank_, features_}; }

  VectorMap predictor(int c) { return {data_.data() + predictor_offset(c), features_}; }
  ConstVectorMap predictor(int c) const { return {data_.data() + predictor_offset(c), features_}; }
  /// All a_c as rows, C x D.
  ConstRowMatrixMap stacked_predictors() const { return {data_.data() + predictor_offset(0), components_, features_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  /// Same shape, all zeros.
  McgsmParams zeros_like() const { return McgsmParams(components_, scales_, features_, rank_); }
  bool same_shape(const McgsmParams& o) const {
    return components_ == o.components_ && scales_ == o.scales_ && features_ == o.features_ && rank_ == o.rank_;
  }
  bool all_finite() const;

  friend bool operator==(const McgsmParams&, const McgsmParams&) = default;

 private:
  std::size_t alpha_offset() const { return static_cast<std::size_t>(components_ * scales_); }
  std::size_t factor_offset(int c) const {
    return 2 * alpha_offset() + static_cast<std::size_t>(c) * static_cast<std::size_t>(rank_ * features_);
  }
  std::size_t predictor_offset(int c) const {
    return factor_offset(components_) + static_cast<std::size_t>(c) * static_cast<std::size_t>(features_);
  }

  int components_ = 0;
  int scales_ = 0;
  int features_ = 0;
  int rank_ = 0;
  std::vector<double> data_;
};

/// Evaluates the conditional density for one (h, x) pair and keeps every
/// intermediate needed for posteriors and gradients. Holds a reference to the
/// parameters; reuse one evaluator across pixels to avoid reallocations.
class McgsmEvaluator {
 public:
  explicit McgsmEvaluator(const McgsmParams& params);

  /// Gate only. Fills gate_log_probs(); returns nothing else meaningful.
  void evaluate_gate(std::span<const double> h);
  /// Gate, experts and posterior. Returns log p(x|h).
  double evaluate(std::span<const double> h, double x);

  std::span<const double> gate_log_probs() const { return log_gate_; }
  /// Posterior p(c,s|h,x), index c*S + s. Valid after evaluate().
  std::span<const double> posterior() const { return posterior_; }
  double log_density() const { return log_density_; }
  /// Shannon entropy of the posterior in nats.
  double entropy() const;

  /// d log p / dx.
  double grad_x() const;
  /// d log p / dh, written into out (length D).
  void grad_h(std::span<double> out) const;
  /// grads += scale * d log p / dtheta.
  void accumulate_param_grad(McgsmParams& grads, double scale = 1.0) const;

  /// Draws (c,s) from the gate then x from the expert. Requires evaluate_gate().
  double sample(SeededRng& rng) const;

 private:
  const McgsmParams& params_;
  int C_;
  int S_;
  Eigen::VectorXd precision_;   // exp(alpha_cs)
  Eigen::VectorXd h_;
  Eigen::VectorXd projected_;   // B_c h stacked, C*R
  Eigen::VectorXd quad_;        // hᵀK_c h, C
  Eigen::VectorXd mean_;        // a_cᵀh, C
  std::vector<double> log_gate_;
  std::vector<double> gate_;
  std::vector<double> joint_;
  std::vector<double> posterior_;
  double x_ = 0.0;
  double log_density_ = 0.0;
};

/// log p(c,s|h) for all (c,s), index c*S + s.
std::vector<double> gate_log_probs(const McgsmParams& params, std::span<const double> h);
/// log p(x|h).
double cond_log_density(const McgsmParams& params, std::span<const double> h, double x);
/// p(c,s|h,x). Throws NumericError if every mixture weight underflows.
std::vector<double> posterior(const McgsmParams& params, std::span<const double> h, double x);
double posterior_entropy(const McgsmParams& params, std::span<const double> h, double x);

struct McgsmGrads {
  double log_density = 0.0;
  double dx = 0.0;
  std::vector<double> dh;
  McgsmParams dparams;
};
McgsmGrads cond_grads(const McgsmParams& params, std::span<const double> h, double x);

double sample_pixel(const McgsmParams& params, std::span<const double> h, SeededRng& rng);

}  // namespace ride
