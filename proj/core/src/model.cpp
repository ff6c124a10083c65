#include "ride/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ride/errors.hpp"

namespace ride {

RideModel RideModel::create(const RideConfig& config, SeededRng& rng) {
  config.window.validate();
  RideModel m;
  m.window = config.window;
  m.preprocessing = config.preprocessing;
  m.slstm = SlstmParams::random(config.hidden, config.window.size(), rng, config.forget_bias);
  m.mcgsm = McgsmParams::random(config.components, config.scales, config.hidden, config.rank, rng,
                                config.log_precision);
  return m;
}

void RideModel::validate() const {
  window.validate();
  if (slstm.inputs() != window.size()) {
    throw std::invalid_argument("RideModel: slstm input dim " + std::to_string(slstm.inputs()) +
                                " != window size " + std::to_string(window.size()));
  }
  if (mcgsm.features() != slstm.hidden()) {
    throw std::invalid_argument("RideModel: mcgsm feature dim " + std::to_string(mcgsm.features()) +
                                " != slstm hidden dim " + std::to_string(slstm.hidden()));
  }
  if (!slstm.all_finite() || !mcgsm.all_finite()) throw NumericError("RideModel: non-finite parameters");
}

Evaluation evaluate(const RideModel& model, const Grid2D& image, const EvalOptions& options) {
  if (image.empty()) throw std::invalid_argument("evaluate: empty image");
  const double offset = model.preprocessing.offset;
  Grid2D centered = image;
  for (auto& v : centered.values()) v -= offset;

  const HiddenGrid cache = slstm_forward(model.slstm, centered, model.window);
  McgsmEvaluator ev(model.mcgsm);

  const bool backward = options.input_grad || options.param_grads;
  const int H = model.slstm.hidden();
  Evaluation out;
  std::vector<double> upstream;
  Grid2D direct;
  if (backward) {
    upstream.assign(cache.h.size(), 0.0);
    direct = Grid2D(image.rows(), image.cols());
  }
  if (options.entropy) out.entropy = Grid2D(image.rows(), image.cols());
  if (options.param_grads) out.param_grads.mcgsm = model.mcgsm.zeros_like();

  double total = 0.0;
  for (int i = 0; i < image.rows(); ++i) {
    for (int j = 0; j < image.cols(); ++j) {
      total += ev.evaluate(cache.hidden_at(i, j), centered(i, j));
      if (options.entropy) out.entropy(i, j) = ev.entropy();
      if (backward) {
        direct(i, j) = ev.grad_x();
        ev.grad_h(std::span<double>(upstream.data() + cache.offset(i, j), static_cast<std::size_t>(H)));
      }
      if (options.param_grads) ev.accumulate_param_grad(out.param_grads.mcgsm);
    }
  }
  if (!std::isfinite(total)) throw NumericError("evaluate: non-finite log-likelihood");
  out.log_likelihood = total;

  if (backward) {
    SlstmGrads sg = slstm_backward(model.slstm, cache, upstream, options.param_grads);
    if (options.input_grad) {
      out.input_grad = std::move(sg.dimage);
      for (std::size_t k = 0; k < direct.size(); ++k) out.input_grad[k] += direct[k];
    }
    if (options.param_grads) out.param_grads.slstm = std::move(sg.dparams);
  }
  return out;
}

LogLikelihood log_likelihood(const RideModel& model, const Grid2D& image) {
  const double total = evaluate(model, image, {}).log_likelihood;
  return {total, total / static_cast<double>(image.size())};
}

Grid2D grad_log_likelihood_input(const RideModel& model, const Grid2D& image) {
  return evaluate(model, image, {.input_grad = true}).input_grad;
}

Grid2D flip(const Grid2D& grid, Flip direction) {
  if (direction == Flip::none) return grid;
  const bool flip_cols = direction == Flip::horizontal || direction == Flip::both;
  const bool flip_rows = direction == Flip::vertical || direction == Flip::both;
  Grid2D out(grid.rows(), grid.cols());
  for (int i = 0; i < grid.rows(); ++i) {
    const int si = flip_rows ? grid.rows() - 1 - i : i;
    for (int j = 0; j < grid.cols(); ++j) {
      const int sj = flip_cols ? grid.cols() - 1 - j : j;
      out(i, j) = grid(si, sj);
    }
  }
  return out;
}

Grid2D grad_log_likelihood_direction(const RideModel& model, const Grid2D& image, Flip direction) {
  return flip(grad_log_likelihood_input(model, flip(image, direction)), direction);
}

Grid2D grad_log_likelihood_4dir(const RideModel& model, const Grid2D& image) {
  Grid2D sum(image.rows(), image.cols());
  for (Flip d : kAllFlips) {
    const Grid2D g = grad_log_likelihood_direction(model, image, d);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += g[k];
  }
  for (auto& v : sum.values()) v *= 0.25;
  return sum;
}

EntropyMap entropy_map(const RideModel& model, const Grid2D& image) {
  return evaluate(model, image, {.entropy = true}).entropy;
}

Grid2D sample(const RideModel& model, int rows, int cols, SeededRng& rng) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("sample: rows and cols must be >= 1");
  McgsmEvaluator ev(model.mcgsm);
  const HiddenGrid cache =
      slstm_forward(model.slstm, rows, cols, model.window, [&](int, int, std::span<const double> h) {
        ev.evaluate_gate(h);
        return ev.sample(rng);
      });
  Grid2D out = cache.image;
  for (auto& v : out.values()) v += model.preprocessing.offset;
  return out;
}

}  // namespace ride
