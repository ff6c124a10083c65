#include "ride/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ride/adam.hpp"
#include "ride/errors.hpp"
#include "ride/patches.hpp"

namespace ride {

int TrainConfig::patch_size(int epoch) const { return std::min(patch_start + epoch * patch_step, patch_end); }

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (patch_start < 1 || patch_end < patch_start) {
    throw std::invalid_argument("TrainConfig: need 1 <= patch_start <= patch_end");
  }
  if (patch_step < 0) throw std::invalid_argument("TrainConfig: patch_step must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
  if (!(lr_decay > 0.0)) throw std::invalid_argument("TrainConfig: lr_decay must be positive");
  if (batch_size < 1 || patches_per_epoch < 1) {
    throw std::invalid_argument("TrainConfig: batch_size and patches_per_epoch must be >= 1");
  }
}

TrainResult train(RideModel model, std::span<const Grid2D> images, const TrainConfig& config,
                  const TrainProgress& progress) {
  config.validate();
  model.validate();
  TrainResult result;
  if (config.epochs == 0) {
    result.model = std::move(model);
    return result;
  }

  SeededRng rng(derive_seed(config.seed, "train/patches"));
  AdamState slstm_state;
  AdamState mcgsm_state;
  std::vector<double> slstm_grad(model.slstm.values().size());
  std::vector<double> mcgsm_grad(model.mcgsm.values().size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const int size = config.patch_size(epoch);
    const double lr = config.learning_rate * std::pow(config.lr_decay, epoch);
    slstm_state.learning_rate = lr;
    mcgsm_state.learning_rate = lr;

    const std::vector<Grid2D> patches =
        extract_patches(images, size, config.patches_per_epoch, rng, model.preprocessing.dequantize);

    double ll_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < patches.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(patches.size(), start + static_cast<std::size_t>(config.batch_size));
      std::fill(slstm_grad.begin(), slstm_grad.end(), 0.0);
      std::fill(mcgsm_grad.begin(), mcgsm_grad.end(), 0.0);
      double batch_ll = 0.0;
      double pixels = 0.0;
      try {
        for (std::size_t p = start; p < stop; ++p) {
          const Evaluation ev = evaluate(model, patches[p], {.param_grads = true});
          batch_ll += ev.log_likelihood;
          pixels += static_cast<double>(patches[p].size());
          const auto gs = ev.param_grads.slstm.values();
          const auto gm = ev.param_grads.mcgsm.values();
          for (std::size_t k = 0; k < gs.size(); ++k) slstm_grad[k] += gs[k];
          for (std::size_t k = 0; k < gm.size(); ++k) mcgsm_grad[k] += gm[k];
        }
        if (!std::isfinite(batch_ll)) throw NumericError("non-finite batch log-likelihood");
        // Descent on the negative mean per-pixel log-likelihood.
        const double scale = -1.0 / pixels;
        for (auto& g : slstm_grad) g *= scale;
        for (auto& g : mcgsm_grad) g *= scale;
        adam_step(model.slstm.values(), slstm_grad, slstm_state);
        adam_step(model.mcgsm.values(), mcgsm_grad, mcgsm_state);
        if (!model.slstm.all_finite() || !model.mcgsm.all_finite()) {
          throw NumericError("non-finite parameters after update");
        }
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch) + " batch " + std::to_string(batches) + ": " +
                           e.what());
      }
      ll_sum += batch_ll / pixels;
      ++batches;
    }

    EpochReport report{epoch, size, lr, ll_sum / static_cast<double>(batches)};
    result.epochs.push_back(report);
    if (progress) progress(report);
  }
  result.model = std::move(model);
  return result;
}

double average_log_likelihood(const RideModel& model, std::span<const Grid2D> images) {
  double total = 0.0;
  double pixels = 0.0;
  for (const auto& img : images) {
    total += log_likelihood(model, img).total;
    pixels += static_cast<double>(img.size());
  }
  if (pixels == 0.0) throw std::invalid_argument("average_log_likelihood: no pixels");
  return total / pixels;
}

}  // namespace ride
