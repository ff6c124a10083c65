#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ride/grid.hpp"
#include "ride/mcgsm.hpp"
#include "ride/rng.hpp"

namespace ride {

/// Pixel offsets (drow, dcol) fed to the recurrence at every location. Every
/// offset must be strictly causal in raster order: drow < 0, or drow == 0 and
/// dcol < 0. Pixels outside the image read as zero.
struct CausalWindow {
  std::vector<std::pair<int, int>> offsets;

  /// {(-1,-1), (-1,0), (-1,+1), (0,-1)}
  static CausalWindow standard();

  int size() const { return static_cast<int>(offsets.size()); }
  /// Throws std::invalid_argument for an empty window or a non-causal offset.
  void validate() const;

  friend bool operator==(const CausalWindow&, const CausalWindow&) = default;
};

/// Gate block order inside the weight matrix and bias vector.
enum class SlstmGate : int { input = 0, output = 1, forget_left = 2, forget_top = 3, candidate = 4 };
inline constexpr int kSlstmGates = 5;

/// Spatial LSTM parameters. One (5H x (D_in + 2H)) weight matrix maps the
/// concatenation [window pixels | h_left | h_top] to the five gate
/// pre-activations; a 5H bias follows it in the same flat buffer.
class SlstmParams {
 public:
  SlstmParams() = default;
  SlstmParams(int hidden, int inputs);

  /// Weights uniform in +-1/sqrt(fan_in), biases zero except the two forget
  /// gates, which start at forget_bias.
  static SlstmParams random(int hidden, int inputs, SeededRng& rng, double forget_bias = 1.0);

  int hidden() const { return hidden_; }
  int inputs() const { return inputs_; }
  int fan_in() const { return inputs_ + 2 * hidden_; }

  RowMatrixMap weights() { return {data_.data(), kSlstmGates * hidden_, fan_in()}; }
  ConstRowMatrixMap weights() const { return {data_.data(), kSlstmGates * hidden_, fan_in()}; }
  VectorMap bias() { return {data_.data() + bias_offset(), kSlstmGates * hidden_}; }
  ConstVectorMap bias() const { return {data_.data() + bias_offset(), kSlstmGates * hidden_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  SlstmParams zeros_like() const { return SlstmParams(hidden_, inputs_); }
  bool same_shape(const SlstmParams& o) const { return hidden_ == o.hidden_ && inputs_ == o.inputs_; }
  bool all_finite() const;

  friend bool operator==(const SlstmParams&, const SlstmParams&) = default;

 private:
  std::size_t bias_offset() const {
    return static_cast<std::size_t>(kSlstmGates * hidden_) * static_cast<std::size_t>(fan_in());
  }

  int hidden_ = 0;
  int inputs_ = 0;
  std::vector<double> data_;
};

/// Hidden and cell states for every pixel plus the forward cache used by
/// backward(): gate activations and the (possibly generated) input image.
struct HiddenGrid {
  int rows = 0;
  int cols = 0;
  int hidden = 0;
  std::vector<double> h;       // rows*cols*hidden
  std::vector<double> cell;    // rows*cols*hidden
  std::vector<double> gates;   // rows*cols*5*hidden, post-nonlinearity
  Grid2D image;                // the pixels the recurrence read
  CausalWindow window;

  std::span<const double> hidden_at(int i, int j) const {
    return {h.data() + offset(i, j), static_cast<std::size_t>(hidden)};
  }
  std::size_t offset(int i, int j) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)) *
           static_cast<std::size_t>(hidden);
  }
};

/// Supplies the pixel value at (i, j) once h_ij is known. Used by ancestral
/// sampling, where pixel (i, j) is drawn from p(x_ij | h_ij) before the
/// recurrence moves on.
using PixelSource = std::function<double(int i, int j, std::span<const double> h)>;

/// Raster-order forward pass. Throws NumericError on a non-finite state.
HiddenGrid slstm_forward(const SlstmParams& params, const Grid2D& image, const CausalWindow& window);
HiddenGrid slstm_forward(const SlstmParams& params, int rows, int cols, const CausalWindow& window,
                         const PixelSource& source);

struct SlstmGrads {
  Grid2D dimage;
  SlstmParams dparams;  // empty when parameter gradients were not requested
};

/// Reverse-mode gradients through the recurrence given dL/dh for every pixel
/// (upstream laid out like HiddenGrid::h).
SlstmGrads slstm_backward(const SlstmParams& params, const HiddenGrid& cache, std::span<const double> upstream,
                          bool want_param_grads = true);

}  // namespace ride
