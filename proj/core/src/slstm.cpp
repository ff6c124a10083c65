#include "ride/slstm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ride/errors.hpp"

namespace ride {
namespace {

using Eigen::ArrayXd;
using Eigen::VectorXd;

constexpr int block(SlstmGate g) { return static_cast<int>(g); }

// Fills z = [window pixels | h_left | h_top] for location (i, j).
void gather_inputs(const Grid2D& image, const CausalWindow& window, const std::vector<double>& h, int hidden,
                   int i, int j, VectorXd& z) {
  const int rows = image.rows();
  const int cols = image.cols();
  int k = 0;
  for (const auto& [di, dj] : window.offsets) {
    const int r = i + di;
    const int c = j + dj;
    z[k++] = (r >= 0 && r < rows && c >= 0 && c < cols) ? image(r, c) : 0.0;
  }
  const auto at = [&](int r, int c) {
    return h.data() + (static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)) *
                          static_cast<std::size_t>(hidden);
  };
  if (j > 0) {
    z.segment(k, hidden) = ConstVectorMap(at(i, j - 1), hidden);
  } else {
    z.segment(k, hidden).setZero();
  }
  k += hidden;
  if (i > 0) {
    z.segment(k, hidden) = ConstVectorMap(at(i - 1, j), hidden);
  } else {
    z.segment(k, hidden).setZero();
  }
}

ArrayXd sigmoid(const ArrayXd& a) { return 1.0 / (1.0 + (-a).exp()); }

}  // namespace

CausalWindow CausalWindow::standard() { return CausalWindow{{{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}}}; }

void CausalWindow::validate() const {
  if (offsets.empty()) throw std::invalid_argument("CausalWindow: empty window");
  for (const auto& [di, dj] : offsets) {
    if (!(di < 0 || (di == 0 && dj < 0))) {
      throw std::invalid_argument("CausalWindow: offset (" + std::to_string(di) + "," + std::to_string(dj) +
                                  ") is not strictly causal");
    }
  }
}

SlstmParams::SlstmParams(int hidden, int inputs) : hidden_(hidden), inputs_(inputs) {
  if (hidden < 1 || inputs < 1) throw std::invalid_argument("SlstmParams: hidden and inputs must be >= 1");
  data_.assign(bias_offset() + static_cast<std::size_t>(kSlstmGates * hidden), 0.0);
}

SlstmParams SlstmParams::random(int hidden, int inputs, SeededRng& rng, double forget_bias) {
  SlstmParams p(hidden, inputs);
  const double bound = 1.0 / std::sqrt(static_cast<double>(p.fan_in()));
  auto w = p.weights();
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(-bound, bound);
  auto b = p.bias();
  b.segment(block(SlstmGate::forget_left) * hidden, hidden).setConstant(forget_bias);
  b.segment(block(SlstmGate::forget_top) * hidden, hidden).setConstant(forget_bias);
  return p;
}

bool SlstmParams::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

HiddenGrid slstm_forward(const SlstmParams& params, const Grid2D& image, const CausalWindow& window) {
  return slstm_forward(params, image.rows(), image.cols(), window,
                       [&image](int i, int j, std::span<const double>) { return image(i, j); });
}

HiddenGrid slstm_forward(const SlstmParams& params, int rows, int cols, const CausalWindow& window,
                         const PixelSource& source) {
  window.validate();
  if (window.size() != params.inputs()) {
    throw std::invalid_argument("slstm_forward: window size " + std::to_string(window.size()) +
                                " != parameter input dim " + std::to_string(params.inputs()));
  }
  if (rows < 1 || cols < 1) throw std::invalid_argument("slstm_forward: empty image");

  const int H = params.hidden();
  const std::size_t pixels = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  HiddenGrid g;
  g.rows = rows;
  g.cols = cols;
  g.hidden = H;
  g.h.assign(pixels * static_cast<std::size_t>(H), 0.0);
  g.cell.assign(pixels * static_cast<std::size_t>(H), 0.0);
  g.gates.assign(pixels * static_cast<std::size_t>(kSlstmGates * H), 0.0);
  g.image = Grid2D(rows, cols);
  g.window = window;

  const auto W = params.weights();
  const auto b = params.bias();
  VectorXd z(params.fan_in());
  VectorXd a(kSlstmGates * H);

  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      gather_inputs(g.image, window, g.h, H, i, j, z);
      a.noalias() = W * z;
      a += b;

      const std::size_t off = g.offset(i, j);
      Eigen::Map<ArrayXd> gates(g.gates.data() + off * kSlstmGates, kSlstmGates * H);
      gates.head(4 * H) = sigmoid(a.head(4 * H).array());
      gates.segment(4 * H, H) = a.segment(4 * H, H).array().tanh();

      const auto ig = gates.segment(block(SlstmGate::input) * H, H);
      const auto og = gates.segment(block(SlstmGate::output) * H, H);
      const auto fl = gates.segment(block(SlstmGate::forget_left) * H, H);
      const auto ft = gates.segment(block(SlstmGate::forget_top) * H, H);
      const auto gc = gates.segment(block(SlstmGate::candidate) * H, H);

      Eigen::Map<ArrayXd> cell(g.cell.data() + off, H);
      Eigen::Map<ArrayXd> hid(g.h.data() + off, H);
      cell = ig * gc;
      if (j > 0) cell += fl * Eigen::Map<const ArrayXd>(g.cell.data() + g.offset(i, j - 1), H);
      if (i > 0) cell += ft * Eigen::Map<const ArrayXd>(g.cell.data() + g.offset(i - 1, j), H);
      hid = og * cell.tanh();

      if (!std::isfinite(cell.sum()) || !std::isfinite(hid.sum())) {
        throw NumericError("slstm_forward: non-finite state at (" + std::to_string(i) + "," + std::to_string(j) +
                           ")");
      }
      g.image(i, j) = source(i, j, std::span<const double>(g.h.data() + off, static_cast<std::size_t>(H)));
    }
  }
  return g;
}

SlstmGrads slstm_backward(const SlstmParams& params, const HiddenGrid& cache, std::span<const double> upstream,
                          bool want_param_grads) {
  const int H = params.hidden();
  if (cache.hidden != H || cache.window.size() != params.inputs()) {
    throw std::invalid_argument("slstm_backward: cache does not match parameters");
  }
  if (upstream.size() != cache.h.size()) {
    throw std::invalid_argument("slstm_backward: upstream length " + std::to_string(upstream.size()) +
                                " != " + std::to_string(cache.h.size()));
  }
  const int rows = cache.rows;
  const int cols = cache.cols;
  const int Din = params.inputs();

  SlstmGrads out;
  out.dimage = Grid2D(rows, cols);
  if (want_param_grads) out.dparams = params.zeros_like();

  std::vector<double> dh_acc(upstream.begin(), upstream.end());
  std::vector<double> dc_acc(cache.cell.size(), 0.0);

  const auto W = params.weights();
  VectorXd z(params.fan_in());
  VectorXd da(kSlstmGates * H);
  VectorXd dz(params.fan_in());
  ArrayXd zeros = ArrayXd::Zero(H);

  for (int i = rows - 1; i >= 0; --i) {
    for (int j = cols - 1; j >= 0; --j) {
      const std::size_t off = cache.offset(i, j);
      Eigen::Map<const ArrayXd> gates(cache.gates.data() + off * kSlstmGates, kSlstmGates * H);
      const auto ig = gates.segment(block(SlstmGate::input) * H, H);
      const auto og = gates.segment(block(SlstmGate::output) * H, H);
      const auto fl = gates.segment(block(SlstmGate::forget_left) * H, H);
      const auto ft = gates.segment(block(SlstmGate::forget_top) * H, H);
      const auto gc = gates.segment(block(SlstmGate::candidate) * H, H);

      Eigen::Map<const ArrayXd> cell(cache.cell.data() + off, H);
      Eigen::Map<const ArrayXd> cell_left(j > 0 ? cache.cell.data() + cache.offset(i, j - 1) : zeros.data(), H);
      Eigen::Map<const ArrayXd> cell_top(i > 0 ? cache.cell.data() + cache.offset(i - 1, j) : zeros.data(), H);

      Eigen::Map<const ArrayXd> dh(dh_acc.data() + off, H);
      Eigen::Map<ArrayXd> dc(dc_acc.data() + off, H);
      const ArrayXd tc = cell.tanh();
      dc += dh * og * (1.0 - tc.square());

      da.segment(block(SlstmGate::input) * H, H) = (dc * gc * ig * (1.0 - ig)).matrix();
      da.segment(block(SlstmGate::output) * H, H) = (dh * tc * og * (1.0 - og)).matrix();
      da.segment(block(SlstmGate::forget_left) * H, H) = (dc * cell_left * fl * (1.0 - fl)).matrix();
      da.segment(block(SlstmGate::forget_top) * H, H) = (dc * cell_top * ft * (1.0 - ft)).matrix();
      da.segment(block(SlstmGate::candidate) * H, H) = (dc * ig * (1.0 - gc.square())).matrix();

      dz.noalias() = W.transpose() * da;

      if (want_param_grads) {
        gather_inputs(cache.image, cache.window, cache.h, H, i, j, z);
        out.dparams.weights().noalias() += da * z.transpose();
        out.dparams.bias() += da;
      }

      int k = 0;
      for (const auto& [di, dj] : cache.window.offsets) {
        const int r = i + di;
        const int c = j + dj;
        if (r >= 0 && r < rows && c >= 0 && c < cols) out.dimage(r, c) += dz[k];
        ++k;
      }
      if (j > 0) {
        const std::size_t left = cache.offset(i, j - 1);
        VectorMap(dh_acc.data() + left, H) += dz.segment(Din, H);
        Eigen::Map<ArrayXd>(dc_acc.data() + left, H) += dc * fl;
      }
      if (i > 0) {
        const std::size_t top = cache.offset(i - 1, j);
        VectorMap(dh_acc.data() + top, H) += dz.segment(Din + H, H);
        Eigen::Map<ArrayXd>(dc_acc.data() + top, H) += dc * ft;
      }
    }
  }
  if (!out.dimage.all_finite()) throw NumericError("slstm_backward: non-finite input gradient");
  return out;
}

}  // namespace ride
