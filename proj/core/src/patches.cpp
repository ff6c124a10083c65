#include "ride/patches.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ride {

std::size_t PixelMask::missing_count() const {
  std::size_t n = 0;
  for (auto f : flags_) n += f == 0 ? 1 : 0;
  return n;
}

Grid2D PixelMask::to_grid() const {
  Grid2D g(rows_, cols_);
  for (std::size_t k = 0; k < flags_.size(); ++k) g[k] = flags_[k] != 0 ? 1.0 : 0.0;
  return g;
}

PixelMask PixelMask::from_grid(const Grid2D& g) {
  PixelMask m(g.rows(), g.cols());
  for (std::size_t k = 0; k < g.size(); ++k) m.set(k, g[k] >= 0.5);
  return m;
}

std::vector<Grid2D> extract_patches(std::span<const Grid2D> images, int size, int count, SeededRng& rng,
                                    bool dequantize) {
  if (count < 0) throw std::invalid_argument("extract_patches: negative count");
  if (count == 0) return {};
  if (size < 1) throw std::invalid_argument("extract_patches: size must be >= 1");
  if (images.empty()) throw std::invalid_argument("extract_patches: no images");
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (images[k].rows() < size || images[k].cols() < size) {
      throw std::invalid_argument("extract_patches: image " + std::to_string(k) + " (" +
                                  std::to_string(images[k].rows()) + "x" + std::to_string(images[k].cols()) +
                                  ") is smaller than patch size " + std::to_string(size));
    }
  }

  std::vector<Grid2D> patches;
  patches.reserve(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    const Grid2D& img = images[static_cast<std::size_t>(rng.below(images.size()))];
    const int r0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.rows() - size + 1)));
    const int c0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.cols() - size + 1)));
    Grid2D p(size, size);
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) p(i, j) = img(r0 + i, c0 + j);
    }
    if (dequantize) {
      for (auto& v : p.values()) v += rng.uniform() / 255.0;
    }
    patches.push_back(std::move(p));
  }
  return patches;
}

PixelMask random_mask(int rows, int cols, double missing_fraction, SeededRng& rng) {
  if (!(missing_fraction >= 0.0 && missing_fraction <= 1.0)) {
    throw std::invalid_argument("random_mask: fraction must lie in [0, 1]");
  }
  PixelMask mask(rows, cols, true);
  const std::size_t n = mask.size();
  const auto missing = static_cast<std::size_t>(std::llround(missing_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `missing` slots are a uniform subset.
  for (std::size_t k = 0; k < missing; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(order[k], order[pick]);
    mask.set(order[k], false);
  }
  return mask;
}

}  // namespace ride
