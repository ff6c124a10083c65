#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ride/grid.hpp"
#include "ride/rng.hpp"

namespace ride {

/// Observed/missing flags for inpainting; true marks an observed pixel.
class PixelMask {
 public:
  PixelMask() = default;
  PixelMask(int rows, int cols, bool observed = true)
      : rows_(rows), cols_(cols), flags_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), observed) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return flags_.size(); }

  bool observed(int r, int c) const { return flags_[static_cast<std::size_t>(r) * cols_ + c] != 0; }
  bool observed(std::size_t k) const { return flags_[k] != 0; }
  void set(int r, int c, bool observed) { flags_[static_cast<std::size_t>(r) * cols_ + c] = observed ? 1 : 0; }
  void set(std::size_t k, bool observed) { flags_[k] = observed ? 1 : 0; }

  std::size_t missing_count() const;
  bool matches(const Grid2D& g) const { return g.rows() == rows_ && g.cols() == cols_; }

  /// 1.0 for observed pixels, 0.0 for missing ones.
  Grid2D to_grid() const;
  /// Pixels >= 0.5 are observed.
  static PixelMask from_grid(const Grid2D& g);

  friend bool operator==(const PixelMask&, const PixelMask&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> flags_;
};

/// `count` uniformly random size x size crops (image chosen uniformly, then
/// offset). With `dequantize`, U(0, 1/255) noise is added to every pixel.
std::vector<Grid2D> extract_patches(std::span<const Grid2D> images, int size, int count, SeededRng& rng,
                                    bool dequantize = false);

/// Exactly round(missing_fraction * rows * cols) pixels marked missing,
/// chosen uniformly without replacement.
PixelMask random_mask(int rows, int cols, double missing_fraction, SeededRng& rng);

}  // namespace ride
