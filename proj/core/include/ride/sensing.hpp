#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "ride/grid.hpp"
#include "ride/mcgsm.hpp"
#include "ride/rng.hpp"

namespace ride {

enum class OperatorKind { dense, fwht };

std::string_view to_string(OperatorKind kind);

/// Linear measurement map Phi: R^n -> R^m. Images are flattened in raster
/// order. Dense operators hold the explicit matrix; Walsh-Hadamard operators
/// are matrix-free and keep only the selected row indices of the
/// 1/sqrt(n)-normalized, naturally ordered Hadamard matrix.
class MeasurementOperator {
 public:
  /// Wraps an explicit matrix. row_orthonormal() reports whether Phi Phiᵀ = I.
  static MeasurementOperator dense(RowMatrix matrix);
  /// Selected Hadamard rows; n must be a power of two, rows distinct and < n.
  static MeasurementOperator fwht_rows(int n, std::vector<std::uint32_t> rows, std::uint64_t seed = 0);

  OperatorKind kind() const { return kind_; }
  int n() const { return n_; }
  int m() const { return m_; }
  /// Seed the operator was generated from (0 for hand-built operators).
  std::uint64_t seed() const { return seed_; }
  /// True when the operator can be rebuilt from (kind, n, m, seed) alone.
  bool seeded() const { return seeded_; }
  bool row_orthonormal() const { return row_orthonormal_; }
  const RowMatrix& matrix() const { return matrix_; }
  const std::vector<std::uint32_t>& hadamard_rows() const { return rows_; }

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> adjoint(std::span<const double> y) const;

  /// Explicit m x n matrix, for either kind (tests and small problems).
  RowMatrix to_dense() const;

 private:
  friend MeasurementOperator make_gaussian_operator(int n, int m, std::uint64_t seed);
  friend MeasurementOperator make_fwht_operator(int n, int m, std::uint64_t seed);

  OperatorKind kind_ = OperatorKind::dense;
  int n_ = 0;
  int m_ = 0;
  std::uint64_t seed_ = 0;
  bool row_orthonormal_ = false;
  bool seeded_ = false;
  RowMatrix matrix_;
  std::vector<std::uint32_t> rows_;
};

/// i.i.d. N(0,1) entries with rows orthonormalized by classical Gram-Schmidt
/// with one re-orthogonalization pass. Requires 1 <= m <= n.
MeasurementOperator make_gaussian_operator(int n, int m, std::uint64_t seed);
/// m distinct Hadamard rows drawn uniformly without replacement (kept sorted).
MeasurementOperator make_fwht_operator(int n, int m, std::uint64_t seed);

/// In-place unnormalized Walsh-Hadamard transform (natural/Sylvester order).
void fwht_inplace(std::span<double> data);

struct Measurements {
  std::vector<double> values;
  double sigma = 0.0;
  int rows = 0;  // shape of the measured image
  int cols = 0;
};

/// y = Phi vec(x) + sigma * N(0, I).
Measurements measure(const MeasurementOperator& op, const Grid2D& image, double sigma, SeededRng& rng);

/// Euclidean projection onto {x : Phi x = y} for row-orthonormal Phi,
/// x - Phiᵀ(Phi x - y). Throws std::invalid_argument for other operators.
Grid2D project_affine(const MeasurementOperator& op, const Grid2D& x, const Measurements& y);

/// Operator descriptor: text header (kind, n, m, seed) followed by a binary
/// payload of little-endian uint32 Hadamard row indices (empty for Gaussian
/// operators, which are regenerated from the seed).
void save_operator(const MeasurementOperator& op, const std::filesystem::path& path);
MeasurementOperator load_operator(const std::filesystem::path& path);

/// Measurement file: text header (m, sigma, rows, cols) + little-endian fp64 payload.
void save_measurements(const Measurements& y, const std::filesystem::path& path);
Measurements load_measurements(const std::filesystem::path& path);

}  // namespace ride
