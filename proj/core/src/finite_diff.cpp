#include "ride/finite_diff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ride/errors.hpp"

namespace ride {
namespace {

double checked(double v, std::size_t k) {
  if (!std::isfinite(v)) {
    throw NumericError("finite_diff_grad: non-finite function value probing element " + std::to_string(k));
  }
  return v;
}

}  // namespace

Grid2D finite_diff_grad(const std::function<double(const Grid2D&)>& f, const Grid2D& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  Grid2D probe = x;
  Grid2D grad(x.rows(), x.cols());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + h;
    const double up = checked(f(probe), k);
    probe[k] = orig - h;
    const double down = checked(f(probe), k);
    probe[k] = orig;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + h;
    const double up = checked(f(probe), k);
    probe[k] = orig - h;
    const double down = checked(f(probe), k);
    probe[k] = orig;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace ride
