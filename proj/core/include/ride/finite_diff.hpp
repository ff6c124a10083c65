#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ride/grid.hpp"

namespace ride {

inline constexpr double kDefaultFiniteDiffStep = 1e-5;

/// Central-difference gradient (f(x + h e_k) - f(x - h e_k)) / 2h of a scalar
/// function of a grid. Used as the independent oracle for every analytic
/// gradient in the project. Throws NumericError if f is not finite at a probe.
Grid2D finite_diff_grad(const std::function<double(const Grid2D&)>& f, const Grid2D& x,
                        double h = kDefaultFiniteDiffStep);

/// Same oracle over a flat parameter vector.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double h = kDefaultFiniteDiffStep);

}  // namespace ride
