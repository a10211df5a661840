#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cumdamage {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  std::size_t max_intervals = 20000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// Globally adaptive 15-point Gauss-Kronrod integration of f over [a, b].
/// Interior `breakpoints` seed the initial partition so kinks sit on interval
/// ends. Throws NumericalError when the tolerance is not met within
/// `max_intervals` subintervals.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {},
                           const std::vector<double>& breakpoints = {});

}  // namespace cumdamage
