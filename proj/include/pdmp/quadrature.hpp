#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pdmp {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 48;
};

/// Adaptive Simpson on [a, b]. Throws NumericalError when the recursion depth
/// is exhausted before the local error estimate meets the tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const QuadratureOptions& options = {});

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss–Laguerre rule for the weight e^{-x} on [0, inf).
QuadratureRule gauss_laguerre(std::size_t n);

/// Composite Simpson rule on [a, b] with `intervals` (rounded up to even)
/// sub-intervals.
QuadratureRule composite_simpson(double a, double b, std::size_t intervals);

}  // namespace pdmp
