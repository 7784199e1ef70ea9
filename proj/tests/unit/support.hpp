#pragma once

#include <cmath>
#include <vector>

#include "pdmp/random.hpp"

namespace pdmp::test {

// Hand-rolled generators for the property tests.
inline double uniform(Rng& rng, double a, double b) { return a + (b - a) * uniform_open(rng); }

inline std::vector<double> exp_samples(Rng& rng, std::size_t n, double rate) {
  std::vector<double> out(n);
  for (auto& v : out) v = exponential(rng, rate);
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double standard_error(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// KS critical value at the 1% level.
inline double ks_crit_1pct(double n) { return 1.628 / std::sqrt(n); }

}  // namespace pdmp::test
