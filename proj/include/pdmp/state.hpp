#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdmp {

/// A point x = (y, i) of X = Y x I. The reference realization of Y is a
/// subset of the real line with the Euclidean metric.
struct StatePoint {
  double y = 0.0;
  std::size_t regime = 0;

  friend bool operator==(const StatePoint&, const StatePoint&) = default;
};

/// A state extended with the running jump clock (the last jump time).
struct ExtendedState {
  StatePoint x;
  double clock = 0.0;
};

/// Admissible values of the continuous coordinate.
struct Domain {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double y) const noexcept {
    return std::isfinite(y) && y >= lower && y <= upper;
  }
  bool bounded() const noexcept { return std::isfinite(upper); }
};

inline double rho_y(double a, double b) noexcept { return std::abs(a - b); }

/// Product metric on X: rho_Y(y1, y2) + gap * [i1 != i2].
class ProductMetric {
 public:
  explicit ProductMetric(double regime_gap = 1.0);

  double operator()(const StatePoint& a, const StatePoint& b) const noexcept {
    return rho_y(a.y, b.y) + (a.regime == b.regime ? 0.0 : gap_);
  }
  double regime_gap() const noexcept { return gap_; }

 private:
  double gap_;
};

/// V(x) = rho_Y(y, y*), independent of the regime.
class LyapunovV {
 public:
  explicit LyapunovV(double y_star = 0.0) : y_star_(y_star) {}

  double operator()(const StatePoint& x) const noexcept {
    return rho_y(x.y, y_star_);
  }
  double y_star() const noexcept { return y_star_; }

 private:
  double y_star_;
};

struct Atom {
  StatePoint x;
  double weight = 0.0;
};

/// Finite weighted sample set over X. Weights are kept unnormalized; the
/// total mass is cached with compensated summation.
class WeightedMeasure {
 public:
  WeightedMeasure() = default;
  explicit WeightedMeasure(std::vector<Atom> atoms);

  void add(const StatePoint& x, double weight);
  void append(const WeightedMeasure& other);
  void reserve(std::size_t n) { atoms_.reserve(n); }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  double total_mass() const noexcept { return sum_ + compensation_; }

  /// Mass carried by atoms in regime i.
  double regime_mass(std::size_t i) const;
  std::size_t max_regime() const;

 private:
  void accumulate(double w) noexcept;

  std::vector<Atom> atoms_;
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// <f, mu> = sum_k w_k f(x_k). Rejects non-finite values of f.
template <class F>
double integrate(const WeightedMeasure& mu, F&& f) {
  double sum = 0.0, comp = 0.0;
  for (const Atom& a : mu.atoms()) {
    const double v = f(a.x);
    if (!std::isfinite(v)) {
      throw std::domain_error("integrate: integrand is not finite on an atom");
    }
    const double term = a.weight * v;
    const double t = sum + term;
    comp += (std::abs(sum) >= std::abs(term)) ? (sum - t) + term
                                              : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

/// Same atoms, weights scaled to total mass one. Zero mass is an error.
WeightedMeasure normalize(const WeightedMeasure& mu);

/// Concatenation of the atom lists, in order.
WeightedMeasure merge(std::span<const WeightedMeasure> parts);

/// CSV with header "y,i,weight".
void write_measure_csv(std::ostream& out, const WeightedMeasure& mu);
WeightedMeasure read_measure_csv(std::istream& in);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace pdmp
