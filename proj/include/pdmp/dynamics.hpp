#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/random.hpp"

namespace pdmp {

/// Constants of the exponential envelope
/// rho(S_i(t,u), S_i(t,v)) <= L e^{alpha t} rho(u, v).
struct ContractionConstants {
  double L = 1.0;
  double alpha = 0.0;
};

/// Family of semiflows S_i : R+ x Y -> Y, one per regime, given in closed form.
class Semiflow {
 public:
  virtual ~Semiflow() = default;

  virtual std::size_t regimes() const noexcept = 0;
  /// S_i(t, y) without argument checks; callers guarantee t >= 0.
  virtual double operator()(std::size_t i, double t, double y) const = 0;
  /// Closed-form envelope constants when known.
  virtual std::optional<ContractionConstants> contraction() const {
    return std::nullopt;
  }
  virtual std::string describe() const = 0;
};

/// S_i(t, y) = c_i + (y - c_i) e^{-kappa t}.
///
/// kappa > 0 relaxes toward the attractor c_i, kappa = 0 freezes the state and
/// kappa < 0 expands away from c_i (used for negative controls). The envelope
/// is exact with L = 1 and alpha = -kappa.
class AffineExpFlow final : public Semiflow {
 public:
  AffineExpFlow(double kappa, std::vector<double> attractors);

  std::size_t regimes() const noexcept override { return attractors_.size(); }
  double operator()(std::size_t i, double t, double y) const override {
    if (t == 0.0) return y;
    const double c = attractors_[i];
    return c + (y - c) * std::exp(-kappa_ * t);
  }
  std::optional<ContractionConstants> contraction() const override {
    return ContractionConstants{1.0, -kappa_};
  }
  std::string describe() const override;

  double kappa() const noexcept { return kappa_; }
  double attractor(std::size_t i) const { return attractors_.at(i); }

 private:
  double kappa_;
  std::vector<double> attractors_;
};

/// Semiflow backed by an arbitrary callable. Useful for ad hoc flows and for
/// deliberately broken ones in negative controls.
class FunctionFlow final : public Semiflow {
 public:
  using Rule = std::function<double(std::size_t, double, double)>;

  FunctionFlow(std::size_t regimes, Rule rule, std::string name,
               std::optional<ContractionConstants> envelope = std::nullopt);

  std::size_t regimes() const noexcept override { return regimes_; }
  double operator()(std::size_t i, double t, double y) const override {
    return rule_(i, t, y);
  }
  std::optional<ContractionConstants> contraction() const override {
    return envelope_;
  }
  std::string describe() const override { return name_; }

 private:
  std::size_t regimes_;
  Rule rule_;
  std::string name_;
  std::optional<ContractionConstants> envelope_;
};

/// Validated S_i(t, y); rejects t < 0 and unknown regimes.
double flow_evaluate(const Semiflow& flow, std::size_t i, double t, double y);

struct SemigroupSampling {
  double y_lower = 0.0;
  double y_upper = 10.0;
  double t_upper = 2.5;  // s and t are drawn from [0, t_upper]
};

struct SemigroupReport {
  std::size_t samples = 0;
  double tolerance = 0.0;
  /// max |S_i(s, S_i(t, y)) - S_i(s + t, y)|
  double max_violation = 0.0;
  /// max |S_i(0, y) - y|
  double max_identity_violation = 0.0;
  bool passed = false;
  // Witness of the largest composition violation.
  std::size_t witness_regime = 0;
  double witness_s = 0.0, witness_t = 0.0, witness_y = 0.0;
};

/// Samples random (s, t, y, i) and measures the semigroup defect. Violations
/// are reported, never thrown.
SemigroupReport check_semigroup(const Semiflow& flow, std::size_t samples,
                                double tol, Rng& rng,
                                const SemigroupSampling& sampling = {});

}  // namespace pdmp
