#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "pdmp/dynamics.hpp"
#include "pdmp/quadrature.hpp"
#include "pdmp/random.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

/// Jump intensity y -> lambda(y) with declared bounds
/// lower <= lambda(y) <= upper, lower > 0.
class Intensity {
 public:
  Intensity(double lower, double upper);
  virtual ~Intensity() = default;

  virtual double operator()(double y) const = 0;
  virtual std::optional<double> lipschitz() const { return std::nullopt; }
  virtual bool is_constant() const noexcept { return false; }
  virtual std::string describe() const = 0;

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

class ConstantIntensity final : public Intensity {
 public:
  explicit ConstantIntensity(double rate);
  double operator()(double) const override { return lower(); }
  std::optional<double> lipschitz() const override { return 0.0; }
  bool is_constant() const noexcept override { return true; }
  std::string describe() const override;
};

/// lambda(y) = low + (high - low) y / (1 + y) on y >= 0 (negative y clamp to
/// 0). Lipschitz with constant high - low.
class SaturatingIntensity final : public Intensity {
 public:
  SaturatingIntensity(double low, double high);
  double operator()(double y) const override {
    const double z = y > 0.0 ? y : 0.0;
    return lower() + (upper() - lower()) * z / (1.0 + z);
  }
  std::optional<double> lipschitz() const override { return upper() - lower(); }
  std::string describe() const override;
};

/// lambda(y) = base + slope * clamp(y, lo, hi), slope >= 0, bounded on [lo, hi].
class AffineIntensity final : public Intensity {
 public:
  AffineIntensity(double base, double slope, double lo, double hi);
  double operator()(double y) const override {
    const double z = y < lo_ ? lo_ : (y > hi_ ? hi_ : y);
    return base_ + slope_ * z;
  }
  std::optional<double> lipschitz() const override { return slope_; }
  std::string describe() const override;

  double base() const noexcept { return base_; }
  double slope() const noexcept { return slope_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double base_, slope_, lo_, hi_;
};

class FunctionIntensity final : public Intensity {
 public:
  FunctionIntensity(std::function<double(double)> rule, double lower,
                    double upper, std::optional<double> lipschitz = std::nullopt,
                    std::string name = "function");
  double operator()(double y) const override { return rule_(y); }
  std::optional<double> lipschitz() const override { return lipschitz_; }
  std::string describe() const override { return name_; }

 private:
  std::function<double(double)> rule_;
  std::optional<double> lipschitz_;
  std::string name_;
};

/// Closed-form (x, t) -> Lambda(x, t).
using HazardAntiderivative = std::function<double(const StatePoint&, double)>;

/// Lambda(y, i, t) = int_0^t lambda(S_i(h, y)) dh together with the
/// holding-time law P(dt > t) = exp(-Lambda).
class CumulativeHazard {
 public:
  CumulativeHazard(std::shared_ptr<const Semiflow> flow,
                   std::shared_ptr<const Intensity> intensity,
                   std::optional<HazardAntiderivative> closed_form = std::nullopt,
                   QuadratureOptions quadrature = {});

  /// Lambda(x, t), closed form when available. Rejects t < 0.
  double operator()(const StatePoint& x, double t) const;
  /// Lambda(x, t) by adaptive Simpson, regardless of any closed form.
  double by_quadrature(const StatePoint& x, double t) const;
  double survival(const StatePoint& x, double t) const;

  /// The unique t with Lambda(x, t) = -ln(1 - u), by bisection inside the
  /// bracket [-ln(1-u)/upper, -ln(1-u)/lower].
  double sample_inversion(const StatePoint& x, double u) const;
  /// First accepted point of a rate-upper Poisson clock thinned by
  /// lambda(S_i(t, y)) / upper.
  double sample_thinning(const StatePoint& x, Rng& rng) const;

  bool has_closed_form() const noexcept {
    return closed_form_.has_value() || intensity_->is_constant();
  }
  const Semiflow& flow() const noexcept { return *flow_; }
  const Intensity& intensity() const noexcept { return *intensity_; }

  static constexpr double kRootTolerance = 1e-12;
  static constexpr std::size_t kThinningCap = 1'000'000;

 private:
  double evaluate(const StatePoint& x, double t) const;

  std::shared_ptr<const Semiflow> flow_;
  std::shared_ptr<const Intensity> intensity_;
  std::optional<HazardAntiderivative> closed_form_;
  QuadratureOptions quadrature_;
};

/// Lambda for a saturating intensity along an affine-exponential flow with
/// kappa > 0 and non-negative attractors:
///   Lambda = high t - (high - low)/(kappa (1 + c)) *
///            (kappa t + ln((1 + c + (y - c) e^{-kappa t}) / (1 + y))).
HazardAntiderivative saturating_affine_hazard(const SaturatingIntensity& lambda,
                                              const AffineExpFlow& flow);

/// Lambda for an affine intensity along an affine-exponential flow that stays
/// inside [lo, hi]: (base + slope c) t + slope (y - c)(1 - e^{-kappa t}) / kappa.
HazardAntiderivative affine_affine_hazard(const AffineIntensity& lambda,
                                          const AffineExpFlow& flow);

}  // namespace pdmp
