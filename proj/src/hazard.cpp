#include "pdmp/hazard.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pdmp/error.hpp"

namespace pdmp {

Intensity::Intensity(double lower, double upper) : lower_(lower), upper_(upper) {
  if (!(lower > 0.0) || !(upper >= lower) || !std::isfinite(upper)) {
    throw std::invalid_argument(
        "Intensity: bounds must satisfy 0 < lower <= upper < inf");
  }
}

ConstantIntensity::ConstantIntensity(double rate) : Intensity(rate, rate) {}

std::string ConstantIntensity::describe() const {
  std::ostringstream s;
  s << "constant(" << lower() << ")";
  return s.str();
}

SaturatingIntensity::SaturatingIntensity(double low, double high)
    : Intensity(low, high) {}

std::string SaturatingIntensity::describe() const {
  std::ostringstream s;
  s << "saturating(low=" << lower() << ", high=" << upper() << ")";
  return s.str();
}

AffineIntensity::AffineIntensity(double base, double slope, double lo, double hi)
    : Intensity(base + slope * lo, base + slope * hi),
      base_(base),
      slope_(slope),
      lo_(lo),
      hi_(hi) {
  if (!(slope >= 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("AffineIntensity: need slope >= 0 and hi >= lo");
  }
}

std::string AffineIntensity::describe() const {
  std::ostringstream s;
  s << "affine(base=" << base_ << ", slope=" << slope_ << ", on [" << lo_ << ", "
    << hi_ << "])";
  return s.str();
}

FunctionIntensity::FunctionIntensity(std::function<double(double)> rule,
                                     double lower, double upper,
                                     std::optional<double> lipschitz,
                                     std::string name)
    : Intensity(lower, upper),
      rule_(std::move(rule)),
      lipschitz_(lipschitz),
      name_(std::move(name)) {
  if (!rule_) throw std::invalid_argument("FunctionIntensity: empty rule");
}

CumulativeHazard::CumulativeHazard(std::shared_ptr<const Semiflow> flow,
                                   std::shared_ptr<const Intensity> intensity,
                                   std::optional<HazardAntiderivative> closed_form,
                                   QuadratureOptions quadrature)
    : flow_(std::move(flow)),
      intensity_(std::move(intensity)),
      closed_form_(std::move(closed_form)),
      quadrature_(quadrature) {
  if (!flow_ || !intensity_) {
    throw std::invalid_argument("CumulativeHazard: flow and intensity required");
  }
}

double CumulativeHazard::by_quadrature(const StatePoint& x, double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("cumulative hazard: t must be >= 0");
  if (t == 0.0) return 0.0;
  const Semiflow& flow = *flow_;
  const Intensity& lambda = *intensity_;
  return adaptive_simpson(
      [&](double h) { return lambda(flow(x.regime, h, x.y)); }, 0.0, t,
      quadrature_);
}

double CumulativeHazard::evaluate(const StatePoint& x, double t) const {
  if (t == 0.0) return 0.0;
  if (intensity_->is_constant()) return intensity_->lower() * t;
  if (closed_form_) return (*closed_form_)(x, t);
  return by_quadrature(x, t);
}

double CumulativeHazard::operator()(const StatePoint& x, double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("cumulative hazard: t must be >= 0");
  return evaluate(x, t);
}

double CumulativeHazard::survival(const StatePoint& x, double t) const {
  return std::exp(-(*this)(x, t));
}

double CumulativeHazard::sample_inversion(const StatePoint& x, double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("sample_inversion: u must lie in (0, 1)");
  }
  const double target = -std::log1p(-u);
  const double lower = intensity_->lower();
  const double upper = intensity_->upper();
  if (intensity_->is_constant() || lower == upper) return target / lower;

  double lo = target / upper;
  double hi = target / lower;
  const double slack = 1e-9 * std::max(1.0, target);
  const double f_lo = evaluate(x, lo) - target;
  const double f_hi = evaluate(x, hi) - target;
  if (f_lo > slack || f_hi < -slack) {
    std::ostringstream msg;
    msg << "sample_inversion: bracket [" << lo << ", " << hi
        << "] does not enclose the root (Lambda - target = " << f_lo << ", "
        << f_hi << "); intensity bounds are inconsistent";
    throw NumericalError(msg.str());
  }
  for (int it = 0; it < 200 && hi - lo > kRootTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (evaluate(x, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo > kRootTolerance) {
    std::ostringstream msg;
    msg << "sample_inversion: bisection stalled with bracket [" << lo << ", "
        << hi << "]";
    throw NumericalError(msg.str());
  }
  return 0.5 * (lo + hi);
}

double CumulativeHazard::sample_thinning(const StatePoint& x, Rng& rng) const {
  const double upper = intensity_->upper();
  const Semiflow& flow = *flow_;
  const Intensity& lambda = *intensity_;
  double t = 0.0;
  for (std::size_t k = 0; k < kThinningCap; ++k) {
    t += exponential(rng, upper);
    const double rate = lambda(flow(x.regime, t, x.y));
    if (rate > upper * (1.0 + 1e-12)) {
      throw NumericalError("sample_thinning: intensity exceeds its declared upper bound");
    }
    if (uniform_open(rng) * upper <= rate) return t;
  }
  throw NumericalError(
      "sample_thinning: proposal cap reached; intensity bounds are misconfigured");
}

HazardAntiderivative saturating_affine_hazard(const SaturatingIntensity& lambda,
                                              const AffineExpFlow& flow) {
  const double kappa = flow.kappa();
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("saturating_affine_hazard: kappa must be > 0");
  }
  std::vector<double> attractors(flow.regimes());
  for (std::size_t i = 0; i < attractors.size(); ++i) {
    attractors[i] = flow.attractor(i);
    if (attractors[i] < 0.0) {
      throw std::invalid_argument("saturating_affine_hazard: attractors must be >= 0");
    }
  }
  const double low = lambda.lower();
  const double high = lambda.upper();
  return [=](const StatePoint& x, double t) {
    if (x.y < 0.0) {
      throw std::invalid_argument("saturating_affine_hazard: y must be >= 0");
    }
    const double c = attractors[x.regime];
    const double a = 1.0 + c;
    const double ratio = (a + (x.y - c) * std::exp(-kappa * t)) / (1.0 + x.y);
    return high * t - (high - low) / (kappa * a) * (kappa * t + std::log(ratio));
  };
}

HazardAntiderivative affine_affine_hazard(const AffineIntensity& lambda,
                                          const AffineExpFlow& flow) {
  const double kappa = flow.kappa();
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("affine_affine_hazard: kappa must be > 0");
  }
  std::vector<double> attractors(flow.regimes());
  for (std::size_t i = 0; i < attractors.size(); ++i) {
    attractors[i] = flow.attractor(i);
    if (attractors[i] < lambda.lo() || attractors[i] > lambda.hi()) {
      throw std::invalid_argument(
          "affine_affine_hazard: attractors must lie in the intensity window");
    }
  }
  const double base = lambda.base();
  const double slope = lambda.slope();
  const double lo = lambda.lo();
  const double hi = lambda.hi();
  return [=](const StatePoint& x, double t) {
    if (x.y < lo - 1e-12 || x.y > hi + 1e-12) {
      throw std::invalid_argument(
          "affine_affine_hazard: y must lie in the intensity window");
    }
    const double c = attractors[x.regime];
    return (base + slope * c) * t - slope * (x.y - c) * std::expm1(-kappa * t) / kappa;
  };
}

}  // namespace pdmp
