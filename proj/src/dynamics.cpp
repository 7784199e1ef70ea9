#include "pdmp/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pdmp/state.hpp"

namespace pdmp {

AffineExpFlow::AffineExpFlow(double kappa, std::vector<double> attractors)
    : kappa_(kappa), attractors_(std::move(attractors)) {
  if (!std::isfinite(kappa_)) {
    throw std::invalid_argument("AffineExpFlow: kappa must be finite");
  }
  if (attractors_.empty()) {
    throw std::invalid_argument("AffineExpFlow: at least one regime required");
  }
  for (double c : attractors_) {
    if (!std::isfinite(c)) {
      throw std::invalid_argument("AffineExpFlow: attractors must be finite");
    }
  }
}

std::string AffineExpFlow::describe() const {
  std::ostringstream s;
  s << "affine-exp(kappa=" << kappa_ << ", attractors=[";
  for (std::size_t i = 0; i < attractors_.size(); ++i) {
    s << (i ? "," : "") << attractors_[i];
  }
  s << "])";
  return s.str();
}

FunctionFlow::FunctionFlow(std::size_t regimes, Rule rule, std::string name,
                           std::optional<ContractionConstants> envelope)
    : regimes_(regimes),
      rule_(std::move(rule)),
      name_(std::move(name)),
      envelope_(envelope) {
  if (regimes_ == 0) throw std::invalid_argument("FunctionFlow: zero regimes");
  if (!rule_) throw std::invalid_argument("FunctionFlow: empty rule");
}

double flow_evaluate(const Semiflow& flow, std::size_t i, double t, double y) {
  if (!(t >= 0.0)) throw std::invalid_argument("flow_evaluate: t must be >= 0");
  if (i >= flow.regimes()) {
    throw std::out_of_range("flow_evaluate: regime index out of range");
  }
  return flow(i, t, y);
}

SemigroupReport check_semigroup(const Semiflow& flow, std::size_t samples,
                                double tol, Rng& rng,
                                const SemigroupSampling& sampling) {
  if (!(tol > 0.0)) throw std::invalid_argument("check_semigroup: tol must be > 0");
  SemigroupReport report;
  report.samples = samples;
  report.tolerance = tol;
  const std::size_t regimes = flow.regimes();
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t i = static_cast<std::size_t>(rng() % regimes);
    const double y = sampling.y_lower +
                     (sampling.y_upper - sampling.y_lower) * uniform_open(rng);
    const double s = sampling.t_upper * uniform_open(rng);
    const double t = sampling.t_upper * uniform_open(rng);
    const double composed = flow(i, s, flow(i, t, y));
    const double direct = flow(i, s + t, y);
    const double violation = rho_y(composed, direct);
    if (!(violation <= report.max_violation)) {
      report.max_violation = violation;
      report.witness_regime = i;
      report.witness_s = s;
      report.witness_t = t;
      report.witness_y = y;
    }
    report.max_identity_violation =
        std::max(report.max_identity_violation, rho_y(flow(i, 0.0, y), y));
  }
  report.passed = report.max_violation <= tol &&
                  report.max_identity_violation == 0.0;
  return report;
}

}  // namespace pdmp
