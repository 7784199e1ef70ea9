#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmp/model.hpp"
#include "pdmp/random.hpp"

namespace pdmp {

struct ProbeSpec {
  std::size_t probes = 10000;
  std::uint64_t seed = 7;
  /// Flow checks sample t from [0, t_upper].
  double t_upper = 5.0;
};

struct FlowContractionEstimate {
  double L = 0.0;
  double alpha = 0.0;
  /// Largest ratio rho(S(t,u), S(t,v)) / (L e^{alpha t} rho(u, v)) under the
  /// declared (L, alpha); above one means the declaration is violated.
  double worst_declared_ratio = 0.0;
  double witness_u = 0.0, witness_v = 0.0, witness_t = 0.0;
  std::size_t witness_regime = 0;
};

/// Minimal exponential envelope fitted to sampled distance ratios. alpha is
/// the largest log-slope between time slices of the per-slice sup ratio, L
/// the sup of ratio * e^{-alpha t}.
FlowContractionEstimate estimate_flow_contraction(const ModelSpec& model,
                                                  const ProbeSpec& spec = {});

/// beta(y*) = max_i int_0^inf e^{-lower t} rho(S_i(t, y*), y*) dt. Throws
/// NumericalError when the integrand has not decayed at the horizon.
double compute_beta(const ModelSpec& model, double y_star);

/// gamma(y*) = sup over probe y of int rho(w_theta(y*), y*) p_theta(y) d theta,
/// by quadrature over Theta.
double compute_gamma(const ModelSpec& model, double y_star, std::size_t probes = 10000);

struct IfsConstants {
  double L_w = 0.0;
  double L_p = 0.0;
  double delta_p = 0.0;
};

/// Suprema/infimum over random pairs, all Theta integrals by quadrature.
/// The overlap set uses the declared L_w.
IfsConstants estimate_ifs_constants(const ModelSpec& model, const ProbeSpec& spec = {});

struct PiConstants {
  double L_pi = 0.0;
  double delta_pi = 0.0;
};

/// Random pairs plus full enumeration of a 101-point probe grid.
PiConstants estimate_pi_constants(const ModelSpec& model, const ProbeSpec& spec = {});

struct RegimeSplitReport {
  /// max of rho(S_i(t,y), S_j(t,y)) - phi(t) L(y) over samples
  double worst_excess = 0.0;
  double witness_t = 0.0, witness_y = 0.0;
  /// int_0^inf e^{-lower t} phi(t) dt
  double phi_integral = 0.0;
  bool passed = false;
};

RegimeSplitReport check_regime_split(const ModelSpec& model, const ProbeSpec& spec = {});

/// Largest finite-difference slope of lambda on the probe window.
double estimate_lambda_lipschitz(const ModelSpec& model, std::size_t probes = 10000);

struct DriftConstants {
  double a = 0.0;
  double b = 0.0;
  double a_tilde = 0.0;
  double b_tilde = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double margin = 0.0;  // lower - (L L_w upper + alpha)
};

/// a = upper L_w L / (lower - alpha), b = upper (L_w beta + gamma / lower).
/// Rejects lower <= alpha.
DriftConstants drift_constants(double lambda_lower, double lambda_upper, double L,
                               double alpha, double L_w, double beta, double gamma);
/// From the model's declared constants.
DriftConstants drift_constants(const ModelSpec& model);

struct DriftProbe {
  StatePoint x;
  double v = 0.0;
  double pv = 0.0;  // mean of V(step) over replicas
  double standard_error = 0.0;
  double bound = 0.0;  // a V(x) + b
  bool passed = false;
};

struct DriftReport {
  std::vector<DriftProbe> probes;
  bool passed = false;
};

/// Probe k uses make_stream(seed, k).
DriftReport verify_drift_empirically(const ModelSpec& model, const DriftConstants& c,
                                     const std::vector<StatePoint>& probes,
                                     std::size_t replicas, std::uint64_t seed,
                                     unsigned threads = 1);

/// {0, 1, 2, 4, 8} on unbounded Y, five evenly spaced points otherwise, each
/// paired with every regime.
std::vector<StatePoint> default_drift_probes(const ModelSpec& model);

enum class CheckStatus { pass, fail, skipped };
const char* to_string(CheckStatus s);

struct CheckResult {
  std::string id;
  std::string title;
  CheckStatus status = CheckStatus::skipped;
  std::string detail;
  nlohmann::json values;
};

struct AssumptionReport {
  std::string model;
  std::vector<CheckResult> checks;
  double rate_condition_margin = 0.0;
  nlohmann::json estimates;
  nlohmann::json declared;
  std::string designated_failure;

  std::vector<std::string> failed_ids() const;
  const CheckResult& check(const std::string& id) const;
  /// No failures for positive models; exactly the designated one otherwise.
  bool matches_designation() const;
};

struct DiagnosticsOptions {
  ProbeSpec probes;
  double tolerance = 0.05;
};

/// Runs the checks intensity_bounds, beta_finite, flow_envelope, regime_split,
/// switching, gamma_finite, ifs_contraction, rate_condition and lambda_lipschitz.
/// rate_condition is skipped when flow_envelope or ifs_contraction fails,
/// since its inputs are then not valid constants.
AssumptionReport run_assumption_suite(const ModelSpec& model,
                                      const DiagnosticsOptions& options = {});

nlohmann::json to_json(const AssumptionReport& report);
nlohmann::json to_json(const DriftConstants& c);
nlohmann::json to_json(const DriftReport& r);
/// Header "y,i,V,PV,se,bound,passed".
void write_drift_csv(std::ostream& out, const DriftReport& r);

}  // namespace pdmp
