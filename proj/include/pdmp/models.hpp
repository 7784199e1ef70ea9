#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmp/model.hpp"

namespace pdmp {

/// Bursting gene expression: Y = R+, one regime, S(t, y) = y e^{-kappa t},
/// w_theta(y) = y + theta with theta ~ Exp(mean burst_mean), and
/// lambda(y) = low + (high - low) y / (1 + y) (constant when low == high).
struct GeneParams {
  double kappa = 1.0;
  double burst_mean = 1.0;
  double lambda_low = 1.0;
  double lambda_high = 1.5;
};

std::shared_ptr<const ModelSpec> gene_expression_model(const GeneParams& params = {});

enum class TwoRegimeJump { finite_ifs, bursts };

/// Two regimes relaxing toward 0 and 1 at rate kappa.
///
/// finite_ifs: Y = [0, 1], maps {y/2, y/2 + 1/2} chosen with p_0(y) = 3/4 - y/2,
/// lambda(y) = 1 + y/2. bursts: Y = R+, Exp(burst_mean) additive bursts,
/// lambda(y) = 1 + 0.5 y / (1 + y). Switching in both cases:
/// pi_0. = (clamp(y, 0.1, 0.9), 1 - clamp(y, 0.1, 0.9)), pi_1. = (1/2, 1/2).
struct TwoRegimeParams {
  double kappa = 1.0;
  TwoRegimeJump jump = TwoRegimeJump::finite_ifs;
  double burst_mean = 1.0;
};

std::shared_ptr<const ModelSpec> two_regime_model(const TwoRegimeParams& params = {});

/// Negative control: S(t, y) = y e^{t}, lambda = 1. Violates alpha < lambda_lower.
std::shared_ptr<const ModelSpec> expanding_flow_model();
/// Negative control: gene model with lambda in [1, 2.5], so that the rate
/// condition fails (margin -0.5, drift factor a = 1.25).
std::shared_ptr<const ModelSpec> overdriven_gene_model();
/// Negative control: two-regime model with pi = identity (no switching).
std::shared_ptr<const ModelSpec> absorbing_switching_model();

/// Names accepted by model_from_json.
std::vector<std::string> model_names();

/// Builds a model from {"name": ..., "params": {...}}. Unknown names or
/// parameter keys raise ConfigError.
std::shared_ptr<const ModelSpec> model_from_json(const nlohmann::json& doc);

}  // namespace pdmp
