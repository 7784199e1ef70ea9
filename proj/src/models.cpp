#include "pdmp/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pdmp/error.hpp"

namespace pdmp {

namespace {

double clamp01(double y, double lo, double hi) { return std::clamp(y, lo, hi); }

std::shared_ptr<const Intensity> saturating_or_constant(double low, double high) {
  if (low == high) return std::make_shared<ConstantIntensity>(low);
  return std::make_shared<SaturatingIntensity>(low, high);
}

SwitchingMatrix clamp_switching(Domain domain) {
  using E = SwitchingMatrix::Entry;
  std::vector<std::vector<E>> rows{
      {[](double y) { return clamp01(y, 0.1, 0.9); },
       [](double y) { return 1.0 - clamp01(y, 0.1, 0.9); }},
      {[](double) { return 0.5; }, [](double) { return 0.5; }}};
  return SwitchingMatrix(std::move(rows), domain);
}

}  // namespace

std::shared_ptr<const ModelSpec> gene_expression_model(const GeneParams& p) {
  if (!(p.kappa > 0.0) || !(p.burst_mean > 0.0) || !(p.lambda_low > 0.0) ||
      !(p.lambda_high >= p.lambda_low) || !std::isfinite(p.lambda_high)) {
    throw ConfigError("gene_expression_model: need kappa, burst_mean, lambda_low > 0 "
                      "and lambda_high >= lambda_low");
  }
  auto flow = std::make_shared<AffineExpFlow>(p.kappa, std::vector<double>{0.0});
  auto intensity = saturating_or_constant(p.lambda_low, p.lambda_high);
  ModelParts parts;
  std::ostringstream name;
  name << "gene(kappa=" << p.kappa << ", b=" << p.burst_mean << ", lambda=["
       << p.lambda_low << ", " << p.lambda_high << "])";
  parts.name = name.str();
  parts.domain = Domain{0.0, std::numeric_limits<double>::infinity()};
  parts.flow = flow;
  parts.intensity = intensity;
  parts.jump = std::make_shared<AdditiveBurstKernel>(p.burst_mean);
  if (auto sat = std::dynamic_pointer_cast<const SaturatingIntensity>(intensity)) {
    parts.closed_form_hazard = saturating_affine_hazard(*sat, *flow);
  }
  DeclaredConstants& d = parts.declared;
  d.L = 1.0;
  d.alpha = -p.kappa;
  d.L_w = 1.0;
  d.L_p = 0.0;
  d.delta_p = 1.0;
  d.L_pi = 0.0;
  d.delta_pi = 1.0;
  d.L_lambda = p.lambda_high - p.lambda_low;
  d.y_star = 0.0;
  d.beta = 0.0;
  d.gamma = p.burst_mean;
  d.phi = [](double) { return 0.0; };
  d.ell = [](double) { return 0.0; };
  parts.probe_upper = 15.0 * p.burst_mean;
  return std::make_shared<const ModelSpec>(std::move(parts));
}

std::shared_ptr<const ModelSpec> two_regime_model(const TwoRegimeParams& p) {
  if (!(p.kappa > 0.0) || !(p.burst_mean > 0.0)) {
    throw ConfigError("two_regime_model: need kappa > 0 and burst_mean > 0");
  }
  auto flow = std::make_shared<AffineExpFlow>(p.kappa, std::vector<double>{0.0, 1.0});
  ModelParts parts;
  parts.flow = flow;
  DeclaredConstants& d = parts.declared;
  d.L = 1.0;
  d.alpha = -p.kappa;
  d.L_pi = 2.0;
  // Same-row pairs u <= 0.1, v >= 0.9 give min(0.1, 0.9) + min(0.9, 0.1).
  d.delta_pi = 0.2;
  d.y_star = 0.0;
  d.beta = 1.0 / (1.0 + p.kappa);  // int e^{-t} (1 - e^{-kappa t}) dt
  d.phi = [](double) { return 1.0; };
  d.ell = [](double) { return 1.0; };

  if (p.jump == TwoRegimeJump::finite_ifs) {
    parts.name = "two_regime(finite_ifs)";
    parts.domain = Domain{0.0, 1.0};
    auto intensity = std::make_shared<AffineIntensity>(1.0, 0.5, 0.0, 1.0);
    parts.intensity = intensity;
    parts.closed_form_hazard = affine_affine_hazard(*intensity, *flow);
    parts.jump = std::make_shared<FiniteIfsKernel>(
        std::vector<AffineMap>{{0.5, 0.0}, {0.5, 0.5}},
        std::vector<FiniteIfsKernel::Probability>{
            [](double y) { return 0.75 - 0.5 * std::clamp(y, 0.0, 1.0); },
            [](double y) { return 0.25 + 0.5 * std::clamp(y, 0.0, 1.0); }},
        parts.domain);
    d.L_w = 0.5;
    d.L_p = 1.0;
    d.delta_p = 0.5;
    d.L_lambda = 0.5;
    d.gamma = 0.375;  // sup_y p_1(y) * 1/2
  } else {
    parts.name = "two_regime(bursts)";
    parts.domain = Domain{0.0, std::numeric_limits<double>::infinity()};
    auto intensity = std::make_shared<SaturatingIntensity>(1.0, 1.5);
    parts.intensity = intensity;
    parts.closed_form_hazard = saturating_affine_hazard(*intensity, *flow);
    parts.jump = std::make_shared<AdditiveBurstKernel>(p.burst_mean);
    d.L_w = 1.0;
    d.L_p = 0.0;
    d.delta_p = 1.0;
    d.L_lambda = 0.5;
    d.gamma = p.burst_mean;
    parts.probe_upper = 15.0 * p.burst_mean;
  }
  parts.switching = clamp_switching(parts.domain);
  return std::make_shared<const ModelSpec>(std::move(parts));
}

std::shared_ptr<const ModelSpec> expanding_flow_model() {
  ModelParts parts;
  parts.name = "expanding_flow";
  parts.domain = Domain{0.0, std::numeric_limits<double>::infinity()};
  parts.flow = std::make_shared<AffineExpFlow>(-1.0, std::vector<double>{0.0});
  parts.intensity = std::make_shared<ConstantIntensity>(1.0);
  parts.jump = std::make_shared<AdditiveBurstKernel>(1.0);
  DeclaredConstants& d = parts.declared;
  d.L = 1.0;
  d.alpha = 1.0;
  d.L_w = 1.0;
  d.L_p = 0.0;
  d.delta_p = 1.0;
  d.L_lambda = 0.0;
  d.beta = 0.0;
  d.gamma = 1.0;
  d.phi = [](double) { return 0.0; };
  d.ell = [](double) { return 0.0; };
  parts.designated_failure = "flow_envelope";
  return std::make_shared<const ModelSpec>(std::move(parts));
}

std::shared_ptr<const ModelSpec> overdriven_gene_model() {
  auto base = gene_expression_model({1.0, 1.0, 1.0, 2.5});
  ModelParts parts{"overdriven_gene",
                   base->domain(),
                   base->flow_ptr(),
                   std::make_shared<SaturatingIntensity>(1.0, 2.5),
                   std::make_shared<AdditiveBurstKernel>(1.0),
                   SwitchingMatrix(),
                   std::nullopt,
                   base->declared(),
                   base->probe_upper(),
                   "rate_condition"};
  auto flow = std::dynamic_pointer_cast<const AffineExpFlow>(parts.flow);
  parts.closed_form_hazard = saturating_affine_hazard(
      static_cast<const SaturatingIntensity&>(*parts.intensity), *flow);
  return std::make_shared<const ModelSpec>(std::move(parts));
}

std::shared_ptr<const ModelSpec> absorbing_switching_model() {
  auto base = two_regime_model();
  ModelParts parts{"absorbing_switching",
                   base->domain(),
                   base->flow_ptr(),
                   nullptr,
                   nullptr,
                   SwitchingMatrix::constant({{1.0, 0.0}, {0.0, 1.0}}),
                   std::nullopt,
                   base->declared(),
                   base->probe_upper(),
                   "switching"};
  auto intensity = std::make_shared<AffineIntensity>(1.0, 0.5, 0.0, 1.0);
  parts.intensity = intensity;
  parts.jump = std::shared_ptr<const IfsKernel>(base, &base->jump());
  parts.closed_form_hazard = affine_affine_hazard(
      *intensity, static_cast<const AffineExpFlow&>(*parts.flow));
  parts.declared.L_pi = 0.0;
  parts.declared.delta_pi = 0.0;
  return std::make_shared<const ModelSpec>(std::move(parts));
}

std::vector<std::string> model_names() {
  return {"gene", "two_regime", "expanding_flow", "overdriven_gene",
          "absorbing_switching"};
}

namespace {

void reject_unknown(const nlohmann::json& params, const std::set<std::string>& allowed,
                    const std::string& model) {
  if (!params.is_object()) throw ConfigError("model params must be an object");
  for (const auto& [key, value] : params.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown parameter '" + key + "' for model '" + model + "'");
    }
  }
}

double number(const nlohmann::json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_number()) throw ConfigError(std::string("parameter '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

std::shared_ptr<const ModelSpec> model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("name") || !doc.at("name").is_string()) {
    throw ConfigError("model: expected an object with a string 'name'");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "name" && key != "params") throw ConfigError("model: unknown key '" + key + "'");
  }
  const std::string name = doc.at("name").get<std::string>();
  const nlohmann::json params = doc.value("params", nlohmann::json::object());
  if (name == "gene") {
    reject_unknown(params, {"kappa", "burst_mean", "lambda_low", "lambda_high"}, name);
    GeneParams p;
    p.kappa = number(params, "kappa", p.kappa);
    p.burst_mean = number(params, "burst_mean", p.burst_mean);
    p.lambda_low = number(params, "lambda_low", p.lambda_low);
    p.lambda_high = number(params, "lambda_high", p.lambda_high);
    return gene_expression_model(p);
  }
  if (name == "two_regime") {
    reject_unknown(params, {"kappa", "jump", "burst_mean"}, name);
    TwoRegimeParams p;
    p.kappa = number(params, "kappa", p.kappa);
    p.burst_mean = number(params, "burst_mean", p.burst_mean);
    if (params.contains("jump")) {
      const auto& j = params.at("jump");
      if (j == "finite_ifs") {
        p.jump = TwoRegimeJump::finite_ifs;
      } else if (j == "bursts") {
        p.jump = TwoRegimeJump::bursts;
      } else {
        throw ConfigError("two_regime: jump must be \"finite_ifs\" or \"bursts\"");
      }
    }
    return two_regime_model(p);
  }
  reject_unknown(params, {}, name);
  if (name == "expanding_flow") return expanding_flow_model();
  if (name == "overdriven_gene") return overdriven_gene_model();
  if (name == "absorbing_switching") return absorbing_switching_model();
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace pdmp
