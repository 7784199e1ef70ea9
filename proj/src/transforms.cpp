#include "pdmp/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdmp/parallel.hpp"
#include "pdmp/quadrature.hpp"

namespace pdmp {

nlohmann::json to_json(const TransformReport& r) {
  return {{"input_mass", r.input_mass},
          {"output_mass", r.output_mass},
          {"normalizer", r.normalizer},
          {"standard_error", r.standard_error},
          {"atoms", r.atoms}};
}

double time_horizon(const ModelSpec& model) {
  return 12.0 * std::numbers::ln10 / model.lambda_lower();
}

double expected_holding_time(const ModelSpec& model, const StatePoint& x) {
  const CumulativeHazard& hazard = model.hazard();
  if (model.intensity().is_constant()) return 1.0 / model.lambda_lower();
  return adaptive_simpson([&](double t) { return std::exp(-hazard(x, t)); }, 0.0,
                          time_horizon(model), {1e-12, 48});
}

double expected_holding_time_laguerre(const ModelSpec& model, const StatePoint& x,
                                      std::size_t nodes) {
  const double lower = model.lambda_lower();
  const CumulativeHazard& hazard = model.hazard();
  const QuadratureRule rule = gauss_laguerre(nodes);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double s = rule.nodes[k];
    sum += rule.weights[k] * std::exp(s - hazard(x, s / lower));
  }
  return sum / lower;
}

namespace {

void require_mass(const WeightedMeasure& mu, const char* who) {
  if (!(mu.total_mass() > 0.0)) {
    throw std::invalid_argument(std::string(who) + ": input measure has zero mass");
  }
}

// One atom of the Monte Carlo G~ estimator.
void g_tilde_mc_atom(const ModelSpec& model, const Atom& a, Rng& rng,
                     WeightedMeasure& out) {
  const double tau = model.hazard().sample_inversion(a.x, uniform_open(rng));
  const double u = uniform_open(rng);
  out.add({model.flow()(a.x.regime, u * tau, a.x.y), a.x.regime}, a.weight * tau);
}

void g_tilde_quadrature_atom(const ModelSpec& model, const Atom& a, double dt,
                             double horizon, WeightedMeasure& out) {
  const CumulativeHazard& hazard = model.hazard();
  const Semiflow& flow = model.flow();
  const Intensity& lambda = model.intensity();
  const std::size_t cells = static_cast<std::size_t>(std::ceil(horizon / dt));
  double survival_a = 1.0;
  for (std::size_t k = 0; k < cells; ++k) {
    const double t_mid = (static_cast<double>(k) + 0.5) * dt;
    const double y_mid = flow(a.x.regime, t_mid, a.x.y);
    const double survival_b = std::exp(-hazard(a.x, static_cast<double>(k + 1) * dt));
    const bool last = k + 1 == cells || survival_b < 1e-14;
    const double mass = last ? survival_a : survival_a - survival_b;
    out.add({y_mid, a.x.regime}, a.weight * mass / lambda(y_mid));
    if (last) break;
    survival_a = survival_b;
  }
}

double mc_standard_error(const WeightedMeasure& in, const WeightedMeasure& out,
                         double normalizer) {
  // Per-atom output mass w_k tau_k has mean w_k * normalizer.
  double ss = 0.0;
  const auto& ia = in.atoms();
  const auto& oa = out.atoms();
  for (std::size_t k = 0; k < ia.size(); ++k) {
    const double d = oa[k].weight - ia[k].weight * normalizer;
    ss += d * d;
  }
  return std::sqrt(ss);
}

TransformReport make_report(const WeightedMeasure& in, const WeightedMeasure& out) {
  TransformReport r;
  r.input_mass = in.total_mass();
  r.output_mass = out.total_mass();
  r.normalizer = r.output_mass / r.input_mass;
  r.atoms = out.size();
  return r;
}

template <class PerAtom>
WeightedMeasure blocked_map(const WeightedMeasure& mu, std::uint64_t seed,
                            unsigned threads, PerAtom&& per_atom) {
  const auto& atoms = mu.atoms();
  const std::size_t blocks = (atoms.size() + kTransformBlock - 1) / kTransformBlock;
  std::vector<WeightedMeasure> parts(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Rng rng = make_stream(seed, b);
    const std::size_t end = std::min(atoms.size(), (b + 1) * kTransformBlock);
    WeightedMeasure& part = parts[b];
    part.reserve(end - b * kTransformBlock);
    for (std::size_t k = b * kTransformBlock; k < end; ++k) per_atom(atoms[k], rng, part);
  });
  return merge(parts);
}

TransformResult finish_g_tilde(const WeightedMeasure& mu, WeightedMeasure out,
                               const GTildeOptions& options) {
  TransformResult result{std::move(out), {}};
  result.report = make_report(mu, result.measure);
  if (options.variant == GTildeVariant::monte_carlo) {
    result.report.standard_error =
        mc_standard_error(mu, result.measure, result.report.normalizer) /
        result.report.input_mass;
  }
  return result;
}

}  // namespace

TransformResult apply_g_tilde(const ModelSpec& model, const WeightedMeasure& mu,
                              Rng& rng, const GTildeOptions& options) {
  require_mass(mu, "apply_g_tilde");
  WeightedMeasure out;
  if (options.variant == GTildeVariant::monte_carlo) {
    out.reserve(mu.size());
    for (const Atom& a : mu.atoms()) g_tilde_mc_atom(model, a, rng, out);
  } else {
    const double horizon = time_horizon(model);
    for (const Atom& a : mu.atoms()) {
      g_tilde_quadrature_atom(model, a, options.dt, horizon, out);
    }
  }
  return finish_g_tilde(mu, std::move(out), options);
}

TransformResult apply_g_tilde(const ModelSpec& model, const WeightedMeasure& mu,
                              std::uint64_t seed, unsigned threads,
                              const GTildeOptions& options) {
  require_mass(mu, "apply_g_tilde");
  const double horizon = time_horizon(model);
  WeightedMeasure out = blocked_map(mu, seed, threads,
                                    [&](const Atom& a, Rng& rng, WeightedMeasure& part) {
    if (options.variant == GTildeVariant::monte_carlo) {
      g_tilde_mc_atom(model, a, rng, part);
    } else {
      g_tilde_quadrature_atom(model, a, options.dt, horizon, part);
    }
  });
  return finish_g_tilde(mu, std::move(out), options);
}

TransformResult apply_w_tilde(const ModelSpec& model, const WeightedMeasure& mu,
                              Rng& rng) {
  require_mass(mu, "apply_w_tilde");
  WeightedMeasure out;
  out.reserve(mu.size());
  const PostJumpKernel& kernel = model.post_jump();
  for (const Atom& a : mu.atoms()) {
    out.add(kernel.sample(a.x, rng), a.weight * kernel.tilde_weight(a.x));
  }
  TransformResult result{std::move(out), {}};
  result.report = make_report(mu, result.measure);
  return result;
}

TransformResult apply_w_tilde(const ModelSpec& model, const WeightedMeasure& mu,
                              std::uint64_t seed, unsigned threads) {
  require_mass(mu, "apply_w_tilde");
  const PostJumpKernel& kernel = model.post_jump();
  WeightedMeasure out = blocked_map(mu, seed, threads,
                                    [&](const Atom& a, Rng& rng, WeightedMeasure& part) {
    part.add(kernel.sample(a.x, rng), a.weight * kernel.tilde_weight(a.x));
  });
  TransformResult result{std::move(out), {}};
  result.report = make_report(mu, result.measure);
  return result;
}

namespace {

TransformResult normalized(TransformResult r) {
  r.measure = normalize(r.measure);
  return r;
}

}  // namespace

TransformResult correspondence_phi_to_psi(const ModelSpec& model,
                                          const WeightedMeasure& mu_phi, Rng& rng,
                                          const GTildeOptions& options) {
  return normalized(apply_g_tilde(model, mu_phi, rng, options));
}

TransformResult correspondence_psi_to_phi(const ModelSpec& model,
                                          const WeightedMeasure& mu_psi, Rng& rng) {
  return normalized(apply_w_tilde(model, mu_psi, rng));
}

TransformResult correspondence_phi_to_psi(const ModelSpec& model,
                                          const WeightedMeasure& mu_phi,
                                          std::uint64_t seed, unsigned threads,
                                          const GTildeOptions& options) {
  return normalized(apply_g_tilde(model, mu_phi, seed, threads, options));
}

TransformResult correspondence_psi_to_phi(const ModelSpec& model,
                                          const WeightedMeasure& mu_psi,
                                          std::uint64_t seed, unsigned threads) {
  return normalized(apply_w_tilde(model, mu_psi, seed, threads));
}

}  // namespace pdmp
