#pragma once

#include <cstddef>
#include <cstdint>

#include <json.hpp>

#include "pdmp/model.hpp"
#include "pdmp/random.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

/// Bookkeeping for one measure transform. `normalizer` is output/input mass,
/// i.e. mu G~(X) or mu W~(X) for a probability input.
struct TransformReport {
  double input_mass = 0.0;
  double output_mass = 0.0;
  double normalizer = 0.0;
  double standard_error = 0.0;
  std::size_t atoms = 0;
};

nlohmann::json to_json(const TransformReport& report);

struct TransformResult {
  WeightedMeasure measure;
  TransformReport report;
};

enum class GTildeVariant { monte_carlo, quadrature };

struct GTildeOptions {
  GTildeVariant variant = GTildeVariant::monte_carlo;
  /// Cell width of the time grid used by the quadrature variant.
  double dt = 0.01;
};

/// Survival-tail truncation point: exp(-lower * T) = 1e-12.
double time_horizon(const ModelSpec& model);

/// G~(x, X) = int_0^inf exp(-Lambda(x, t)) dt by adaptive Simpson on
/// [0, time_horizon].
double expected_holding_time(const ModelSpec& model, const StatePoint& x);
/// The same integral by an n-point Gauss–Laguerre rule after rescaling time by
/// the lower intensity bound. Used as an independent check.
double expected_holding_time_laguerre(const ModelSpec& model, const StatePoint& x,
                                      std::size_t nodes = 96);

/// mu G~. Monte Carlo: atom (x, w) becomes ((S_i(U tau, y), i), w tau) with
/// tau from the holding law and U uniform. Quadrature: one atom per time
/// cell [a, b] at S_i(mid), weight (e^{-Lambda(a)} - e^{-Lambda(b)}) / lambda(mid),
/// survival tail folded into the last cell.
TransformResult apply_g_tilde(const ModelSpec& model, const WeightedMeasure& mu,
                              Rng& rng, const GTildeOptions& options = {});

/// mu W~: atom (x, w) becomes (post_jump_sample(x), w lambda(y)).
TransformResult apply_w_tilde(const ModelSpec& model, const WeightedMeasure& mu,
                              Rng& rng);

/// Parallel forms. Atoms are processed in fixed blocks, block b drawing from
/// make_stream(seed, b), so the output does not depend on `threads`.
TransformResult apply_g_tilde(const ModelSpec& model, const WeightedMeasure& mu,
                              std::uint64_t seed, unsigned threads,
                              const GTildeOptions& options = {});
TransformResult apply_w_tilde(const ModelSpec& model, const WeightedMeasure& mu,
                              std::uint64_t seed, unsigned threads);

/// mu_Psi = mu_Phi G~ / mu_Phi G~(X); the report carries mu_Phi G~(X).
TransformResult correspondence_phi_to_psi(const ModelSpec& model,
                                          const WeightedMeasure& mu_phi, Rng& rng,
                                          const GTildeOptions& options = {});
/// mu_Phi = mu_Psi W~ / mu_Psi W~(X); the report carries mu_Psi W~(X).
TransformResult correspondence_psi_to_phi(const ModelSpec& model,
                                          const WeightedMeasure& mu_psi, Rng& rng);

TransformResult correspondence_phi_to_psi(const ModelSpec& model,
                                          const WeightedMeasure& mu_phi,
                                          std::uint64_t seed, unsigned threads,
                                          const GTildeOptions& options = {});
TransformResult correspondence_psi_to_phi(const ModelSpec& model,
                                          const WeightedMeasure& mu_psi,
                                          std::uint64_t seed, unsigned threads);

constexpr std::size_t kTransformBlock = 8192;

}  // namespace pdmp
