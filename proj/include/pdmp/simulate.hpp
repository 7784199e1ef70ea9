#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "pdmp/model.hpp"
#include "pdmp/random.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

enum class HoldingMethod { inversion, thinning };

/// One draw of the holding time from the law 1 - exp(-Lambda(x, t)).
double sample_holding(const ModelSpec& model, const StatePoint& x, Rng& rng,
                      HoldingMethod method = HoldingMethod::inversion);

/// One transition of the extended chain: holding time, flow to the pre-jump
/// point, IFS jump, then regime switch at the post-jump location.
ExtendedState step_chain(const ModelSpec& model, const ExtendedState& state, Rng& rng,
                         HoldingMethod method = HoldingMethod::inversion);

/// step_chain with the holding time supplied by the caller.
ExtendedState step_chain_with_holding(const ModelSpec& model,
                                      const ExtendedState& state, double holding,
                                      Rng& rng);

struct JumpRecord {
  double y;
  std::size_t regime;
  double tau;
};

/// Post-jump record {(Y_n, xi_n, tau_n)}, n = 0..N, stored column-wise.
class JumpTrajectory {
 public:
  explicit JumpTrajectory(const ExtendedState& initial);

  void push(const ExtendedState& s);
  void reserve(std::size_t n);

  std::size_t size() const noexcept { return tau_.size(); }
  std::size_t steps() const noexcept { return tau_.size() - 1; }
  JumpRecord operator[](std::size_t n) const { return {y_[n], regime_[n], tau_[n]}; }
  StatePoint state(std::size_t n) const { return {y_[n], regime_[n]}; }
  double tau(std::size_t n) const { return tau_[n]; }
  const std::vector<double>& taus() const noexcept { return tau_; }
  ExtendedState back() const { return {state(size() - 1), tau_.back()}; }

  /// Delta tau_n = tau_n - tau_{n-1} for n = 1..N.
  std::vector<double> holding_times() const;

 private:
  std::vector<double> y_;
  std::vector<std::size_t> regime_;
  std::vector<double> tau_;
};

JumpTrajectory run_chain(const ModelSpec& model, const ExtendedState& initial,
                         std::size_t n_steps, Rng& rng,
                         HoldingMethod method = HoldingMethod::inversion);

/// Independent replicas; replica r uses make_stream(seed, r).
std::vector<JumpTrajectory> run_replicas(const ModelSpec& model,
                                         const ExtendedState& initial,
                                         std::size_t n_steps, std::uint64_t seed,
                                         std::size_t replicas, unsigned threads,
                                         HoldingMethod method = HoldingMethod::inversion);

/// The piecewise-deterministic path interpolating a jump trajectory:
/// Psi(t) = (S_{xi_n}(t - tau_n, Y_n), xi_n) on [tau_n, tau_{n+1}).
class PdmpPath {
 public:
  PdmpPath(std::shared_ptr<const Semiflow> flow, JumpTrajectory trajectory);

  /// Defined for tau_0 <= t <= tau_N; anything else is an error.
  StatePoint operator()(double t) const;
  double start() const noexcept { return trajectory_.tau(0); }
  double horizon() const noexcept { return trajectory_.taus().back(); }
  const JumpTrajectory& trajectory() const noexcept { return trajectory_; }

 private:
  std::shared_ptr<const Semiflow> flow_;
  JumpTrajectory trajectory_;
};

StatePoint pdmp_evaluate(const PdmpPath& path, double t);

/// eta(t) = max{n : tau_n <= t}.
std::size_t count_jumps(const JumpTrajectory& trajectory, double t);

/// Equal-weight samples of Psi at stratified-uniform times in
/// [burn_in, horizon], `samples_per_path` per path; normalized.
/// When `times` is given, the sampling time of each atom is appended to it.
WeightedMeasure occupation_measure(std::span<const PdmpPath> paths, double burn_in,
                                   double horizon, std::size_t samples_per_path,
                                   Rng& rng, std::vector<double>* times = nullptr);

/// Equal-weight measure on the post-jump states Phi_n with n > burn_steps,
/// pooled over trajectories; normalized.
WeightedMeasure chain_measure(std::span<const JumpTrajectory> trajectories,
                              std::size_t burn_steps);

/// Per-replica jump statistics at observation times t_k:
///   count[k][n]  = P(eta(t_k) = n), n = 0..max_n,
///   moment[k][n] = E[exp(lower tau_n) 1{tau_n <= t_k}],
/// each with its Monte Carlo standard error.
struct JumpCountStats {
  std::vector<double> times;
  std::size_t max_n = 0;
  std::size_t replicas = 0;
  std::vector<std::vector<double>> count, count_se;
  std::vector<std::vector<double>> moment, moment_se;
};

/// Replicas are simulated in fixed blocks, block b drawing from
/// make_stream(seed, b), so the result does not depend on `threads`.
JumpCountStats jump_count_stats(const ModelSpec& model, const ExtendedState& initial,
                                std::vector<double> times, std::size_t max_n,
                                std::size_t replicas, std::uint64_t seed,
                                unsigned threads,
                                HoldingMethod method = HoldingMethod::inversion);

/// CSV with header "n,tau,y,xi".
void write_trajectory_csv(std::ostream& out, const JumpTrajectory& trajectory);

}  // namespace pdmp
