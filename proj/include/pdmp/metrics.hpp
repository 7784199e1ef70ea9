#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "pdmp/state.hpp"

namespace pdmp {

struct Weighted1d {
  double value;
  double weight;
};

/// y-coordinates of the atoms in regime i (all atoms when regime is empty).
std::vector<Weighted1d> project(const WeightedMeasure& mu);
std::vector<Weighted1d> project(const WeightedMeasure& mu, std::size_t regime);

/// Exact W1 between weighted atom sets on the line, by the CDF-area formula.
/// Total masses must agree within 1e-9 (relative).
double wasserstein1_1d(std::vector<Weighted1d> a, std::vector<Weighted1d> b);
/// W1 between the y-marginals of two normalized measures.
double wasserstein1_y(const WeightedMeasure& mu, const WeightedMeasure& nu);

/// max over the ramp dictionary of |<f, mu> - <f, nu>|. The dictionary holds
/// f(y) = clamp(y - a, -1, 1) for a on a grid covering both supports, with and
/// without a regime indicator; regime-restricted ramps are scaled by
/// min(1, regime_gap) so every member is 1-Lipschitz on X and bounded by 1.
double bl_lower_bound(const WeightedMeasure& mu, const WeightedMeasure& nu,
                      double regime_gap = 1.0, std::size_t grid = 513);

struct DistanceReport {
  std::vector<double> w1_per_regime;
  std::vector<double> mass_mu;
  std::vector<double> mass_nu;
  double regime_mass_discrepancy = 0.0;  // sum_i |mass_i^mu - mass_i^nu|
  double combined = 0.0;
  double bl_lower = 0.0;
};

/// Per-regime W1 composite and BL lower bound between two probability
/// measures. Throws if the lower bound exceeds the composite (a bug).
DistanceReport compare_measures(const WeightedMeasure& mu, const WeightedMeasure& nu,
                                double regime_gap = 1.0);

nlohmann::json to_json(const DistanceReport& report);

/// sup_t |F_n(t) - F(t)|.
double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf);
double ks_statistic(std::span<const double> a, std::span<const double> b);
/// Two-sample statistic between weighted samples.
double ks_statistic(std::vector<Weighted1d> a, std::vector<Weighted1d> b);

/// Kish effective sample size (sum w)^2 / sum w^2.
double effective_size(std::span<const Weighted1d> a);

/// Asymptotic Kolmogorov critical value sqrt(-ln(alpha/2)/2) / sqrt(n).
double ks_critical_value(double alpha, double n);
/// Effective n for a two-sample test: n_a n_b / (n_a + n_b).
double ks_two_sample_size(double n_a, double n_b);

}  // namespace pdmp
