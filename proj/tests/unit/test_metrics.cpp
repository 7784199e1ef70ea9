#include <doctest.h>

#include <algorithm>

#include "pdmp/metrics.hpp"
#include "support.hpp"

using namespace pdmp;

namespace {

std::vector<Weighted1d> atoms(std::initializer_list<double> ys) {
  std::vector<Weighted1d> out;
  for (double y : ys) out.push_back({y, 1.0 / static_cast<double>(ys.size())});
  return out;
}

std::vector<Weighted1d> random_set(Rng& rng, std::size_t n) {
  std::vector<Weighted1d> out(n);
  double total = 0.0;
  for (auto& a : out) {
    a = {test::uniform(rng, -2, 4), test::uniform(rng, 0.1, 1)};
    total += a.weight;
  }
  for (auto& a : out) a.weight /= total;
  return out;
}

// Brute-force W1 for equal-size, equal-weight sets: sorted coupling.
double sorted_coupling(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("W1 examples") {
  CHECK(wasserstein1_1d(atoms({0.0}), atoms({1.0})) == 1.0);
  CHECK(wasserstein1_1d(atoms({0.3, 2.0}), atoms({0.3, 2.0})) == 0.0);
  CHECK(wasserstein1_1d(atoms({0.0, 2.0}), atoms({1.0, 1.0})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(wasserstein1_1d(atoms({0.0}), {{1.0, 2.0}}));
}

TEST_CASE("W1 matches the sorted coupling") {
  Rng rng = make_stream(101, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(37), b(37);
    for (auto& v : a) v = test::uniform(rng, 0, 5);
    for (auto& v : b) v = exponential(rng, 1.0);
    std::vector<Weighted1d> wa, wb;
    for (double v : a) wa.push_back({v, 1.0 / 37});
    for (double v : b) wb.push_back({v, 1.0 / 37});
    CHECK(std::abs(wasserstein1_1d(wa, wb) - sorted_coupling(a, b)) <= 1e-12);
  }
}

TEST_CASE("W1 symmetry and triangle inequality") {
  Rng rng = make_stream(102, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = random_set(rng, 1 + rng() % 20);
    const auto b = random_set(rng, 1 + rng() % 20);
    const auto c = random_set(rng, 1 + rng() % 20);
    const double ab = wasserstein1_1d(a, b), ba = wasserstein1_1d(b, a);
    CHECK(std::abs(ab - ba) <= 1e-10);
    CHECK(wasserstein1_1d(a, c) <= ab + wasserstein1_1d(b, c) + 1e-10);
  }
}

TEST_CASE("BL lower bound") {
  const WeightedMeasure d0({{{0.0, 0}, 1.0}}), d1({{{1.0, 0}, 1.0}});
  CHECK(bl_lower_bound(d0, d0) == 0.0);
  CHECK(bl_lower_bound(d0, d1) == doctest::Approx(1.0).epsilon(1e-12));
  // Distant atoms: bounded test functions cap the distance at 2.
  const WeightedMeasure d9({{{9.0, 0}, 1.0}});
  CHECK(bl_lower_bound(d0, d9) <= 2.0 + 1e-12);
  CHECK(bl_lower_bound(d0, d9) >= 1.0);
}

TEST_CASE("BL lower bound never exceeds the composite score") {
  Rng rng = make_stream(103, 0);
  for (int trial = 0; trial < 300; ++trial) {
    WeightedMeasure mu, nu;
    for (int k = 0; k < 30; ++k) mu.add({test::uniform(rng, 0, 3), rng() % 2}, test::uniform(rng, 0.1, 1));
    for (int k = 0; k < 25; ++k) nu.add({test::uniform(rng, 1, 5), rng() % 2}, test::uniform(rng, 0.1, 1));
    const double gap = test::uniform(rng, 0.2, 3);
    const auto r = compare_measures(normalize(mu), normalize(nu), gap);
    CHECK(r.bl_lower <= r.combined + 1e-12);
    CHECK(r.w1_per_regime.size() == 2);
  }
}

TEST_CASE("compare_measures") {
  const WeightedMeasure a({{{0.0, 0}, 0.5}, {{1.0, 1}, 0.5}});
  const WeightedMeasure b({{{0.0, 0}, 0.5}, {{2.0, 1}, 0.5}});
  const auto r = compare_measures(a, b);
  CHECK(r.regime_mass_discrepancy == 0.0);
  CHECK(r.w1_per_regime[1] == doctest::Approx(1.0));
  CHECK(r.combined == doctest::Approx(0.5));
  const auto j = to_json(r);
  CHECK(j.contains("bl_lower_bound"));
  CHECK(compare_measures(a, a).combined == 0.0);
  const WeightedMeasure c({{{0.0, 0}, 1.0}});
  CHECK(compare_measures(a, c).regime_mass_discrepancy == doctest::Approx(1.0));
}

TEST_CASE("KS statistics") {
  const std::vector<double> s{0.1, 0.5, 0.9};
  CHECK(ks_statistic(s, s) == 0.0);
  const std::vector<double> far{5.0, 6.0};
  CHECK(ks_statistic(s, far) == 1.0);
  CHECK(ks_statistic(atoms({0.1, 0.5}), atoms({7.0})) == 1.0);

  Rng rng = make_stream(104, 0);
  const auto e = test::exp_samples(rng, 100000, 2.0);
  CHECK(ks_statistic(e, [](double t) { return 1.0 - std::exp(-2.0 * t); }) <=
        1.36 / std::sqrt(1e5));
  CHECK(ks_critical_value(0.01, 1.0) == doctest::Approx(1.6276).epsilon(1e-4));
  CHECK(ks_critical_value(0.05, 1.0) == doctest::Approx(1.3581).epsilon(1e-4));
  CHECK(ks_two_sample_size(100, 100) == 50.0);
  CHECK(effective_size(atoms({1, 2, 3, 4})) == doctest::Approx(4.0));
}
