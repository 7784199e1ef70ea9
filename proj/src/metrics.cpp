#include "pdmp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pdmp {

std::vector<Weighted1d> project(const WeightedMeasure& mu) {
  std::vector<Weighted1d> out;
  out.reserve(mu.size());
  for (const Atom& a : mu.atoms()) out.push_back({a.x.y, a.weight});
  return out;
}

std::vector<Weighted1d> project(const WeightedMeasure& mu, std::size_t regime) {
  std::vector<Weighted1d> out;
  for (const Atom& a : mu.atoms()) {
    if (a.x.regime == regime) out.push_back({a.x.y, a.weight});
  }
  return out;
}

namespace {

void sort_by_value(std::vector<Weighted1d>& v) {
  std::sort(v.begin(), v.end(),
            [](const Weighted1d& p, const Weighted1d& q) { return p.value < q.value; });
}

double mass(std::span<const Weighted1d> v) {
  double s = 0.0, c = 0.0;
  for (const auto& p : v) {
    const double t = s + p.weight;
    c += std::abs(s) >= std::abs(p.weight) ? (s - t) + p.weight : (p.weight - t) + s;
    s = t;
  }
  return s + c;
}

// Cumulative weights and weighted values over a value-sorted sample.
struct Prefix {
  std::vector<double> y;
  std::vector<double> w;   // w[k] = sum of weights of entries < k
  std::vector<double> wy;

  explicit Prefix(std::vector<Weighted1d> v) {
    sort_by_value(v);
    y.reserve(v.size());
    w.assign(1, 0.0);
    wy.assign(1, 0.0);
    for (const auto& p : v) {
      y.push_back(p.value);
      w.push_back(w.back() + p.weight);
      wy.push_back(wy.back() + p.weight * p.value);
    }
  }

  // <clamp(. - a, -1, 1), sample>
  double ramp(double a) const {
    const auto lo = static_cast<std::size_t>(
        std::lower_bound(y.begin(), y.end(), a - 1.0) - y.begin());
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(y.begin(), y.end(), a + 1.0) - y.begin());
    const double below = w[lo];
    const double above = w.back() - w[hi];
    const double mid_w = w[hi] - w[lo];
    const double mid_wy = wy[hi] - wy[lo];
    return -below + (mid_wy - a * mid_w) + above;
  }
};

}  // namespace

double wasserstein1_1d(std::vector<Weighted1d> a, std::vector<Weighted1d> b) {
  const double ma = mass(a), mb = mass(b);
  if (std::abs(ma - mb) > 1e-9 * std::max({ma, mb, 1e-300})) {
    std::ostringstream msg;
    msg << "wasserstein1_1d: total masses differ (" << ma << " vs " << mb << ")";
    throw std::invalid_argument(msg.str());
  }
  if (a.empty() || b.empty()) return 0.0;
  sort_by_value(a);
  sort_by_value(b);
  // Sweep the merged support accumulating |F_a - F_b| times gap length.
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, total = 0.0;
  double prev = std::min(a.front().value, b.front().value);
  while (i < a.size() || j < b.size()) {
    const double next = j >= b.size() || (i < a.size() && a[i].value <= b[j].value)
                            ? a[i].value
                            : b[j].value;
    total += std::abs(fa - fb) * (next - prev);
    while (i < a.size() && a[i].value == next) fa += a[i++].weight;
    while (j < b.size() && b[j].value == next) fb += b[j++].weight;
    prev = next;
  }
  return total;
}

double wasserstein1_y(const WeightedMeasure& mu, const WeightedMeasure& nu) {
  return wasserstein1_1d(project(normalize(mu)), project(normalize(nu)));
}

double bl_lower_bound(const WeightedMeasure& mu, const WeightedMeasure& nu,
                      double regime_gap, std::size_t grid) {
  if (mu.empty() || nu.empty()) return 0.0;
  if (grid < 2) throw std::invalid_argument("bl_lower_bound: grid needs two points");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* m : {&mu, &nu}) {
    for (const Atom& a : m->atoms()) {
      lo = std::min(lo, a.x.y);
      hi = std::max(hi, a.x.y);
    }
  }
  std::vector<double> anchors;
  anchors.reserve(grid + 2);
  for (std::size_t k = 0; k < grid; ++k) {
    anchors.push_back(lo - 1.0 + (hi - lo + 2.0) * static_cast<double>(k) /
                                     static_cast<double>(grid - 1));
  }
  anchors.push_back(lo);
  anchors.push_back(hi);

  double best = 0.0;
  auto scan = [&](const Prefix& p, const Prefix& q, double amplitude) {
    for (double a : anchors) best = std::max(best, amplitude * std::abs(p.ramp(a) - q.ramp(a)));
  };
  scan(Prefix(project(mu)), Prefix(project(nu)), 1.0);
  const std::size_t regimes = std::max(mu.max_regime(), nu.max_regime()) + 1;
  if (regimes > 1) {
    const double amplitude = std::min(1.0, regime_gap);
    for (std::size_t i = 0; i < regimes; ++i) {
      scan(Prefix(project(mu, i)), Prefix(project(nu, i)), amplitude);
    }
  }
  return best;
}

DistanceReport compare_measures(const WeightedMeasure& mu_in, const WeightedMeasure& nu_in,
                                double regime_gap) {
  const WeightedMeasure mu = normalize(mu_in);
  const WeightedMeasure nu = normalize(nu_in);
  const std::size_t regimes = std::max(mu.max_regime(), nu.max_regime()) + 1;
  DistanceReport r;
  const double c = std::max(1.0, regime_gap);
  for (std::size_t i = 0; i < regimes; ++i) {
    auto a = project(mu, i);
    auto b = project(nu, i);
    const double ma = mass(a), mb = mass(b);
    r.mass_mu.push_back(ma);
    r.mass_nu.push_back(mb);
    r.regime_mass_discrepancy += std::abs(ma - mb);
    double w1 = 0.0;
    if (ma > 0.0 && mb > 0.0) {
      for (auto& p : a) p.weight /= ma;
      for (auto& p : b) p.weight /= mb;
      w1 = wasserstein1_1d(std::move(a), std::move(b));
    }
    r.w1_per_regime.push_back(w1);
    r.combined += std::min(ma, mb) * w1;
  }
  r.combined += c * r.regime_mass_discrepancy;
  r.bl_lower = bl_lower_bound(mu, nu, regime_gap);
  if (r.bl_lower > r.combined * (1.0 + 1e-9) + 1e-12) {
    std::ostringstream msg;
    msg << "compare_measures: BL lower bound " << r.bl_lower
        << " exceeds the W1 composite " << r.combined;
    throw std::logic_error(msg.str());
  }
  return r;
}

nlohmann::json to_json(const DistanceReport& r) {
  return {{"w1_per_regime", r.w1_per_regime},
          {"regime_mass_mu", r.mass_mu},
          {"regime_mass_nu", r.mass_nu},
          {"regime_mass_discrepancy", r.regime_mass_discrepancy},
          {"combined", r.combined},
          {"bl_lower_bound", r.bl_lower}};
}

double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double f = cdf(s[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  return d;
}

double ks_statistic(std::vector<Weighted1d> a, std::vector<Weighted1d> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  const double ma = mass(a), mb = mass(b);
  if (!(ma > 0.0 && mb > 0.0)) throw std::invalid_argument("ks_statistic: zero mass");
  sort_by_value(a);
  sort_by_value(b);
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, d = 0.0;
  while (i < a.size() || j < b.size()) {
    const double next = j >= b.size() || (i < a.size() && a[i].value <= b[j].value)
                            ? a[i].value
                            : b[j].value;
    while (i < a.size() && a[i].value == next) fa += a[i++].weight;
    while (j < b.size() && b[j].value == next) fb += b[j++].weight;
    d = std::max(d, std::abs(fa / ma - fb / mb));
  }
  return d;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  std::vector<Weighted1d> wa, wb;
  wa.reserve(a.size());
  wb.reserve(b.size());
  for (double v : a) wa.push_back({v, 1.0});
  for (double v : b) wb.push_back({v, 1.0});
  return ks_statistic(std::move(wa), std::move(wb));
}

double effective_size(std::span<const Weighted1d> a) {
  double s = 0.0, s2 = 0.0;
  for (const auto& p : a) {
    s += p.weight;
    s2 += p.weight * p.weight;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

double ks_critical_value(double alpha, double n) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(n > 0.0)) {
    throw std::invalid_argument("ks_critical_value: need 0 < alpha < 1 and n > 0");
  }
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(n);
}

double ks_two_sample_size(double n_a, double n_b) { return n_a * n_b / (n_a + n_b); }

}  // namespace pdmp
