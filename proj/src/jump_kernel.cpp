#include "pdmp/jump_kernel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pdmp/quadrature.hpp"

namespace pdmp {
namespace {

std::vector<double> probe_grid(const Domain& d) {
  const double lo = d.lower;
  const double hi = d.bounded() ? d.upper : d.lower + 50.0;
  constexpr int kProbes = 101;
  std::vector<double> ys(kProbes);
  for (int k = 0; k < kProbes; ++k) ys[k] = lo + (hi - lo) * k / (kProbes - 1);
  return ys;
}

}  // namespace

AdditiveBurstKernel::AdditiveBurstKernel(double mean) : mean_(mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("AdditiveBurstKernel: mean must be positive");
  }
}

double AdditiveBurstKernel::density(double theta, double) const {
  return theta < 0.0 ? 0.0 : std::exp(-theta / mean_) / mean_;
}

std::vector<ThetaNode> AdditiveBurstKernel::reference_rule() const {
  const QuadratureRule rule = composite_simpson(0.0, 60.0 * mean_, 6000);
  std::vector<ThetaNode> nodes(rule.nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    nodes[k] = {rule.nodes[k], rule.weights[k]};
  }
  return nodes;
}

std::vector<ThetaNode> AdditiveBurstKernel::discretize(double, double resolution,
                                                       double theta_max) const {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("discretize: resolution must be positive");
  }
  const auto cells = static_cast<std::size_t>(
      std::ceil(std::max(theta_max, resolution) / resolution));
  std::vector<ThetaNode> nodes(cells + 1);
  // Survival of theta at the upper edge of each cell.
  double prev_survival = 1.0;
  for (std::size_t k = 0; k <= cells; ++k) {
    const double edge = (static_cast<double>(k) + 0.5) * resolution;
    const double survival = (k == cells) ? 0.0 : std::exp(-edge / mean_);
    nodes[k] = {static_cast<double>(k) * resolution, prev_survival - survival};
    prev_survival = survival;
  }
  return nodes;
}

std::string AdditiveBurstKernel::describe() const {
  std::ostringstream s;
  s << "additive-bursts(mean=" << mean_ << ")";
  return s.str();
}

FiniteIfsKernel::FiniteIfsKernel(std::vector<AffineMap> maps,
                                 std::vector<Probability> probabilities,
                                 Domain probe_domain)
    : maps_(std::move(maps)), probabilities_(std::move(probabilities)) {
  if (maps_.empty() || maps_.size() != probabilities_.size()) {
    throw std::invalid_argument(
        "FiniteIfsKernel: need one probability per map and at least one map");
  }
  for (double y : probe_grid(probe_domain)) {
    double total = 0.0;
    for (const auto& p : probabilities_) {
      const double v = p(y);
      if (!(v >= 0.0)) {
        throw std::invalid_argument("FiniteIfsKernel: negative selection probability");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument(
          "FiniteIfsKernel: selection probabilities do not sum to one");
    }
  }
}

FiniteIfsKernel::FiniteIfsKernel(std::vector<AffineMap> maps,
                                 std::vector<double> probabilities)
    : FiniteIfsKernel(
          std::move(maps),
          [&] {
            std::vector<Probability> ps;
            for (double p : probabilities) ps.push_back([p](double) { return p; });
            return ps;
          }(),
          Domain{0.0, 1.0}) {}

double FiniteIfsKernel::sample_theta(double y, Rng& rng) const {
  const std::size_t n = maps_.size();
  if (n == 1) return 0.0;
  const double u = uniform_open(rng);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = probabilities_[k](y);
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::domain_error("FiniteIfsKernel: malformed selection probability");
    }
    cumulative += p;
    if (u <= cumulative) return static_cast<double>(k);
  }
  if (cumulative < 1.0 - 1e-9) {
    throw std::domain_error("FiniteIfsKernel: selection probabilities sum below one");
  }
  // u fell into the rounding gap above the accumulated total.
  for (std::size_t k = n; k-- > 0;) {
    if (probabilities_[k](y) > 0.0) return static_cast<double>(k);
  }
  return static_cast<double>(n - 1);
}

std::vector<ThetaNode> FiniteIfsKernel::reference_rule() const {
  std::vector<ThetaNode> nodes(maps_.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = {static_cast<double>(k), 1.0};
  return nodes;
}

std::vector<ThetaNode> FiniteIfsKernel::discretize(double y, double, double) const {
  std::vector<ThetaNode> nodes(maps_.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    nodes[k] = {static_cast<double>(k), probabilities_[k](y)};
  }
  return nodes;
}

std::string FiniteIfsKernel::describe() const {
  std::ostringstream s;
  s << "finite-ifs(";
  for (std::size_t k = 0; k < maps_.size(); ++k) {
    s << (k ? "; " : "") << maps_[k].scale << "*y+" << maps_[k].shift;
  }
  s << ")";
  return s.str();
}

double sample_jump(const IfsKernel& kernel, double y, Rng& rng) {
  return kernel.map(kernel.sample_theta(y, rng), y);
}

SwitchingMatrix::SwitchingMatrix() {
  rows_.push_back({[](double) { return 1.0; }});
}

SwitchingMatrix::SwitchingMatrix(std::vector<std::vector<Entry>> rows,
                                 Domain probe_domain)
    : rows_(std::move(rows)) {
  const std::size_t n = rows_.size();
  if (n == 0) throw std::invalid_argument("SwitchingMatrix: no regimes");
  for (const auto& row : rows_) {
    if (row.size() != n) throw std::invalid_argument("SwitchingMatrix: not square");
  }
  for (double y : probe_grid(probe_domain)) {
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = rows_[i][j](y);
        if (!(v >= 0.0 && v <= 1.0)) {
          throw std::invalid_argument("SwitchingMatrix: entry outside [0, 1]");
        }
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "SwitchingMatrix: row " << i << " sums to " << total << " at y=" << y;
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

SwitchingMatrix SwitchingMatrix::constant(const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<Entry>> entries;
  for (const auto& row : rows) {
    auto& out = entries.emplace_back();
    for (double v : row) out.push_back([v](double) { return v; });
  }
  return SwitchingMatrix(std::move(entries), Domain{0.0, 1.0});
}

std::size_t SwitchingMatrix::sample(std::size_t i, double y, Rng& rng) const {
  const std::size_t n = rows_.size();
  if (n == 1) return 0;
  const double u = uniform_open(rng);
  double cumulative = 0.0;
  std::size_t last_positive = i;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = rows_[i][j](y);
    if (p > 0.0) last_positive = j;
    cumulative += p;
    if (u <= cumulative) return j;
  }
  return last_positive;
}

std::size_t sample_regime(const SwitchingMatrix& pi, std::size_t i, double y_post,
                          Rng& rng) {
  if (i >= pi.size()) throw std::out_of_range("sample_regime: regime out of range");
  return pi.sample(i, y_post, rng);
}

PostJumpKernel::PostJumpKernel(std::shared_ptr<const IfsKernel> jump,
                               SwitchingMatrix switching,
                               std::shared_ptr<const Intensity> intensity)
    : jump_(std::move(jump)),
      switching_(std::move(switching)),
      intensity_(std::move(intensity)) {
  if (!jump_ || !intensity_) {
    throw std::invalid_argument("PostJumpKernel: jump kernel and intensity required");
  }
}

StatePoint post_jump_sample(const PostJumpKernel& kernel, const StatePoint& x,
                            Rng& rng) {
  return kernel.sample(x, rng);
}

double w_tilde_weight(const PostJumpKernel& kernel, const StatePoint& x) {
  return kernel.tilde_weight(x);
}

}  // namespace pdmp
