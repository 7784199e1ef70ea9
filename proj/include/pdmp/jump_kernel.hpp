#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pdmp/hazard.hpp"
#include "pdmp/random.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

/// A node of a discretized parameter law: theta with a weight (either a
/// reference-measure quadrature weight or a probability, depending on use).
struct ThetaNode {
  double theta;
  double weight;
};

/// Random iterated function system J(y, B) = int 1_B(w_theta(y)) p_theta(y) d(theta).
///
/// Theta is carried as a double: the burst size for continuous families, the
/// map index for finite ones.
class IfsKernel {
 public:
  virtual ~IfsKernel() = default;

  virtual double sample_theta(double y, Rng& rng) const = 0;
  /// w_theta(y)
  virtual double map(double theta, double y) const = 0;
  /// p_theta(y), density with respect to the reference measure.
  virtual double density(double theta, double y) const = 0;
  /// Quadrature for integrals against the reference measure over Theta.
  virtual std::vector<ThetaNode> reference_rule() const = 0;
  /// The law of theta at y as (theta, probability) pairs: cells of width
  /// `resolution` for continuous Theta, with the mass beyond `theta_max`
  /// folded into the last node. Finite families ignore both arguments.
  virtual std::vector<ThetaNode> discretize(double y, double resolution,
                                            double theta_max) const = 0;
  virtual bool finite_parameter_set() const noexcept = 0;
  virtual std::string describe() const = 0;
};

/// w_theta(y) = y + theta with theta ~ Exp(mean b), independent of y.
class AdditiveBurstKernel final : public IfsKernel {
 public:
  explicit AdditiveBurstKernel(double mean);

  double sample_theta(double, Rng& rng) const override {
    return exponential(rng, 1.0 / mean_);
  }
  double map(double theta, double y) const override { return y + theta; }
  double density(double theta, double) const override;
  std::vector<ThetaNode> reference_rule() const override;
  std::vector<ThetaNode> discretize(double y, double resolution,
                                    double theta_max) const override;
  bool finite_parameter_set() const noexcept override { return false; }
  std::string describe() const override;

  double mean() const noexcept { return mean_; }

 private:
  double mean_;
};

struct AffineMap {
  double scale = 1.0;
  double shift = 0.0;
  double operator()(double y) const noexcept { return scale * y + shift; }
};

/// Finite IFS {w_k} with place-dependent selection probabilities p_k(y).
class FiniteIfsKernel final : public IfsKernel {
 public:
  using Probability = std::function<double(double)>;

  /// Probabilities are validated (non-negative, summing to one within 1e-9)
  /// on a probe grid over `probe_domain`.
  FiniteIfsKernel(std::vector<AffineMap> maps, std::vector<Probability> probabilities,
                  Domain probe_domain);
  /// Constant selection probabilities.
  FiniteIfsKernel(std::vector<AffineMap> maps, std::vector<double> probabilities);

  double sample_theta(double y, Rng& rng) const override;
  double map(double theta, double y) const override {
    return maps_[static_cast<std::size_t>(theta)](y);
  }
  double density(double theta, double y) const override {
    return probabilities_[static_cast<std::size_t>(theta)](y);
  }
  std::vector<ThetaNode> reference_rule() const override;
  std::vector<ThetaNode> discretize(double y, double, double) const override;
  bool finite_parameter_set() const noexcept override { return true; }
  std::string describe() const override;

  std::size_t size() const noexcept { return maps_.size(); }
  const AffineMap& affine_map(std::size_t k) const { return maps_.at(k); }

 private:
  std::vector<AffineMap> maps_;
  std::vector<Probability> probabilities_;
};

/// w_theta(y) for theta drawn from p(. | y).
double sample_jump(const IfsKernel& kernel, double y, Rng& rng);

/// Regime switching probabilities pi_ij(y), rows summing to one.
class SwitchingMatrix {
 public:
  using Entry = std::function<double(double)>;

  /// Single regime; always stays in regime 0.
  SwitchingMatrix();
  /// Rows are validated on a probe grid over `probe_domain`: entries in
  /// [0, 1] and row sums within 1e-9 of one.
  SwitchingMatrix(std::vector<std::vector<Entry>> rows, Domain probe_domain);
  static SwitchingMatrix constant(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return rows_.size(); }
  double operator()(std::size_t i, std::size_t j, double y) const {
    return rows_[i][j](y);
  }
  std::size_t sample(std::size_t i, double y, Rng& rng) const;

 private:
  std::vector<std::vector<Entry>> rows_;
};

std::size_t sample_regime(const SwitchingMatrix& pi, std::size_t i,
                          double y_post, Rng& rng);

/// The post-jump kernel W: an IFS jump from y followed by a regime switch
/// drawn with pi evaluated at the post-jump location.
class PostJumpKernel {
 public:
  PostJumpKernel(std::shared_ptr<const IfsKernel> jump, SwitchingMatrix switching,
                 std::shared_ptr<const Intensity> intensity);

  StatePoint sample(const StatePoint& x, Rng& rng) const {
    const double y_post = sample_jump(*jump_, x.y, rng);
    return {y_post, switching_.sample(x.regime, y_post, rng)};
  }
  /// lambda(y), the weight that turns W into the intensity-weighted kernel.
  double tilde_weight(const StatePoint& x) const { return (*intensity_)(x.y); }

  const IfsKernel& jump() const noexcept { return *jump_; }
  const SwitchingMatrix& switching() const noexcept { return switching_; }
  const Intensity& intensity() const noexcept { return *intensity_; }

 private:
  std::shared_ptr<const IfsKernel> jump_;
  SwitchingMatrix switching_;
  std::shared_ptr<const Intensity> intensity_;
};

StatePoint post_jump_sample(const PostJumpKernel& kernel, const StatePoint& x,
                            Rng& rng);
double w_tilde_weight(const PostJumpKernel& kernel, const StatePoint& x);

}  // namespace pdmp
