#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "pdmp/dynamics.hpp"
#include "pdmp/hazard.hpp"
#include "pdmp/jump_kernel.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

/// Analytic constants a model declares about itself. The diagnostics compare
/// sampled estimates against these.
struct DeclaredConstants {
  // Flow envelope rho(S_i(t,u), S_i(t,v)) <= L e^{alpha t} rho(u,v).
  double L = 1.0;
  double alpha = 0.0;
  // IFS: contraction on average, density Lipschitz constant, overlap mass.
  double L_w = 1.0;
  double L_p = 0.0;
  double delta_p = 1.0;
  // Switching: Lipschitz constant and overlap lower bound.
  double L_pi = 0.0;
  double delta_pi = 1.0;
  double L_lambda = 0.0;
  double y_star = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  // Regime-split bound rho(S_i(t,y), S_j(t,y)) <= phi(t) * ell(y).
  std::function<double(double)> phi = [](double) { return 1.0; };
  std::function<double(double)> ell = [](double) { return 1.0; };
};

struct ModelParts {
  std::string name;
  Domain domain;
  std::shared_ptr<const Semiflow> flow;
  std::shared_ptr<const Intensity> intensity;
  std::shared_ptr<const IfsKernel> jump;
  SwitchingMatrix switching;
  std::optional<HazardAntiderivative> closed_form_hazard;
  DeclaredConstants declared;
  /// Upper edge of the window used for probing when Y is unbounded.
  double probe_upper = 15.0;
  /// Empty for models expected to pass every check; otherwise the id of the
  /// single assumption check this model is built to fail.
  std::string designated_failure;
};

/// Immutable bundle of semiflows, intensity, switching matrix and IFS jump
/// kernel, together with the derived hazard and post-jump kernel.
class ModelSpec {
 public:
  explicit ModelSpec(ModelParts parts);

  const std::string& name() const noexcept { return name_; }
  const Domain& domain() const noexcept { return domain_; }
  const Semiflow& flow() const noexcept { return *flow_; }
  const Intensity& intensity() const noexcept { return *intensity_; }
  const IfsKernel& jump() const noexcept { return *jump_; }
  const SwitchingMatrix& switching() const noexcept { return post_jump_.switching(); }
  const CumulativeHazard& hazard() const noexcept { return hazard_; }
  const PostJumpKernel& post_jump() const noexcept { return post_jump_; }
  const DeclaredConstants& declared() const noexcept { return declared_; }
  std::shared_ptr<const Semiflow> flow_ptr() const noexcept { return flow_; }

  std::size_t regimes() const noexcept { return flow_->regimes(); }
  double lambda_lower() const noexcept { return intensity_->lower(); }
  double lambda_upper() const noexcept { return intensity_->upper(); }
  double probe_upper() const noexcept { return probe_upper_; }
  const std::string& designated_failure() const noexcept { return designated_failure_; }
  bool negative_control() const noexcept { return !designated_failure_.empty(); }

 private:
  std::string name_;
  Domain domain_;
  std::shared_ptr<const Semiflow> flow_;
  std::shared_ptr<const Intensity> intensity_;
  std::shared_ptr<const IfsKernel> jump_;
  CumulativeHazard hazard_;
  PostJumpKernel post_jump_;
  DeclaredConstants declared_;
  double probe_upper_;
  std::string designated_failure_;
};

}  // namespace pdmp
