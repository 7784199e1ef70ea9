#include "pdmp/model.hpp"

#include <stdexcept>

namespace pdmp {

ModelSpec::ModelSpec(ModelParts parts)
    : name_(std::move(parts.name)),
      domain_(parts.domain),
      flow_(std::move(parts.flow)),
      intensity_(std::move(parts.intensity)),
      jump_(std::move(parts.jump)),
      hazard_(flow_, intensity_, std::move(parts.closed_form_hazard)),
      post_jump_(jump_, std::move(parts.switching), intensity_),
      declared_(std::move(parts.declared)),
      probe_upper_(parts.probe_upper),
      designated_failure_(std::move(parts.designated_failure)) {
  if (post_jump_.switching().size() != flow_->regimes()) {
    throw std::invalid_argument(
        "ModelSpec: switching matrix size differs from the number of semiflows");
  }
  if (domain_.bounded()) probe_upper_ = domain_.upper;
}

}  // namespace pdmp
