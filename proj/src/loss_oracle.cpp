#include "wedgescope/loss_oracle.hpp"

namespace wedge {

QuadraticOracle::QuadraticOracle(ParamVector weights, ParamVector center)
    : weights_(std::move(weights)), center_(std::move(center)) {
  if (weights_.size() != center_.size()) {
    throw DimensionMismatch("QuadraticOracle center", static_cast<std::size_t>(weights_.size()),
                            static_cast<std::size_t>(center_.size()));
  }
}

QuadraticOracle::QuadraticOracle(std::size_t dim)
    : QuadraticOracle(ParamVector::Ones(static_cast<Eigen::Index>(dim)),
                      ParamVector::Zero(static_cast<Eigen::Index>(dim))) {}

double QuadraticOracle::loss(const ParamVector& p) const {
  require_dimension(p, dimension(), "QuadraticOracle::loss");
  return (weights_.array() * (p - center_).array().square()).sum();
}

ParamVector QuadraticOracle::grad(const ParamVector& p) const {
  require_dimension(p, dimension(), "QuadraticOracle::grad");
  return 2.0 * (weights_.array() * (p - center_).array()).matrix();
}

}  // namespace wedge
