#pragma once

#include "wedgescope/common.hpp"

namespace wedge {

class WedgeLandscape;

/// Differentiable loss over R^D. Implementations must be safe to call
/// concurrently from several threads (all const methods, no hidden caches).
class LossOracle {
 public:
  virtual ~LossOracle() = default;

  virtual std::size_t dimension() const = 0;
  virtual double loss(const ParamVector& p) const = 0;
  virtual ParamVector grad(const ParamVector& p) const = 0;

  /// Fused evaluation; overridden where loss and gradient share work.
  virtual double loss_and_grad(const ParamVector& p, ParamVector& grad) const {
    grad = this->grad(p);
    return loss(p);
  }

  /// Non-null when the oracle is the exact toy landscape.
  virtual const WedgeLandscape* toy() const { return nullptr; }
};

/// f(x) = sum_i w_i (x_i - c_i)^2. Separable bowl used for checks and demos.
class QuadraticOracle final : public LossOracle {
 public:
  QuadraticOracle(ParamVector weights, ParamVector center);
  explicit QuadraticOracle(std::size_t dim);  // ||x||^2

  std::size_t dimension() const override { return static_cast<std::size_t>(weights_.size()); }
  double loss(const ParamVector& p) const override;
  ParamVector grad(const ParamVector& p) const override;

 private:
  ParamVector weights_;
  ParamVector center_;
};

}  // namespace wedge
