#pragma once

#include "wedgescope/common.hpp"
#include "wedgescope/loss_oracle.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wedge {

/// Axes spanned by one n-wedge, strictly increasing.
struct WedgeId {
  std::vector<int> axes;

  bool operator==(const WedgeId&) const = default;
  std::string to_string() const;  // "0;3;7"
};

/// The toy landscape: union of all axis-aligned n-dimensional coordinate
/// subspaces of R^D, optionally under one global rotation. Loss is the
/// Euclidean distance to the nearest wedge; nothing is materialized, every
/// query is a selection over |components|.
///
/// Selection order: larger magnitude first, lower axis index first on ties.
/// The first n axes in that order are kept (span the nearest wedge), the
/// remaining s = D - n are dropped.
class WedgeLandscape {
 public:
  WedgeLandscape(int dim, int wedge_dim);
  WedgeLandscape(int dim, int wedge_dim, Matrix rotation);

  /// Rotation = Q from the QR factorization of a seeded standard-normal D x D
  /// matrix (signs fixed so that diag(R) > 0).
  static WedgeLandscape with_rotation_seed(int dim, int wedge_dim, std::uint64_t seed);

  int dim() const noexcept { return dim_; }
  int wedge_dim() const noexcept { return wedge_dim_; }
  int short_dim() const noexcept { return dim_ - wedge_dim_; }
  bool rotated() const noexcept { return rotation_.has_value(); }
  const std::optional<Matrix>& rotation() const noexcept { return rotation_; }
  const std::optional<std::uint64_t>& rotation_seed() const noexcept { return rotation_seed_; }

  double surrogate_loss(const ParamVector& p) const;
  ParamVector surrogate_grad(const ParamVector& p) const;
  double loss_and_grad(const ParamVector& p, ParamVector& grad) const;
  WedgeId nearest_wedge(const ParamVector& p) const;

  /// Size of the union of dropped-axis sets over every wedge whose distance to
  /// p is <= tol, floored at s. Interior points of a single wedge give s.
  std::size_t exact_short_count(const ParamVector& p, double tol) const;

  /// Coordinates in the wedge-aligned frame (R^T p), or p itself unrotated.
  ParamVector to_frame(const ParamVector& p) const;
  ParamVector from_frame(const ParamVector& q) const;

 private:
  void check_point(const ParamVector& p) const;
  // Partitions axis indices so that the first n are the kept ones.
  std::vector<int> partition_axes(const ParamVector& q) const;

  int dim_;
  int wedge_dim_;
  std::optional<Matrix> rotation_;
  std::optional<std::uint64_t> rotation_seed_;
};

class ToyOracle final : public LossOracle {
 public:
  explicit ToyOracle(WedgeLandscape landscape) : landscape_(std::move(landscape)) {}

  std::size_t dimension() const override { return static_cast<std::size_t>(landscape_.dim()); }
  double loss(const ParamVector& p) const override { return landscape_.surrogate_loss(p); }
  ParamVector grad(const ParamVector& p) const override { return landscape_.surrogate_grad(p); }
  double loss_and_grad(const ParamVector& p, ParamVector& grad) const override {
    return landscape_.loss_and_grad(p, grad);
  }
  const WedgeLandscape* toy() const override { return &landscape_; }

  const WedgeLandscape& landscape() const noexcept { return landscape_; }

 private:
  WedgeLandscape landscape_;
};

}  // namespace wedge
