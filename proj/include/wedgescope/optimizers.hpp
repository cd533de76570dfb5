#pragma once

#include "wedgescope/common.hpp"
#include "wedgescope/loss_oracle.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace wedge {

enum class OptimizerMethod { gd, momentum, adam };

const char* to_string(OptimizerMethod m);
OptimizerMethod optimizer_method_from_string(const std::string& name);

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::adam;
  double learning_rate = 0.01;
  double momentum_coeff = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  long max_steps = 10000;
  double loss_tolerance = 0.0;
  std::uint64_t seed = 0;
  // Reduce-on-plateau: after `plateau_patience` steps without a 0.1% relative
  // improvement the learning rate is multiplied by `plateau_factor`.
  // 0 keeps the learning rate constant.
  long plateau_patience = 100;
  double plateau_factor = 0.5;

  void validate() const;
};

struct TrajectoryPoint {
  long step;
  double loss;
  double radius;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  ParamVector final_point;
  bool converged = false;

  double initial_loss() const { return points.empty() ? 0.0 : points.front().loss; }
  double final_loss() const { return points.empty() ? 0.0 : points.back().loss; }
  void write_csv(const std::filesystem::path& path) const;  // step,loss,radius
};

/// Keeps iterates inside anchor + (row span of `normals`)^perp. Rows of
/// `normals` must be orthonormal.
class SliceConstraint {
 public:
  SliceConstraint(ParamVector anchor, Matrix normals);

  const ParamVector& anchor() const noexcept { return anchor_; }
  const Matrix& normals() const noexcept { return normals_; }
  /// Removes the components of v along the normals.
  ParamVector project(const ParamVector& v) const;

 private:
  ParamVector anchor_;
  Matrix normals_;
};

/// One optimizer's internal state (moments). `update` returns the displacement
/// to subtract from the iterate.
class OptimizerState {
 public:
  OptimizerState(const OptimizerConfig& cfg, std::size_t dim);
  ParamVector update(const ParamVector& grad, double learning_rate);

 private:
  OptimizerConfig cfg_;
  ParamVector m_;
  ParamVector v_;
  long t_ = 0;
};

/// First-order minimization. Stops when loss <= cfg.loss_tolerance or after
/// cfg.max_steps updates; final_point is the last iterate.
Trajectory minimize(const LossOracle& oracle, const ParamVector& p0, const OptimizerConfig& cfg,
                    const SliceConstraint* constraint = nullptr);

/// Affine subspace P = theta * M + P0 with orthonormal rows in M (d x D).
class Hyperplane {
 public:
  Hyperplane(ParamVector offset, Matrix basis);

  const ParamVector& offset() const noexcept { return offset_; }
  const Matrix& basis() const noexcept { return basis_; }
  int dim() const noexcept { return static_cast<int>(basis_.rows()); }
  int ambient_dim() const noexcept { return static_cast<int>(basis_.cols()); }

  ParamVector embed(const ParamVector& theta) const;

  bool operator==(const Hyperplane& other) const;

 private:
  ParamVector offset_;
  Matrix basis_;
};

/// Modified Gram-Schmidt with a second re-orthogonalization pass.
/// Throws InvalidArgument on (numerically) dependent rows.
Matrix orthonormalize_rows(const Matrix& rows);

/// Basis = orthonormalized rows of a seeded standard-normal d x D matrix.
Hyperplane random_hyperplane(int ambient_dim, int dim, ParamVector offset, std::uint64_t seed);

struct HyperplaneResult {
  ParamVector theta;
  ParamVector point;
  Trajectory trajectory;  // loss and radius measured on the full-space point
};

HyperplaneResult hyperplane_minimize(const LossOracle& oracle, const Hyperplane& plane,
                                     const ParamVector& theta0, const OptimizerConfig& cfg);

/// Cosine cycle from lr_max (step 0 of each cycle) down towards lr_min.
double cyclical_lr(double lr_max, double lr_min, long cycle_len, long step);

struct CyclicalSchedule {
  double lr_max = 0.1;
  double lr_min = 1e-4;
  long cycle_len = 1000;
  int n_cycles = 5;

  void validate() const;
};

/// Runs n_cycles cosine cycles (optimizer moments persist across cycles) and
/// returns the iterate at the end of every cycle. The plateau rule and the
/// loss tolerance of cfg are not used here.
std::vector<ParamVector> snapshot_train(const LossOracle& oracle, const ParamVector& p0,
                                        const OptimizerConfig& cfg,
                                        const CyclicalSchedule& schedule,
                                        Trajectory* trajectory = nullptr);

}  // namespace wedge
