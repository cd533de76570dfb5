#include "wedgescope/optimizers.hpp"

#include "wedgescope/csv.hpp"
#include "wedgescope/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace wedge {

const char* to_string(OptimizerMethod m) {
  switch (m) {
    case OptimizerMethod::gd: return "gd";
    case OptimizerMethod::momentum: return "momentum";
    case OptimizerMethod::adam: return "adam";
  }
  return "?";
}

OptimizerMethod optimizer_method_from_string(const std::string& name) {
  if (name == "gd" || name == "sgd") return OptimizerMethod::gd;
  if (name == "momentum") return OptimizerMethod::momentum;
  if (name == "adam") return OptimizerMethod::adam;
  throw InvalidArgument("unknown optimizer method '" + name + "'");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw InvalidArgument("learning_rate must be finite and >= 0");
  if (!(momentum_coeff >= 0.0 && momentum_coeff < 1.0))
    throw InvalidArgument("momentum_coeff must lie in [0, 1)");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw InvalidArgument("adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw InvalidArgument("adam_eps must be > 0");
  if (max_steps < 0) throw InvalidArgument("max_steps must be >= 0");
  if (!(loss_tolerance >= 0.0)) throw InvalidArgument("loss_tolerance must be >= 0");
  if (plateau_patience < 0) throw InvalidArgument("plateau_patience must be >= 0");
  if (!(plateau_factor > 0.0 && plateau_factor <= 1.0))
    throw InvalidArgument("plateau_factor must lie in (0, 1]");
}

void Trajectory::write_csv(const std::filesystem::path& path) const {
  CsvWriter csv(path, {"step", "loss", "radius"});
  for (const auto& pt : points) {
    csv.cell(static_cast<long long>(pt.step)).cell(pt.loss).cell(pt.radius);
    csv.end_row();
  }
}

SliceConstraint::SliceConstraint(ParamVector anchor, Matrix normals)
    : anchor_(std::move(anchor)), normals_(std::move(normals)) {
  if (normals_.cols() != anchor_.size()) {
    throw DimensionMismatch("slice normals", static_cast<std::size_t>(anchor_.size()),
                            static_cast<std::size_t>(normals_.cols()));
  }
}

ParamVector SliceConstraint::project(const ParamVector& v) const {
  if (normals_.rows() == 0) return v;
  return v - normals_.transpose() * (normals_ * v);
}

OptimizerState::OptimizerState(const OptimizerConfig& cfg, std::size_t dim)
    : cfg_(cfg),
      m_(ParamVector::Zero(static_cast<Eigen::Index>(dim))),
      v_(ParamVector::Zero(static_cast<Eigen::Index>(dim))) {}

ParamVector OptimizerState::update(const ParamVector& grad, double learning_rate) {
  ++t_;
  switch (cfg_.method) {
    case OptimizerMethod::gd:
      return learning_rate * grad;
    case OptimizerMethod::momentum:
      m_ = cfg_.momentum_coeff * m_ + grad;
      return learning_rate * m_;
    case OptimizerMethod::adam: {
      const double b1 = cfg_.adam_beta1;
      const double b2 = cfg_.adam_beta2;
      m_ = b1 * m_ + (1.0 - b1) * grad;
      v_ = b2 * v_ + (1.0 - b2) * grad.cwiseProduct(grad);
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
      return (learning_rate * (m_.array() / c1) /
              ((v_.array() / c2).sqrt() + cfg_.adam_eps))
          .matrix();
    }
  }
  return ParamVector::Zero(grad.size());
}

namespace {

template <class RadiusFn>
Trajectory run_minimize(const LossOracle& oracle, const ParamVector& p0,
                        const OptimizerConfig& cfg, const SliceConstraint* constraint,
                        RadiusFn radius_of) {
  cfg.validate();
  require_dimension(p0, oracle.dimension(), "minimize: p0");
  require_finite(p0, "minimize: p0");

  Trajectory traj;
  ParamVector p = p0;
  ParamVector g;
  OptimizerState state(cfg, oracle.dimension());
  double lr = cfg.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  long since_best = 0;

  for (long step = 0;; ++step) {
    const double loss = oracle.loss_and_grad(p, g);
    if (!std::isfinite(loss)) throw NumericalError("non-finite loss at step " + std::to_string(step), step);
    if (!g.allFinite()) throw NumericalError("non-finite gradient at step " + std::to_string(step), step);
    traj.points.push_back({step, loss, radius_of(p)});
    if (loss <= cfg.loss_tolerance || step >= cfg.max_steps) break;

    if (cfg.plateau_patience > 0) {
      if (loss < best * (1.0 - 1e-3)) {
        best = loss;
        since_best = 0;
      } else if (++since_best >= cfg.plateau_patience) {
        lr *= cfg.plateau_factor;
        since_best = 0;
        best = loss;
      }
    }

    // Adam rescales per coordinate, so both the gradient and the final
    // displacement are projected onto the slice.
    if (constraint) g = constraint->project(g);
    ParamVector delta = state.update(g, lr);
    if (constraint) delta = constraint->project(delta);
    p -= delta;
  }
  traj.converged = traj.final_loss() <= cfg.loss_tolerance;
  traj.final_point = std::move(p);
  return traj;
}

// Loss over hyperplane coordinates theta.
class SubspaceOracle final : public LossOracle {
 public:
  SubspaceOracle(const LossOracle& inner, const Hyperplane& plane) : inner_(inner), plane_(plane) {}
  std::size_t dimension() const override { return static_cast<std::size_t>(plane_.dim()); }
  double loss(const ParamVector& theta) const override { return inner_.loss(plane_.embed(theta)); }
  ParamVector grad(const ParamVector& theta) const override {
    return plane_.basis() * inner_.grad(plane_.embed(theta));
  }
  double loss_and_grad(const ParamVector& theta, ParamVector& grad) const override {
    ParamVector full;
    const double l = inner_.loss_and_grad(plane_.embed(theta), full);
    grad = plane_.basis() * full;
    return l;
  }

 private:
  const LossOracle& inner_;
  const Hyperplane& plane_;
};

}  // namespace

Trajectory minimize(const LossOracle& oracle, const ParamVector& p0, const OptimizerConfig& cfg,
                    const SliceConstraint* constraint) {
  if (constraint) require_dimension(constraint->anchor(), oracle.dimension(), "minimize: slice");
  return run_minimize(oracle, p0, cfg, constraint, [](const ParamVector& p) { return p.norm(); });
}

Hyperplane::Hyperplane(ParamVector offset, Matrix basis)
    : offset_(std::move(offset)), basis_(std::move(basis)) {
  if (basis_.rows() < 1 || basis_.rows() > basis_.cols())
    throw InvalidArgument("hyperplane basis must have 1 <= d <= D rows");
  if (basis_.cols() != offset_.size())
    throw DimensionMismatch("hyperplane offset", static_cast<std::size_t>(basis_.cols()),
                            static_cast<std::size_t>(offset_.size()));
  const auto d = basis_.rows();
  const double defect =
      (basis_ * basis_.transpose() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (!(defect <= 1e-10)) throw InvalidArgument("hyperplane basis rows are not orthonormal");
}

ParamVector Hyperplane::embed(const ParamVector& theta) const {
  require_dimension(theta, static_cast<std::size_t>(dim()), "hyperplane theta");
  return basis_.transpose() * theta + offset_;
}

bool Hyperplane::operator==(const Hyperplane& other) const {
  return offset_.size() == other.offset_.size() && basis_.rows() == other.basis_.rows() &&
         basis_.cols() == other.basis_.cols() && offset_ == other.offset_ &&
         basis_ == other.basis_;
}

Matrix orthonormalize_rows(const Matrix& rows) {
  Matrix q = rows;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const double original = q.row(i).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < i; ++j) {
        q.row(i) -= q.row(i).dot(q.row(j)) * q.row(j);
      }
    }
    const double norm = q.row(i).norm();
    if (!(norm > 1e-10 * std::max(original, 1e-300))) {
      throw InvalidArgument("rows are linearly dependent (row " + std::to_string(i) + ")");
    }
    q.row(i) /= norm;
  }
  return q;
}

Hyperplane random_hyperplane(int ambient_dim, int dim, ParamVector offset, std::uint64_t seed) {
  if (dim < 1 || dim > ambient_dim)
    throw InvalidArgument("random_hyperplane requires 1 <= d <= D (d=" + std::to_string(dim) +
                          ", D=" + std::to_string(ambient_dim) + ")");
  require_dimension(offset, static_cast<std::size_t>(ambient_dim), "random_hyperplane offset");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix gauss(dim, ambient_dim);
  for (Eigen::Index i = 0; i < gauss.rows(); ++i)
    for (Eigen::Index j = 0; j < gauss.cols(); ++j) gauss(i, j) = normal(rng);
  return Hyperplane(std::move(offset), orthonormalize_rows(gauss));
}

HyperplaneResult hyperplane_minimize(const LossOracle& oracle, const Hyperplane& plane,
                                     const ParamVector& theta0, const OptimizerConfig& cfg) {
  require_dimension(plane.offset(), oracle.dimension(), "hyperplane_minimize: plane");
  require_dimension(theta0, static_cast<std::size_t>(plane.dim()), "hyperplane_minimize: theta0");
  SubspaceOracle sub(oracle, plane);
  HyperplaneResult out;
  out.trajectory = run_minimize(sub, theta0, cfg, nullptr,
                                [&plane](const ParamVector& th) { return plane.embed(th).norm(); });
  out.theta = out.trajectory.final_point;
  out.point = plane.embed(out.theta);
  out.trajectory.final_point = out.point;
  return out;
}

double cyclical_lr(double lr_max, double lr_min, long cycle_len, long step) {
  if (cycle_len <= 0) throw InvalidArgument("cycle_len must be positive");
  if (step < 0) throw InvalidArgument("step must be >= 0");
  if (lr_min > lr_max) throw InvalidArgument("lr_min must not exceed lr_max");
  const double phase = static_cast<double>(step % cycle_len) / static_cast<double>(cycle_len);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * phase));
}

void CyclicalSchedule::validate() const {
  if (!(lr_max > 0.0)) throw InvalidArgument("lr_max must be > 0");
  if (!(lr_min >= 0.0) || lr_min > lr_max)
    throw InvalidArgument("lr_min must lie in [0, lr_max]");
  if (cycle_len <= 0) throw InvalidArgument("cycle_len must be positive");
  if (n_cycles < 1) throw InvalidArgument("n_cycles must be >= 1");
}

std::vector<ParamVector> snapshot_train(const LossOracle& oracle, const ParamVector& p0,
                                        const OptimizerConfig& cfg,
                                        const CyclicalSchedule& schedule,
                                        Trajectory* trajectory) {
  cfg.validate();
  schedule.validate();
  require_dimension(p0, oracle.dimension(), "snapshot_train: p0");
  require_finite(p0, "snapshot_train: p0");

  ParamVector p = p0;
  ParamVector g;
  OptimizerState state(cfg, oracle.dimension());
  std::vector<ParamVector> snapshots;
  snapshots.reserve(static_cast<std::size_t>(schedule.n_cycles));
  long global = 0;
  for (int cycle = 0; cycle < schedule.n_cycles; ++cycle) {
    for (long k = 0; k < schedule.cycle_len; ++k, ++global) {
      const double loss = oracle.loss_and_grad(p, g);
      if (!std::isfinite(loss) || !g.allFinite())
        throw NumericalError("non-finite loss or gradient at step " + std::to_string(global), global);
      if (trajectory) trajectory->points.push_back({global, loss, p.norm()});
      p -= state.update(g, cyclical_lr(schedule.lr_max, schedule.lr_min, schedule.cycle_len, k));
    }
    if (!p.allFinite()) throw NumericalError("iterate diverged in cycle " + std::to_string(cycle), global);
    snapshots.push_back(p);
  }
  if (trajectory) {
    const double loss = oracle.loss(p);
    trajectory->points.push_back({global, loss, p.norm()});
    trajectory->final_point = p;
    trajectory->converged = loss <= cfg.loss_tolerance;
  }
  return snapshots;
}

}  // namespace wedge
