#include "wedgescope/wedge_landscape.hpp"

#include "wedgescope/random.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wedge {

std::string WedgeId::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(axes[i]);
  }
  return out;
}

WedgeLandscape::WedgeLandscape(int dim, int wedge_dim) : dim_(dim), wedge_dim_(wedge_dim) {
  if (dim <= 0 || wedge_dim <= 0 || wedge_dim >= dim) {
    throw InvalidArgument("wedge landscape requires 0 < n < D (got D=" + std::to_string(dim) +
                          ", n=" + std::to_string(wedge_dim) + ")");
  }
}

WedgeLandscape::WedgeLandscape(int dim, int wedge_dim, Matrix rotation)
    : WedgeLandscape(dim, wedge_dim) {
  if (rotation.rows() != dim || rotation.cols() != dim) {
    throw DimensionMismatch("rotation must be D x D");
  }
  const double defect =
      (rotation * rotation.transpose() - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (!(defect <= 1e-10)) {
    throw InvalidArgument("rotation is not orthogonal (max |RR^T - I| = " +
                          std::to_string(defect) + ")");
  }
  rotation_ = std::move(rotation);
}

WedgeLandscape WedgeLandscape::with_rotation_seed(int dim, int wedge_dim, std::uint64_t seed) {
  if (dim <= 0) throw InvalidArgument("rotation requires D > 0");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix gauss(dim, dim);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < gauss.cols(); ++j)
    for (Eigen::Index i = 0; i < gauss.rows(); ++i) gauss(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(gauss);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  WedgeLandscape out(dim, wedge_dim, std::move(q));
  out.rotation_seed_ = seed;
  return out;
}

void WedgeLandscape::check_point(const ParamVector& p) const {
  require_dimension(p, static_cast<std::size_t>(dim_), "wedge landscape");
  require_finite(p, "wedge landscape");
}

ParamVector WedgeLandscape::to_frame(const ParamVector& p) const {
  if (!rotation_) return p;
  return rotation_->transpose() * p;
}

ParamVector WedgeLandscape::from_frame(const ParamVector& q) const {
  if (!rotation_) return q;
  return *rotation_ * q;
}

std::vector<int> WedgeLandscape::partition_axes(const ParamVector& q) const {
  std::vector<int> order(static_cast<std::size_t>(dim_));
  std::iota(order.begin(), order.end(), 0);
  auto kept_before = [&q](int a, int b) {
    const double ma = std::abs(q[a]);
    const double mb = std::abs(q[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  };
  std::nth_element(order.begin(), order.begin() + wedge_dim_, order.end(), kept_before);
  return order;
}

double WedgeLandscape::surrogate_loss(const ParamVector& p) const {
  check_point(p);
  const ParamVector q = to_frame(p);
  const auto order = partition_axes(q);
  double sum = 0.0;
  for (int k = wedge_dim_; k < dim_; ++k) sum += q[order[k]] * q[order[k]];
  return std::sqrt(sum);
}

double WedgeLandscape::loss_and_grad(const ParamVector& p, ParamVector& grad) const {
  check_point(p);
  const ParamVector q = to_frame(p);
  const auto order = partition_axes(q);
  double sum = 0.0;
  for (int k = wedge_dim_; k < dim_; ++k) sum += q[order[k]] * q[order[k]];
  const double loss = std::sqrt(sum);
  ParamVector gq = ParamVector::Zero(dim_);
  if (loss > 0.0) {
    for (int k = wedge_dim_; k < dim_; ++k) gq[order[k]] = q[order[k]] / loss;
  }
  grad = from_frame(gq);
  return loss;
}

ParamVector WedgeLandscape::surrogate_grad(const ParamVector& p) const {
  ParamVector g;
  loss_and_grad(p, g);
  return g;
}

WedgeId WedgeLandscape::nearest_wedge(const ParamVector& p) const {
  check_point(p);
  const auto order = partition_axes(to_frame(p));
  WedgeId id;
  id.axes.assign(order.begin(), order.begin() + wedge_dim_);
  std::sort(id.axes.begin(), id.axes.end());
  return id;
}

std::size_t WedgeLandscape::exact_short_count(const ParamVector& p, double tol) const {
  check_point(p);
  if (!(tol >= 0.0)) throw InvalidArgument("exact_short_count: tol must be >= 0");
  const ParamVector q = to_frame(p);
  const int s = short_dim();
  std::vector<double> sq(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) sq[i] = q[i] * q[i];
  std::vector<int> ascending(static_cast<std::size_t>(dim_));
  std::iota(ascending.begin(), ascending.end(), 0);
  std::stable_sort(ascending.begin(), ascending.end(),
                   [&sq](int a, int b) { return sq[a] < sq[b]; });
  // Cheapest wedge whose dropped set contains axis i: either the s smallest
  // (if i is among them) or i together with the s-1 smallest others.
  double smallest_s = 0.0;
  for (int k = 0; k < s; ++k) smallest_s += sq[ascending[k]];
  const double smallest_s_minus_1 = smallest_s - sq[ascending[s - 1]];
  const double tol2 = tol * tol;
  std::size_t count = 0;
  for (int rank = 0; rank < dim_; ++rank) {
    const double cost =
        rank < s ? smallest_s : sq[ascending[rank]] + smallest_s_minus_1;
    if (cost <= tol2) ++count;
  }
  return std::max<std::size_t>(count, static_cast<std::size_t>(s));
}

}  // namespace wedge
