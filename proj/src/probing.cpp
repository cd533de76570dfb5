#include "wedgescope/probing.hpp"

#include "wedgescope/csv.hpp"
#include "wedgescope/parallel.hpp"
#include "wedgescope/random.hpp"
#include "wedgescope/wedge_landscape.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace wedge {

const char* to_string(ShortDirectionMethod m) {
  return m == ShortDirectionMethod::exact_toy ? "exact_toy" : "hessian_fd";
}

ShortDirectionMethod short_direction_method_from_string(const std::string& name) {
  if (name == "exact_toy") return ShortDirectionMethod::exact_toy;
  if (name == "hessian_fd") return ShortDirectionMethod::hessian_fd;
  throw InvalidArgument("unknown short-direction method '" + name + "'");
}

void ShortDirectionReport::write_eigenvalues(const std::filesystem::path& path) const {
  if (!eigenvalues) throw InvalidArgument("no eigenvalues to export (method exact_toy)");
  std::string text;
  for (double v : *eigenvalues) {
    text += format_number(v);
    text += '\n';
  }
  write_text_file(path, text);
}

namespace {

// Gradient of the function whose Hessian we count: 1/2 L^2 on the toy, L otherwise.
ParamVector curvature_grad(const LossOracle& oracle, const ParamVector& p) {
  ParamVector g;
  const double l = oracle.loss_and_grad(p, g);
  if (oracle.toy()) g *= l;
  return g;
}

}  // namespace

Matrix fd_hessian(const LossOracle& oracle, const ParamVector& p, double h, int jobs) {
  if (!(h > 0.0)) throw InvalidArgument("fd step must be positive");
  const auto dim = static_cast<Eigen::Index>(oracle.dimension());
  require_dimension(p, oracle.dimension(), "fd_hessian");
  Matrix hess(dim, dim);
  parallel_for(static_cast<std::size_t>(dim), jobs, [&](std::size_t jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    ParamVector plus = p;
    ParamVector minus = p;
    plus[j] += h;
    minus[j] -= h;
    const ParamVector col = (curvature_grad(oracle, plus) - curvature_grad(oracle, minus)) / (2.0 * h);
    if (!all_finite(col)) throw NumericalError("non-finite gradient in fd Hessian", static_cast<long>(j));
    hess.col(j) = col;
  });
  return hess;
}

ShortDirectionReport short_direction_count(const LossOracle& oracle, const ParamVector& p,
                                           double kappa, ShortDirectionMethod method,
                                           const ShortDirectionOptions& options) {
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  require_dimension(p, oracle.dimension(), "short_direction_count");
  require_finite(p, "short_direction_count");
  ShortDirectionReport r;
  r.threshold = kappa;
  r.method = method;
  if (method == ShortDirectionMethod::exact_toy) {
    const WedgeLandscape* toy = oracle.toy();
    if (!toy) throw InvalidArgument("method exact_toy needs the toy landscape oracle");
    r.count = toy->exact_short_count(p, options.toy_tolerance);
    return r;
  }
  if (oracle.dimension() > options.max_dim) {
    throw InvalidArgument("hessian_fd: D = " + std::to_string(oracle.dimension()) +
                          " exceeds the cap " + std::to_string(options.max_dim));
  }
  const Matrix hess = fd_hessian(oracle, p, options.fd_step, options.jobs);
  const double norm = hess.norm();
  r.asymmetry = norm > 0.0 ? (hess - hess.transpose()).norm() / norm : 0.0;
  const Matrix sym = 0.5 * (hess + hess.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
  std::vector<double> ev(solver.eigenvalues().data(),
                         solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), std::greater<>());
  r.count = static_cast<std::size_t>(
      std::count_if(ev.begin(), ev.end(), [kappa](double v) { return v > kappa; }));
  r.eigenvalues = std::move(ev);
  return r;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::size_t TunnelWidthReport::censored_count() const {
  return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), true));
}

void TunnelWidthReport::write_csv(const std::filesystem::path& path) const {
  CsvWriter csv(path, {"direction_index", "distance", "angular", "censored"});
  for (std::size_t i = 0; i < distances.size(); ++i) {
    csv.cell(i).cell(distances[i]).cell(angular[i]).cell(static_cast<bool>(censored[i]));
    csv.end_row();
  }
}

TunnelWidthReport radial_tunnel_width(const LossOracle& oracle, const ParamVector& center,
                                      double loss_threshold, int k, double r_max,
                                      std::uint64_t seed, int jobs) {
  require_dimension(center, oracle.dimension(), "radial_tunnel_width");
  require_finite(center, "radial_tunnel_width center");
  if (k < 1) throw InvalidArgument("K must be >= 1");
  if (!(r_max > 0.0)) throw InvalidArgument("r_max must be positive");
  const double l0 = oracle.loss(center);
  if (!(l0 < loss_threshold)) {
    throw InvalidArgument("center not in a low-loss region: loss " + format_number(l0) +
                          " >= threshold " + format_number(loss_threshold));
  }

  TunnelWidthReport r;
  r.center = center;
  r.loss_threshold = loss_threshold;
  r.r_max = r_max;
  const auto count = static_cast<std::size_t>(k);
  r.distances.resize(count);
  std::vector<char> censored(count, 0);

  parallel_for(count, jobs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, "direction", i));
    const ParamVector v = random_unit_vector(rng, oracle.dimension());
    auto above = [&](double t) {
      const double l = oracle.loss(center + t * v);
      if (!std::isfinite(l)) throw NumericalError("non-finite loss while probing", static_cast<long>(i));
      return l > loss_threshold;
    };
    double lo = 0.0;
    double hi = r_max / 1024.0;
    while (!above(hi)) {
      lo = hi;
      if (hi >= r_max) {
        r.distances[i] = r_max;
        censored[i] = 1;
        return;
      }
      hi = std::min(2.0 * hi, r_max);
    }
    const double tol = 1e-4 * r_max;
    while (hi - lo >= tol) {
      const double mid = 0.5 * (lo + hi);
      if (above(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    r.distances[i] = 0.5 * (lo + hi);
  });

  r.censored.assign(censored.begin(), censored.end());
  const double cnorm = center.norm();
  r.angular.reserve(count);
  for (double d : r.distances) {
    r.angular.push_back(cnorm > 0.0 ? std::atan(d / cnorm) : 0.5 * M_PI);
  }
  const double n = static_cast<double>(count);
  r.mean = std::accumulate(r.distances.begin(), r.distances.end(), 0.0) / n;
  double ss = 0.0;
  double sum_unc = 0.0;
  std::size_t n_unc = 0;
  for (std::size_t i = 0; i < count; ++i) {
    ss += (r.distances[i] - r.mean) * (r.distances[i] - r.mean);
    if (!censored[i]) {
      sum_unc += r.distances[i];
      ++n_unc;
    }
  }
  r.stddev = std::sqrt(ss / n);
  r.mean_uncensored = n_unc ? sum_unc / static_cast<double>(n_unc)
                            : std::numeric_limits<double>::quiet_NaN();
  r.median = percentile(r.distances, 0.5);
  r.p10 = percentile(r.distances, 0.1);
  r.p90 = percentile(r.distances, 0.9);
  return r;
}

std::vector<double> loss_profile(const LossOracle& oracle, const ParamVector& p,
                                 const ParamVector& v, const std::vector<double>& radii) {
  require_dimension(p, oracle.dimension(), "loss_profile point");
  require_dimension(v, oracle.dimension(), "loss_profile direction");
  const double vn = v.norm();
  if (!(vn > 0.0)) throw InvalidArgument("loss_profile direction must be nonzero");
  const ParamVector u = v / vn;
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) out.push_back(r == 0.0 ? oracle.loss(p) : oracle.loss(p + r * u));
  return out;
}

}  // namespace wedge
