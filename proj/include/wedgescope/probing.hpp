#pragma once

#include "wedgescope/common.hpp"
#include "wedgescope/loss_oracle.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wedge {

enum class ShortDirectionMethod { exact_toy, hessian_fd };

const char* to_string(ShortDirectionMethod m);
ShortDirectionMethod short_direction_method_from_string(const std::string& name);

struct ShortDirectionOptions {
  double fd_step = 1e-4;
  double toy_tolerance = 1e-6;  // exact_toy: |component| <= tol counts as zero
  std::size_t max_dim = 2000;
  int jobs = 1;
};

struct ShortDirectionReport {
  std::size_t count = 0;
  double threshold = 0.5;
  ShortDirectionMethod method = ShortDirectionMethod::exact_toy;
  std::optional<std::vector<double>> eigenvalues;  // descending, hessian_fd only
  double asymmetry = 0.0;  // ||H - H^T||_F / ||H||_F before symmetrization

  /// One eigenvalue per line, descending. Throws if there are none.
  void write_eigenvalues(const std::filesystem::path& path) const;
};

/// Central-difference Hessian built from gradient differences (not yet
/// symmetrized). On the toy oracle the function differentiated is 1/2 L^2.
Matrix fd_hessian(const LossOracle& oracle, const ParamVector& p, double h, int jobs = 1);

ShortDirectionReport short_direction_count(const LossOracle& oracle, const ParamVector& p,
                                           double kappa, ShortDirectionMethod method,
                                           const ShortDirectionOptions& options = {});

struct TunnelWidthReport {
  ParamVector center;
  double loss_threshold = 0.0;
  double r_max = 0.0;
  std::vector<double> distances;
  std::vector<bool> censored;
  std::vector<double> angular;  // atan(distance / ||center||)
  double mean = 0.0;
  double mean_uncensored = 0.0;  // NaN when every direction is censored
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  double stddev = 0.0;

  double relative_std() const { return mean > 0.0 ? stddev / mean : 0.0; }
  std::size_t censored_count() const;

  void write_csv(const std::filesystem::path& path) const;  // direction_index,distance,angular,censored
};

/// Bracket geometrically from r_max/1024, then bisect to 1e-4 r_max. Reports the
/// first threshold crossing along each of K seeded random directions.
TunnelWidthReport radial_tunnel_width(const LossOracle& oracle, const ParamVector& center,
                                      double loss_threshold, int k, double r_max,
                                      std::uint64_t seed, int jobs = 1);

std::vector<double> loss_profile(const LossOracle& oracle, const ParamVector& p,
                                 const ParamVector& v, const std::vector<double>& radii);

/// Linear-interpolated percentile of an unsorted sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

}  // namespace wedge
