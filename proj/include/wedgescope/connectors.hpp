#pragma once

#include "wedgescope/common.hpp"
#include "wedgescope/loss_oracle.hpp"
#include "wedgescope/optimizers.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace wedge {

/// Low-loss path (m = 1) or surface (m > 1) through the optima.
struct Connector {
  int m = 1;
  std::vector<ParamVector> endpoints;           // the m + 1 optima, never modified
  std::vector<ParamVector> starts;              // grid points before optimization
  std::vector<ParamVector> waypoints;           // optimized points
  std::vector<std::vector<double>> barycentric; // weights over the endpoints, per waypoint
  std::vector<double> start_losses;
  std::vector<double> losses;
  std::vector<bool> converged;                  // inner optimizer status (vertices: true)
  std::optional<double> subsegment_max_loss;    // tunnels only, when audited

  std::size_t size() const noexcept { return waypoints.size(); }
  double max_loss() const;
  double endpoint_max_loss() const;
  /// Position of waypoint i along the path: weight of the last endpoint for
  /// tunnels, 1 - weight of the first endpoint for m > 1.
  double position(std::size_t i) const;

  /// index,t,loss,deviation_norm (plus b0..bm barycentric columns when m > 1)
  void write_csv(const std::filesystem::path& path) const;
};

struct BarrierReport {
  double max_loss = 0.0;
  double endpoint_max = 0.0;
  double barrier_height = 0.0;
  double argmax_fraction = 0.0;
  std::size_t argmax_index = 0;
  std::vector<double> losses;
};

/// waypoint i = a + (i / (k - 1)) (b - a), endpoints exact.
std::vector<ParamVector> linear_interpolate(const ParamVector& a, const ParamVector& b, int k);

BarrierReport barrier_profile(const LossOracle& oracle, const std::vector<ParamVector>& waypoints);

struct ConnectorOptions {
  int jobs = 1;
  /// Extra evaluation points per straight sub-segment between consecutive
  /// optimized waypoints (tunnels only). 0 disables the audit.
  int subsegment_samples = 0;
};

/// Segments = number of straight pieces; the path has segments + 1 waypoints
/// and segments - 1 interior points, each optimized inside the hyperplane
/// through it normal to (b - a).
Connector build_tunnel(const LossOracle& oracle, const ParamVector& a, const ParamVector& b,
                       int segments, const OptimizerConfig& inner_cfg,
                       const ConnectorOptions& options = {});

/// Barycentric grid over the hull of m + 1 optima; every non-vertex grid point
/// is optimized inside the (D - m)-dimensional slice orthogonal to the hull.
Connector build_m_connector(const LossOracle& oracle, const std::vector<ParamVector>& optima,
                            int grid_points_per_edge, const OptimizerConfig& inner_cfg,
                            const ConnectorOptions& options = {});

/// All integer compositions of (points_per_edge - 1) into m + 1 parts,
/// normalized, enumerated lexicographically in (c_1, ..., c_m).
std::vector<std::vector<double>> barycentric_grid(int m, int points_per_edge);

struct HullPoint {
  ParamVector start;
  ParamVector point;
  double start_loss = 0.0;
  double loss = 0.0;
  bool converged = false;
};

/// Optimizes the hull point with the given barycentric weights inside the slice
/// orthogonal to span{optima_i - optima_0}.
HullPoint optimize_hull_point(const LossOracle& oracle, const std::vector<ParamVector>& optima,
                              const std::vector<double>& weights, const OptimizerConfig& inner_cfg);

/// Pairwise cosines between deviations (optimized - start); entries involving a
/// deviation with norm < 1e-9 are undefined.
class CosineMatrix {
 public:
  explicit CosineMatrix(std::size_t n) : n_(n), values_(n * n) {}

  std::size_t size() const noexcept { return n_; }
  const std::optional<double>& at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::optional<double>& at(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }

  /// Square matrix with header w0..w{n-1}; degenerate entries as `undefined`.
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::size_t n_;
  std::vector<std::optional<double>> values_;
};

CosineMatrix deviation_cosines(const Connector& connector);

struct CosineSummary {
  std::size_t split_index = 0;
  double within_mean = 0.0;     // mean cosine over pairs inside the same half
  double cross_abs_mean = 0.0;  // mean |cosine| over first-half x second-half pairs
  std::size_t within_pairs = 0;
  std::size_t cross_pairs = 0;
};

/// Halves are split at the waypoint nearest the linear-path loss argmax, or at
/// the middle waypoint when that argmax sits within 2 waypoints of an end.
/// The split waypoint and the endpoints belong to neither half.
std::size_t deviation_split_index(const Connector& connector);
CosineSummary summarize_cosines(const Connector& connector, const CosineMatrix& cosines);

}  // namespace wedge
