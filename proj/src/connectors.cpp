#include "wedgescope/connectors.hpp"

#include "wedgescope/csv.hpp"
#include "wedgescope/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wedge {

namespace {

constexpr double kDegenerateDeviation = 1e-9;

void require_finite_loss(double loss, std::size_t index) {
  if (!std::isfinite(loss)) {
    throw NumericalError("non-finite loss at waypoint " + std::to_string(index),
                         static_cast<long>(index));
  }
}

struct HullFrame {
  Matrix normals;  // orthonormal basis of span{optima_i - optima_0}
};

HullFrame make_hull_frame(const std::vector<ParamVector>& optima) {
  const auto dim = optima.front().size();
  const auto m = static_cast<Eigen::Index>(optima.size()) - 1;
  Matrix diffs(m, dim);
  for (Eigen::Index j = 0; j < m; ++j) diffs.row(j) = (optima[j + 1] - optima[0]).transpose();
  try {
    return {orthonormalize_rows(diffs)};
  } catch (const InvalidArgument&) {
    throw InvalidArgument("optima are affinely dependent");
  }
}

ParamVector hull_point(const std::vector<ParamVector>& optima, const std::vector<double>& weights) {
  // Same arithmetic as linear_interpolate for two optima.
  ParamVector p = optima[0];
  for (std::size_t j = 1; j < optima.size(); ++j) p += weights[j] * (optima[j] - optima[0]);
  return p;
}

bool is_vertex(const std::vector<double>& weights) {
  return std::any_of(weights.begin(), weights.end(), [](double w) { return w == 1.0; });
}

HullPoint optimize_in_frame(const LossOracle& oracle, const HullFrame& frame,
                            const std::vector<ParamVector>& optima,
                            const std::vector<double>& weights, const OptimizerConfig& cfg) {
  HullPoint out;
  out.start = hull_point(optima, weights);
  SliceConstraint slice(out.start, frame.normals);
  Trajectory traj = minimize(oracle, out.start, cfg, &slice);
  out.start_loss = traj.initial_loss();
  out.loss = traj.final_loss();
  out.converged = traj.converged;
  out.point = std::move(traj.final_point);
  return out;
}

void check_optima(const LossOracle& oracle, const std::vector<ParamVector>& optima) {
  if (optima.size() < 2) throw InvalidArgument("a connector needs at least 2 optima (m >= 1)");
  const int m = static_cast<int>(optima.size()) - 1;
  if (m > 10) throw InvalidArgument("m-connectors are limited to m <= 10");
  for (const auto& o : optima) {
    require_dimension(o, oracle.dimension(), "connector optimum");
    require_finite(o, "connector optimum");
  }
  if (m > static_cast<int>(oracle.dimension())) throw InvalidArgument("m must not exceed D");
}

Connector build_connector(const LossOracle& oracle, const std::vector<ParamVector>& optima,
                          int points_per_edge, const OptimizerConfig& cfg,
                          const ConnectorOptions& options) {
  check_optima(oracle, optima);
  cfg.validate();
  const int m = static_cast<int>(optima.size()) - 1;
  const HullFrame frame = make_hull_frame(optima);
  const auto grid = barycentric_grid(m, points_per_edge);

  Connector c;
  c.m = m;
  c.endpoints = optima;
  c.barycentric = grid;
  const std::size_t count = grid.size();
  c.starts.resize(count);
  c.waypoints.resize(count);
  c.start_losses.resize(count);
  c.losses.resize(count);
  c.converged.assign(count, true);
  std::vector<char> converged(count, 1);

  parallel_for(count, options.jobs, [&](std::size_t i) {
    const auto& w = grid[i];
    if (is_vertex(w)) {
      const auto vertex = static_cast<std::size_t>(std::find(w.begin(), w.end(), 1.0) - w.begin());
      c.starts[i] = optima[vertex];
      c.waypoints[i] = optima[vertex];
      c.start_losses[i] = c.losses[i] = oracle.loss(optima[vertex]);
      require_finite_loss(c.losses[i], i);
      return;
    }
    try {
      HullPoint hp = optimize_in_frame(oracle, frame, optima, w, cfg);
      c.starts[i] = std::move(hp.start);
      c.waypoints[i] = std::move(hp.point);
      c.start_losses[i] = hp.start_loss;
      c.losses[i] = hp.loss;
      converged[i] = hp.converged ? 1 : 0;
    } catch (const NumericalError& e) {
      throw NumericalError("waypoint " + std::to_string(i) + ": " + e.what(),
                           static_cast<long>(i));
    }
  });
  for (std::size_t i = 0; i < count; ++i) c.converged[i] = converged[i] != 0;
  return c;
}

}  // namespace

double Connector::max_loss() const {
  return losses.empty() ? 0.0 : *std::max_element(losses.begin(), losses.end());
}

double Connector::endpoint_max_loss() const {
  double out = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    if (is_vertex(barycentric[i])) out = std::max(out, losses[i]);
  }
  return out;
}

double Connector::position(std::size_t i) const {
  const auto& w = barycentric.at(i);
  return m == 1 ? w[1] : 1.0 - w[0];
}

void Connector::write_csv(const std::filesystem::path& path) const {
  std::vector<std::string> header{"index", "t", "loss", "deviation_norm"};
  if (m > 1) {
    for (int j = 0; j <= m; ++j) header.push_back("b" + std::to_string(j));
  }
  CsvWriter csv(path, header);
  for (std::size_t i = 0; i < size(); ++i) {
    csv.cell(i).cell(position(i)).cell(losses[i]).cell((waypoints[i] - starts[i]).norm());
    if (m > 1) {
      for (double w : barycentric[i]) csv.cell(w);
    }
    csv.end_row();
  }
}

std::vector<ParamVector> linear_interpolate(const ParamVector& a, const ParamVector& b, int k) {
  if (k < 2) throw InvalidArgument("linear_interpolate needs k >= 2");
  require_dimension(b, static_cast<std::size_t>(a.size()), "linear_interpolate");
  std::vector<ParamVector> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    if (i == 0) {
      out.push_back(a);
    } else if (i == k - 1) {
      out.push_back(b);
    } else {
      const double t = static_cast<double>(i) / static_cast<double>(k - 1);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

BarrierReport barrier_profile(const LossOracle& oracle, const std::vector<ParamVector>& waypoints) {
  if (waypoints.size() < 2) throw InvalidArgument("barrier_profile needs >= 2 waypoints");
  BarrierReport r;
  r.losses.reserve(waypoints.size());
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const double l = oracle.loss(waypoints[i]);
    require_finite_loss(l, i);
    r.losses.push_back(l);
  }
  const auto it = std::max_element(r.losses.begin(), r.losses.end());
  r.max_loss = *it;
  r.argmax_index = static_cast<std::size_t>(it - r.losses.begin());
  r.argmax_fraction =
      static_cast<double>(r.argmax_index) / static_cast<double>(waypoints.size() - 1);
  r.endpoint_max = std::max(r.losses.front(), r.losses.back());
  r.barrier_height = r.max_loss - r.endpoint_max;
  return r;
}

std::vector<std::vector<double>> barycentric_grid(int m, int points_per_edge) {
  if (m < 1) throw InvalidArgument("barycentric grid needs m >= 1");
  if (points_per_edge < 2) throw InvalidArgument("grid needs >= 2 points per edge");
  const int total = points_per_edge - 1;
  std::vector<std::vector<double>> out;
  std::vector<int> counts(static_cast<std::size_t>(m), 0);  // c_1..c_m
  for (;;) {
    int used = 0;
    for (int c : counts) used += c;
    std::vector<double> w(static_cast<std::size_t>(m) + 1);
    w[0] = static_cast<double>(total - used) / total;
    for (int j = 0; j < m; ++j) w[j + 1] = static_cast<double>(counts[j]) / total;
    out.push_back(std::move(w));
    // Odometer over (c_1..c_m) with c_m fastest, restricted to sum <= total.
    int pos = m - 1;
    while (pos >= 0) {
      ++counts[pos];
      int s = 0;
      for (int c : counts) s += c;
      if (s <= total) break;
      counts[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

HullPoint optimize_hull_point(const LossOracle& oracle, const std::vector<ParamVector>& optima,
                              const std::vector<double>& weights,
                              const OptimizerConfig& inner_cfg) {
  check_optima(oracle, optima);
  if (weights.size() != optima.size())
    throw DimensionMismatch("barycentric weights", optima.size(), weights.size());
  return optimize_in_frame(oracle, make_hull_frame(optima), optima, weights, inner_cfg);
}

Connector build_tunnel(const LossOracle& oracle, const ParamVector& a, const ParamVector& b,
                       int segments, const OptimizerConfig& inner_cfg,
                       const ConnectorOptions& options) {
  if (segments < 1) throw InvalidArgument("build_tunnel needs segments >= 1");
  require_dimension(a, oracle.dimension(), "build_tunnel: a");
  require_dimension(b, oracle.dimension(), "build_tunnel: b");
  Connector c;
  if (a == b) {
    // No direction to be normal to; every waypoint is the (shared) endpoint.
    c.endpoints = {a, b};
    const auto grid = barycentric_grid(1, segments + 1);
    const double l = oracle.loss(a);
    require_finite_loss(l, 0);
    for (const auto& w : grid) {
      c.barycentric.push_back(w);
      c.starts.push_back(a);
      c.waypoints.push_back(a);
      c.start_losses.push_back(l);
      c.losses.push_back(l);
      c.converged.push_back(true);
    }
  } else {
    c = build_connector(oracle, {a, b}, segments + 1, inner_cfg, options);
  }
  if (options.subsegment_samples > 0) {
    double worst = -std::numeric_limits<double>::infinity();
    const int q = options.subsegment_samples;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      for (int s = 1; s <= q; ++s) {
        const double t = static_cast<double>(s) / (q + 1);
        const double l = oracle.loss(c.waypoints[i] + t * (c.waypoints[i + 1] - c.waypoints[i]));
        require_finite_loss(l, i);
        worst = std::max(worst, l);
      }
    }
    c.subsegment_max_loss = worst;
  }
  return c;
}

Connector build_m_connector(const LossOracle& oracle, const std::vector<ParamVector>& optima,
                            int grid_points_per_edge, const OptimizerConfig& inner_cfg,
                            const ConnectorOptions& options) {
  return build_connector(oracle, optima, grid_points_per_edge, inner_cfg, options);
}

void CosineMatrix::write_csv(const std::filesystem::path& path) const {
  std::vector<std::string> header;
  header.reserve(n_);
  for (std::size_t j = 0; j < n_; ++j) header.push_back("w" + std::to_string(j));
  CsvWriter csv(path, header);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      const auto& v = at(i, j);
      if (v) {
        csv.cell(*v);
      } else {
        csv.cell("undefined");
      }
    }
    csv.end_row();
  }
}

CosineMatrix deviation_cosines(const Connector& connector) {
  if (connector.m != 1) throw InvalidArgument("deviation_cosines applies to tunnels (m = 1)");
  if (connector.size() < 3) throw InvalidArgument("deviation_cosines needs >= 3 waypoints");
  const std::size_t n = connector.size();
  std::vector<ParamVector> dev(n);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    dev[i] = connector.waypoints[i] - connector.starts[i];
    norms[i] = dev[i].norm();
  }
  CosineMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (norms[i] < kDegenerateDeviation) continue;
    out.at(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norms[j] < kDegenerateDeviation) continue;
      const double c = std::clamp(dev[i].dot(dev[j]) / (norms[i] * norms[j]), -1.0, 1.0);
      out.at(i, j) = c;
      out.at(j, i) = c;
    }
  }
  return out;
}

std::size_t deviation_split_index(const Connector& connector) {
  const std::size_t n = connector.size();
  const auto it = std::max_element(connector.start_losses.begin(), connector.start_losses.end());
  const auto argmax = static_cast<std::size_t>(it - connector.start_losses.begin());
  if (argmax <= 2 || argmax + 2 >= n - 1) return (n - 1) / 2;
  return argmax;
}

CosineSummary summarize_cosines(const Connector& connector, const CosineMatrix& cosines) {
  CosineSummary s;
  const std::size_t n = connector.size();
  s.split_index = deviation_split_index(connector);
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (i < s.split_index) first.push_back(i);
    if (i > s.split_index) second.push_back(i);
  }
  double within = 0.0;
  auto add_within = [&](const std::vector<std::size_t>& half) {
    for (std::size_t a = 0; a < half.size(); ++a)
      for (std::size_t b = a + 1; b < half.size(); ++b)
        if (const auto& v = cosines.at(half[a], half[b])) {
          within += *v;
          ++s.within_pairs;
        }
  };
  add_within(first);
  add_within(second);
  double cross = 0.0;
  for (auto i : first)
    for (auto j : second)
      if (const auto& v = cosines.at(i, j)) {
        cross += std::abs(*v);
        ++s.cross_pairs;
      }
  s.within_mean = s.within_pairs ? within / static_cast<double>(s.within_pairs) : 0.0;
  s.cross_abs_mean = s.cross_pairs ? cross / static_cast<double>(s.cross_pairs) : 0.0;
  return s;
}

}  // namespace wedge
