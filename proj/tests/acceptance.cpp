// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Thresholds below are fixed; a failing criterion is reported, not relaxed.

#include "wedgescope/experiments.hpp"
#include "wedgescope/parallel.hpp"
#include "wedgescope/random.hpp"
#include "wedgescope/tinynet.hpp"
#include "wedgescope/wedge_landscape.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#ifndef WEDGESCOPE_CLI
#error "WEDGESCOPE_CLI must name the command-line binary"
#endif
#ifndef WEDGESCOPE_CONFIG_DIR
#error "WEDGESCOPE_CONFIG_DIR must name the example config directory"
#endif

using namespace wedge;
namespace fs = std::filesystem;

namespace {

// C1
constexpr double kOracleTol = 1e-10;
constexpr int kOraclePoints = 1000;
// C2
constexpr double kGradRelTol = 1e-4;
constexpr int kGradProbes = 50;
// C3
constexpr double kHighSuccess = 0.9;
constexpr double kLowSuccess = 0.1;
// C4, C5
constexpr int kTunnelPairs = 10;
constexpr double kLinearBarrier = 0.3;
constexpr double kTunnelMax = 1e-2;
constexpr double kTunnelShare = 0.9;
constexpr double kWithinCos = 0.7;
constexpr double kCrossCos = 0.2;
// C6
constexpr int kMidpoints = 20;
constexpr std::size_t kExpectedIntersection = 4;
constexpr double kMethodAgreement = 0.9;
// C7
constexpr int kMaxM = 6;
constexpr int kSeedsPerM = 5;
// C8
constexpr double kWidthRelStd = 0.2;
// C9, C10
constexpr int kNetPairs = 20;
constexpr double kMidpointFactor = 2.0;
constexpr double kMidpointShare = 0.9;
constexpr double kTunnelFactor = 1.5;
constexpr double kTunnelNetShare = 0.8;
constexpr double kSecondHalfRange = 0.05;
constexpr double kFirstHalfSpan = 0.10;
constexpr double kProfileShare = 0.7;
// C11
constexpr int kWidthSeeds = 8;
// C12
constexpr int kSwaSeeds = 20;
constexpr double kSwaLow = 0.01;
constexpr double kSwaHigh = 0.5;
constexpr double kSameWedgeShare = 0.9;
constexpr double kWedgeChangeShare = 0.7;
constexpr double kAvgLossFactor = 10.0;
constexpr int kNetSwaSeeds = 10;
constexpr double kPredWinsShare = 0.8;

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string pct(double v) { return fmt(100.0 * v) + "%"; }

fs::path work_root() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / "wedgescope_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

Json run(const std::string& name, const Json& cfg, std::uint64_t seed, const std::string& tag) {
  ExperimentContext ctx;
  ctx.output_dir = work_root() / tag;
  ctx.seed = seed;
  ctx.jobs = default_jobs();
  return run_experiment(name, cfg, ctx).summary;
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

// Pearson correlation of average ranks (ties shared).
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

// Minimum distance to the n-dimensional coordinate subspaces by enumeration.
double brute_force_distance(const ParamVector& p, int n) {
  const int dim = static_cast<int>(p.size());
  double best = INFINITY;
  for (unsigned mask = 0; mask < (1u << dim); ++mask) {
    if (std::popcount(mask) != n) continue;
    double sq = 0.0;
    for (int i = 0; i < dim; ++i)
      if (!(mask & (1u << i))) sq += p[i] * p[i];
    best = std::min(best, std::sqrt(sq));
  }
  return best;
}

Outcome c1_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  long points = 0;
  for (int dim = 2; dim <= 8; ++dim) {
    for (int n = 1; n < dim; ++n) {
      const WedgeLandscape w(dim, n);
      Rng rng(derive_seed(1, "c1", static_cast<std::uint64_t>(dim * 16 + n)));
      for (int k = 0; k < kOraclePoints; ++k) {
        ParamVector p = standard_normal(rng, static_cast<std::size_t>(dim));
        if (k % 4 == 0) p = p.array().round();  // exact ties and zeros
        worst = std::max(worst, std::abs(w.surrogate_loss(p) - brute_force_distance(p, n)));
        ++points;
      }
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {worst <= kOracleTol && secs < 60.0,
          "max |err| " + fmt(worst) + " over " + std::to_string(points) + " points (tol " + fmt(kOracleTol) +
              "), " + fmt(secs) + " s (limit 60 s)"};
}

Outcome c2_gradients() {
  const auto t0 = Clock::now();
  // toy: points whose sorted magnitudes are well separated, so L is smooth there
  const WedgeLandscape w(20, 15);
  int toy_ok = 0, toy_probes = 0;
  double toy_worst = 0.0;
  for (std::uint64_t s = 0; toy_probes < kGradProbes; ++s) {
    const ParamVector p = standard_normal(derive_seed(2, "c2-toy", s), 20);
    std::vector<double> mags(20);
    for (int i = 0; i < 20; ++i) mags[static_cast<std::size_t>(i)] = std::abs(p[i]);
    std::sort(mags.begin(), mags.end());
    if (mags[5] - mags[4] < 1e-3) continue;
    const ParamVector g = w.surrogate_grad(p);
    ParamVector fd(20);
    for (int i = 0; i < 20; ++i) {
      ParamVector up = p, dn = p;
      up[i] += 1e-6;
      dn[i] -= 1e-6;
      fd[i] = (w.surrogate_loss(up) - w.surrogate_loss(dn)) / 2e-6;
    }
    const double rel = (g - fd).norm() / fd.norm();
    toy_worst = std::max(toy_worst, rel);
    toy_ok += rel < kGradRelTol ? 1 : 0;
    ++toy_probes;
  }
  // tiny net: [2,32,32,2] tanh on a two_moons training batch
  const Dataset data = generate_dataset(DatasetKind::two_moons, 500, 0.3, 0);
  Batch batch = data.train();
  batch.inputs.conservativeResize(64, Eigen::NoChange);
  batch.labels.resize(64);
  MLPSpec spec;
  spec.layer_sizes = {2, 32, 32, 2};
  int net_ok = 0;
  double net_worst = 0.0;
  for (int k = 0; k < kGradProbes; ++k) {
    spec.seed = static_cast<std::uint64_t>(k);
    const ParamVector p = init_params(spec);
    ParamVector g;
    loss_and_grad(spec, p, batch, 0.0, 0.0, 0, &g);
    ParamVector fd(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      ParamVector up = p, dn = p;
      up[i] += 1e-5;
      dn[i] -= 1e-5;
      fd[i] = (loss_and_grad(spec, up, batch, 0.0, 0.0, 0, nullptr) -
               loss_and_grad(spec, dn, batch, 0.0, 0.0, 0, nullptr)) / 2e-5;
    }
    const double rel = (g - fd).norm() / fd.norm();
    net_worst = std::max(net_worst, rel);
    net_ok += rel < kGradRelTol ? 1 : 0;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {toy_ok == kGradProbes && net_ok == kGradProbes && secs < 60.0,
          "toy " + std::to_string(toy_ok) + "/" + std::to_string(kGradProbes) + " (worst rel err " + fmt(toy_worst) +
              "), net " + std::to_string(net_ok) + "/" + std::to_string(kGradProbes) + " (worst " + fmt(net_worst) +
              "), tol " + fmt(kGradRelTol) + ", " + fmt(secs) + " s (limit 60 s)"};
}

Outcome c3_hyperplanes() {
  const auto t0 = Clock::now();
  Json cfg = {{"landscape", {{"D", 50}, {"n", 40}}}, {"seeds", 20}, {"success_loss", 1e-3}};
  std::vector<int> ds;
  for (int d = 2; d <= 20; ++d) ds.push_back(d);
  cfg["d_values"] = ds;
  const Json s = run("hyperplane-sweep", cfg, 3, "c3");
  bool ok = true;
  double worst_high = 1.0, worst_low = 0.0;
  for (int d : ds) {
    const double rate = s["success_rate"][std::to_string(d)].get<double>();
    if (d >= 10) worst_high = std::min(worst_high, rate);
    if (d <= 8) worst_low = std::max(worst_low, rate);
  }
  ok = worst_high >= kHighSuccess && worst_low <= kLowSuccess;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {ok && secs < 300.0,
          "min success d>=10 " + pct(worst_high) + " (need >= " + pct(kHighSuccess) + "), max success d<=8 " +
              pct(worst_low) + " (need <= " + pct(kLowSuccess) + "), d=9 " +
              pct(s["success_rate"]["9"].get<double>()) + ", boundary_d " + s["boundary_d"].dump() + ", " +
              fmt(secs) + " s (limit 300 s)"};
}

struct TunnelRuns {
  std::vector<Json> summaries;
  double seconds = 0.0;
};

const TunnelRuns& toy_tunnels() {
  static const TunnelRuns runs = [] {
    TunnelRuns r;
    const auto t0 = Clock::now();
    const Json cfg = {{"landscape", {{"D", 30}, {"n", 25}}}, {"segments", 20}};
    for (int i = 0; i < kTunnelPairs; ++i)
      r.summaries.push_back(run("tunnel", cfg, static_cast<std::uint64_t>(100 + i), "c4_" + std::to_string(i)));
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
  }();
  return runs;
}

Outcome c4_tunnels() {
  const TunnelRuns& t = toy_tunnels();
  int good = 0, barrier = 0, low = 0;
  double worst_tunnel = 0.0;
  for (const Json& s : t.summaries) {
    const bool b = s["linear_max_loss"].get<double>() > kLinearBarrier;
    const bool l = s["tunnel_max_loss"].get<double>() < kTunnelMax;
    worst_tunnel = std::max(worst_tunnel, s["tunnel_max_loss"].get<double>());
    barrier += b;
    low += l;
    good += b && l;
  }
  const double share = static_cast<double>(good) / kTunnelPairs;
  return {share >= kTunnelShare && t.seconds < 300.0,
          std::to_string(good) + "/" + std::to_string(kTunnelPairs) + " pairs with linear max > " +
              fmt(kLinearBarrier) + " and tunnel max < " + fmt(kTunnelMax) + " (need " + pct(kTunnelShare) +
              "; barrier " + std::to_string(barrier) + ", low tunnel " + std::to_string(low) +
              ", worst tunnel max " + fmt(worst_tunnel) + "), " + fmt(t.seconds) + " s (limit 300 s)"};
}

Outcome c5_cosines() {
  const TunnelRuns& t = toy_tunnels();
  double within = 0, cross = 0;
  double within_n = 0, cross_n = 0;
  for (const Json& s : t.summaries) {
    const Json& c = s["cosines"];
    within += c["within_mean"].get<double>() * c["within_pairs"].get<double>();
    within_n += c["within_pairs"].get<double>();
    cross += c["cross_abs_mean"].get<double>() * c["cross_pairs"].get<double>();
    cross_n += c["cross_pairs"].get<double>();
  }
  within /= within_n;
  cross /= cross_n;
  return {within > kWithinCos && cross < kCrossCos,
          "mean within-half cosine " + fmt(within) + " (need > " + fmt(kWithinCos) + "), mean cross-half |cosine| " +
              fmt(cross) + " (need < " + fmt(kCrossCos) + ") over " + std::to_string(kTunnelPairs) + " pairs"};
}

Outcome c6_intersections() {
  std::vector<double> exact;
  int agree = 0;
  for (int i = 0; i < kMidpoints; ++i) {
    const auto seed = static_cast<std::uint64_t>(200 + i);
    Json cfg = {{"landscape", {{"D", 8}, {"n", 6}}}, {"point", "tunnel_midpoint"}, {"segments", 20}};
    cfg["short_dirs"] = {{"method", "exact_toy"}};
    const Json e = run("short-dirs", cfg, seed, "c6_exact_" + std::to_string(i));
    cfg["short_dirs"] = {{"method", "hessian_fd"}};
    const Json h = run("short-dirs", cfg, seed, "c6_fd_" + std::to_string(i));
    exact.push_back(e["count"].get<double>());
    agree += e["count"] == h["count"] ? 1 : 0;
  }
  const double med = median(exact);
  const double share = static_cast<double>(agree) / kMidpoints;
  std::map<int, int> hist;
  for (double c : exact) ++hist[static_cast<int>(c)];
  std::string h;
  for (const auto& [c, k] : hist) h += (h.empty() ? "" : ", ") + std::to_string(c) + ":" + std::to_string(k);
  return {med == static_cast<double>(kExpectedIntersection) && share >= kMethodAgreement,
          "median exact count " + fmt(med) + " (need " + std::to_string(kExpectedIntersection) +
              "; counts {" + h + "}), hessian_fd agrees on " + pct(share) + " (need " + pct(kMethodAgreement) + ")"};
}

Outcome c7_m_scaling() {
  const auto t0 = Clock::now();
  std::vector<double> medians;
  for (int m = 1; m <= kMaxM; ++m) {
    std::vector<double> counts;
    for (int s = 0; s < kSeedsPerM; ++s) {
      const Json cfg = {{"landscape", {{"D", 40}, {"n", 32}}}, {"m", m}, {"grid_points_per_edge", 2}};
      const Json r = run("m-connector", cfg, static_cast<std::uint64_t>(300 + 10 * m + s),
                         "c7_" + std::to_string(m) + "_" + std::to_string(s));
      counts.push_back(r["centroid_short_count"].get<double>());
    }
    medians.push_back(median(counts));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < medians.size(); ++i) monotone = monotone && medians[i] >= medians[i - 1];
  const bool doubled = medians.back() >= 2.0 * medians.front();
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::string list;
  for (double v : medians) list += (list.empty() ? "" : ", ") + fmt(v);
  return {monotone && doubled && secs < 900.0,
          "median hull-midpoint counts for m=1.." + std::to_string(kMaxM) + ": [" + list + "], non-decreasing " +
              (monotone ? "yes" : "no") + ", count(m=6) >= 2 count(m=1) " + (doubled ? "yes" : "no") + ", " +
              fmt(secs) + " s (limit 900 s)"};
}

Outcome c8_width() {
  const Json cfg = {{"landscape", {{"D", 100}, {"n", 90}}}, {"center", "wedge"}, {"center_norm", 10.0},
                    {"threshold", 0.5}, {"K", 200}, {"r_max", 100.0}};
  const Json s = run("probe-width", cfg, 8, "c8");
  const double rel = s["relative_std"].get<double>();
  return {rel < kWidthRelStd, "relative std of crossing distances " + fmt(rel) + " (need < " + fmt(kWidthRelStd) +
                                  "), median " + fmt(s["median"].get<double>()) + ", p10 " +
                                  fmt(s["p10"].get<double>()) + ", p90 " + fmt(s["p90"].get<double>())};
}

Json net_section() {
  return {{"dataset", {{"kind", "two_moons"}, {"n", 500}}},
          {"spec", {{"layer_sizes", {2, 32, 32, 2}}, {"activation", "tanh"}}}};
}

struct NetTunnels {
  std::vector<Json> summaries;
  double seconds = 0.0;
};

const NetTunnels& net_tunnels() {
  static const NetTunnels runs = [] {
    NetTunnels r;
    const auto t0 = Clock::now();
    const Json cfg = {{"network", net_section()}, {"segments", 10}, {"inputs", "test"}};
    for (int i = 0; i < kNetPairs; ++i)
      r.summaries.push_back(
          run("prediction-profile", cfg, static_cast<std::uint64_t>(900 + i), "c9_" + std::to_string(i)));
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
  }();
  return runs;
}

Outcome c9_net_tunnels() {
  const NetTunnels& t = net_tunnels();
  int wall = 0, low = 0;
  double min_ratio = INFINITY;
  for (const Json& s : t.summaries) {
    const double e0 = s["endpoint_losses"][0].get<double>();
    const double e1 = s["endpoint_losses"][1].get<double>();
    const double mid = s["linear_midpoint_loss"].get<double>();
    min_ratio = std::min(min_ratio, mid / std::max(e0, e1));
    wall += mid >= kMidpointFactor * e0 && mid >= kMidpointFactor * e1 ? 1 : 0;
    low += s["tunnel_max_loss"].get<double>() <= kTunnelFactor * std::max(e0, e1) ? 1 : 0;
  }
  const double wall_share = static_cast<double>(wall) / kNetPairs;
  const double low_share = static_cast<double>(low) / kNetPairs;
  return {wall_share >= kMidpointShare && low_share >= kTunnelNetShare && t.seconds < 1200.0,
          "midpoint >= " + fmt(kMidpointFactor) + "x endpoints in " + pct(wall_share) + " (need " +
              pct(kMidpointShare) + ", smallest ratio " + fmt(min_ratio) + "), tunnel max <= " + fmt(kTunnelFactor) +
              "x endpoint in " + pct(low_share) + " (need " + pct(kTunnelNetShare) + "), " + fmt(t.seconds) +
              " s (limit 1200 s)"};
}

Outcome c10_profile() {
  const NetTunnels& t = net_tunnels();
  int good = 0;
  double max_span = 0.0;
  for (const Json& s : t.summaries) {
    const double span = s["first_half_span"].get<double>();
    const double range = s["second_half_range"].get<double>();
    max_span = std::max(max_span, span);
    good += range < kSecondHalfRange && span >= kFirstHalfSpan ? 1 : 0;
  }
  const double share = static_cast<double>(good) / kNetPairs;
  return {share >= kProfileShare, "second-half range < " + fmt(kSecondHalfRange) + " and first-half span >= " +
                                      fmt(kFirstHalfSpan) + " in " + pct(share) + " (need " + pct(kProfileShare) +
                                      "; largest first-half span " + fmt(max_span) + ")"};
}

Outcome c11_regularizers() {
  const auto grid_rho = [](const std::string& key, const std::vector<double>& values, std::string& medians) {
    Json base = {{"network", net_section()}, {"center", "optimum"}, {"K", 50}, {"r_max", 100.0}};
    const Json cfg = {{"subcommand", "probe-width"}, {"base", base}, {"grid", {{key, values}}}, {"seeds", kWidthSeeds}};
    const std::string tag = "c11_" + key;
    run("sweep", cfg, 11, tag);
    std::ifstream in(work_root() / tag / "sweep.csv");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
    }
    const auto col = [&](const std::string& name) {
      return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    std::vector<double> x, y;
    std::map<double, std::vector<double>> per;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
      if (cells[col("status")] != "ok") continue;
      x.push_back(std::stod(cells[col(key)]));
      y.push_back(std::stod(cells[col("median")]));
      per[x.back()].push_back(y.back());
    }
    for (const auto& [v, ws] : per) medians += (medians.empty() ? "" : ", ") + fmt(v) + ":" + fmt(median(ws));
    return x.size() == values.size() * kWidthSeeds ? spearman(x, y) : NAN;
  };
  std::string lr_meds, l2_meds;
  const double rho_lr = grid_rho("network.train.learning_rate", {1e-3, 3e-3, 1e-2}, lr_meds);
  const double rho_l2 = grid_rho("network.train.l2_coeff", {0.0, 1e-4, 1e-3}, l2_meds);
  return {rho_lr > 0.0 && rho_l2 > 0.0,
          "Spearman rho lr " + fmt(rho_lr) + " (medians " + lr_meds + "), L2 " + fmt(rho_l2) + " (medians " +
              l2_meds + "), need > 0 for both"};
}

Outcome c12_swa() {
  const Json toy_cfg = {{"landscape", {{"D", 30}, {"n", 24}}},
                        {"schedule", {{"lr_min", 1e-4}, {"cycle_len", 1000}, {"n_cycles", 5}}},
                        {"lr_max_values", {kSwaLow, kSwaHigh}},
                        {"seeds", kSwaSeeds}};
  run("swa-compare", toy_cfg, 12, "c12_toy");
  const Json rows = read_json(work_root() / "c12_toy" / "swa.json");
  int low_ok = 0, high_ok = 0;
  for (const Json& row : rows) {
    const Json& r = row["report"];
    const double avg = r["weight_avg_loss"].get<double>();
    const auto& snaps = r["snapshot_losses"];
    double max_snap = 0.0;
    for (const auto& v : snaps) max_snap = std::max(max_snap, v.get<double>());
    const bool same = r["same_wedge"].get<bool>();
    if (row["lr_max"].get<double>() == kSwaLow) {
      low_ok += same && avg < 2.0 * max_snap ? 1 : 0;
    } else {
      high_ok += !same && avg > kAvgLossFactor * r["median_snapshot_loss"].get<double>() ? 1 : 0;
    }
  }
  const Json net_cfg = {{"network", net_section()},
                        {"schedule", {{"lr_min", 1e-4}, {"cycle_len", 1000}, {"n_cycles", 5}}},
                        {"lr_max_values", {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}},
                        {"seeds", kNetSwaSeeds}};
  const Json net = run("swa-compare", net_cfg, 12, "c12_net");
  const double pred_wins = net["by_lr_max"].back()["pred_beats_weight_fraction"].get<double>();
  const double low_share = static_cast<double>(low_ok) / kSwaSeeds;
  const double high_share = static_cast<double>(high_ok) / kSwaSeeds;
  return {low_share >= kSameWedgeShare && high_share >= kWedgeChangeShare && pred_wins >= kPredWinsShare,
          "toy lr_max " + fmt(kSwaLow) + ": same wedge and low average " + pct(low_share) + " (need " +
              pct(kSameWedgeShare) + "); lr_max " + fmt(kSwaHigh) + ": wedge change and average > " +
              fmt(kAvgLossFactor) + "x median snapshot " + pct(high_share) + " (need " + pct(kWedgeChangeShare) +
              "); net lr_max 0.1: prediction average <= weight average " + pct(pred_wins) + " (need " +
              pct(kPredWinsShare) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

int cli(const std::string& name, const fs::path& config, const fs::path& out) {
  const std::string cmd = std::string("\"") + WEDGESCOPE_CLI + "\" " + name + " --config \"" + config.string() +
                          "\" --output \"" + out.string() + "\" --quiet > /dev/null";
  return std::system(cmd.c_str());
}

Outcome c13_determinism() {
  const fs::path configs = WEDGESCOPE_CONFIG_DIR;
  std::vector<std::string> mismatched;
  int checked = 0;
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(configs)) {
    if (e.path().extension() != ".json") continue;
    const std::string name = e.path().stem().string();
    const fs::path base = work_root() / "c13" / name;
    const fs::path a = base / "a", b = base / "b", c = base / "c";
    bool ok = cli(name, e.path(), a) == 0 && cli(name, e.path(), b) == 0 &&
              cli(name, a / "resolved_config.json", c) == 0;
    if (ok) {
      const auto ta = tree(a);
      ok = !ta.empty() && ta == tree(b) && ta == tree(c);
      files += ta.size();
    }
    if (!ok) mismatched.push_back(name);
    ++checked;
  }
  std::string list;
  for (const auto& m : mismatched) list += " " + m;
  const bool all = checked == 12 && mismatched.empty();
  return {all, std::to_string(checked) + " subcommands, " + std::to_string(files) +
                   " files per run compared across two reruns and a rerun from resolved_config.json" +
                   (mismatched.empty() ? "" : "; differing:" + list)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"surrogate oracle equivalence", c1_oracle},
      {"gradient correctness", c2_gradients},
      {"intrinsic-dimension boundary", c3_hyperplanes},
      {"tunnel existence", c4_tunnels},
      {"deviation clustering", c5_cosines},
      {"intersection short directions", c6_intersections},
      {"m-connector scaling", c7_m_scaling},
      {"radial concentration", c8_width},
      {"tiny-net barrier and tunnel", c9_net_tunnels},
      {"prediction profile shape", c10_profile},
      {"regularizer width monotonicity", c11_regularizers},
      {"SWA wedge effect", c12_swa},
      {"end-to-end determinism", c13_determinism},
  };
  // Optional arguments select criteria by number, e.g. `acceptance 1 2 13`.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << criteria[i].first << "): " << o.detail
              << " [" << fmt(secs) << " s]" << std::endl;
  }
  fs::remove_all(work_root());
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
