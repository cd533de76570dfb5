#include "wedgescope/ensembling.hpp"

#include "wedgescope/csv.hpp"
#include "wedgescope/probing.hpp"

#include <algorithm>
#include <cmath>

namespace wedge {

ParamVector swa_average(const std::vector<ParamVector>& snapshots) {
  if (snapshots.empty()) throw InvalidArgument("swa_average needs at least one snapshot");
  ParamVector sum = ParamVector::Zero(snapshots.front().size());
  for (const auto& s : snapshots) {
    require_dimension(s, static_cast<std::size_t>(sum.size()), "swa_average snapshot");
    sum += s;
  }
  return sum / static_cast<double>(snapshots.size());
}

Matrix ensemble_predict(const MLPSpec& spec, const std::vector<ParamVector>& snapshots,
                        const Matrix& inputs) {
  if (snapshots.empty()) throw InvalidArgument("ensemble_predict needs at least one snapshot");
  Matrix sum = softmax_rows(forward(spec, snapshots.front(), inputs));
  for (std::size_t i = 1; i < snapshots.size(); ++i) sum += softmax_rows(forward(spec, snapshots[i], inputs));
  return sum / static_cast<double>(snapshots.size());
}

double mean_cross_entropy(const Matrix& probs, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(probs.rows()) != labels.size())
    throw DimensionMismatch("probability rows", labels.size(), static_cast<std::size_t>(probs.rows()));
  if (labels.empty()) throw InvalidArgument("cross-entropy of an empty set");
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = probs(static_cast<Eigen::Index>(i), labels[i]);
    s -= std::log(std::max(p, 1e-300));
  }
  return s / static_cast<double>(labels.size());
}

namespace {

void fill_snapshot_stats(SwaReport& r, const LossOracle& oracle, const std::vector<ParamVector>& snaps,
                         double lr_max) {
  if (snaps.size() < 2) throw InvalidArgument("an SWA experiment needs n_cycles >= 2");
  r.lr_max = lr_max;
  for (const auto& s : snaps) r.snapshot_losses.push_back(oracle.loss(s));
  r.median_snapshot_loss = percentile(r.snapshot_losses, 0.5);
  r.weight_avg_loss = oracle.loss(swa_average(snaps));
}

}  // namespace

SwaReport swa_experiment(const LossOracle& toy_oracle, const ParamVector& p0,
                         const OptimizerConfig& cfg, const CyclicalSchedule& schedule) {
  const WedgeLandscape* toy = toy_oracle.toy();
  if (!toy) throw InvalidArgument("the toy SWA experiment needs the toy landscape oracle");
  const auto snaps = snapshot_train(toy_oracle, p0, cfg, schedule);
  SwaReport r;
  fill_snapshot_stats(r, toy_oracle, snaps, schedule.lr_max);
  std::optional<WedgeId> first;
  bool same = true;
  std::size_t converged = 0;
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    r.wedge_ids.push_back(toy->nearest_wedge(snaps[i]));
    const bool bad = r.snapshot_losses[i] > kSnapshotConvergedLoss;
    r.unconverged.push_back(bad);
    if (bad) continue;
    ++converged;
    if (!first) {
      first = r.wedge_ids.back();
    } else if (!(r.wedge_ids.back() == *first)) {
      same = false;
    }
  }
  r.same_wedge = converged > 0 && same;
  return r;
}

SwaReport swa_experiment(const NetOracle& net, const ParamVector& p0, const OptimizerConfig& cfg,
                         const CyclicalSchedule& schedule, const Batch& eval) {
  if (eval.size() == 0) throw InvalidArgument("SWA evaluation set is empty");
  const auto snaps = snapshot_train(net, p0, cfg, schedule);
  SwaReport r;
  r.lr_max = schedule.lr_max;
  for (const auto& s : snaps) {
    r.snapshot_losses.push_back(mean_cross_entropy(softmax_rows(forward(net.spec(), s, eval.inputs)), eval.labels));
  }
  if (snaps.size() < 2) throw InvalidArgument("an SWA experiment needs n_cycles >= 2");
  r.median_snapshot_loss = percentile(r.snapshot_losses, 0.5);
  const ParamVector avg = swa_average(snaps);
  r.weight_avg_loss = mean_cross_entropy(softmax_rows(forward(net.spec(), avg, eval.inputs)), eval.labels);
  r.weight_avg_accuracy = accuracy(net.spec(), avg, eval);
  const Matrix probs = ensemble_predict(net.spec(), snaps, eval.inputs);
  r.pred_avg_loss = mean_cross_entropy(probs, eval.labels);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c)
      if (probs(i, c) > probs(i, best)) best = c;
    hits += best == eval.labels[static_cast<std::size_t>(i)] ? 1 : 0;
  }
  r.pred_avg_accuracy = static_cast<double>(hits) / static_cast<double>(eval.size());
  return r;
}

void write_swa_sweep_csv(const std::filesystem::path& path, const std::vector<SwaSweepRow>& rows) {
  CsvWriter csv(path, {"lr_max", "seed", "same_wedge", "weight_avg_loss", "pred_avg_loss",
                       "median_snapshot_loss"});
  for (const auto& row : rows) {
    csv.cell(row.lr_max).cell(static_cast<long long>(row.seed));
    if (row.report.same_wedge) {
      csv.cell(*row.report.same_wedge);
    } else {
      csv.cell("");
    }
    csv.cell(row.report.weight_avg_loss);
    if (row.report.pred_avg_loss) {
      csv.cell(*row.report.pred_avg_loss);
    } else {
      csv.cell("");
    }
    csv.cell(row.report.median_snapshot_loss);
    csv.end_row();
  }
}

}  // namespace wedge
