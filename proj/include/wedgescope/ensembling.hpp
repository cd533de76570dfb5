#pragma once

#include "wedgescope/common.hpp"
#include "wedgescope/loss_oracle.hpp"
#include "wedgescope/optimizers.hpp"
#include "wedgescope/tinynet.hpp"
#include "wedgescope/wedge_landscape.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace wedge {

/// Componentwise mean of the snapshots.
ParamVector swa_average(const std::vector<ParamVector>& snapshots);

/// Mean of the per-snapshot softmax probabilities (one row per input).
Matrix ensemble_predict(const MLPSpec& spec, const std::vector<ParamVector>& snapshots,
                        const Matrix& inputs);

/// Mean -log p(label) of a probability matrix.
double mean_cross_entropy(const Matrix& probs, const std::vector<int>& labels);

/// Toy snapshots with surrogate loss above this are flagged as unconverged and
/// left out of the wedge comparison.
inline constexpr double kSnapshotConvergedLoss = 0.1;

struct SwaReport {
  double lr_max = 0.0;
  std::vector<double> snapshot_losses;
  double median_snapshot_loss = 0.0;
  double weight_avg_loss = 0.0;
  // networks
  std::optional<double> pred_avg_loss;
  std::optional<double> pred_avg_accuracy;
  std::optional<double> weight_avg_accuracy;
  // toy
  std::vector<WedgeId> wedge_ids;
  std::vector<bool> unconverged;
  std::optional<bool> same_wedge;
};

/// Toy landscape: snapshot_train from p0, then compare the wedges of the
/// converged snapshots and the loss at their average.
SwaReport swa_experiment(const LossOracle& toy_oracle, const ParamVector& p0,
                         const OptimizerConfig& cfg, const CyclicalSchedule& schedule);

/// Network: snapshot_train on the full-batch training objective, then compare
/// weight averaging with prediction averaging on `eval`.
SwaReport swa_experiment(const NetOracle& net, const ParamVector& p0, const OptimizerConfig& cfg,
                         const CyclicalSchedule& schedule, const Batch& eval);

struct SwaSweepRow {
  double lr_max;
  std::uint64_t seed;
  SwaReport report;
};

/// lr_max,seed,same_wedge,weight_avg_loss,pred_avg_loss,median_snapshot_loss
/// (fields that do not apply to the landscape are left empty).
void write_swa_sweep_csv(const std::filesystem::path& path, const std::vector<SwaSweepRow>& rows);

}  // namespace wedge
