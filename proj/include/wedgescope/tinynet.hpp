#pragma once

#include "wedgescope/common.hpp"
#include "wedgescope/loss_oracle.hpp"
#include "wedgescope/optimizers.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wedge {

struct Connector;

enum class Activation { tanh, relu };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct MLPSpec {
  std::vector<int> layer_sizes;  // input, hidden..., classes
  Activation activation = Activation::tanh;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t param_count() const;  // sum (n_i + 1) n_{i+1}
  int input_dim() const { return layer_sizes.front(); }
  int num_classes() const { return layer_sizes.back(); }
};

/// Rows of `inputs` are samples.
struct Batch {
  Matrix inputs;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
};

enum class Split { train, test };

struct Dataset {
  Matrix inputs;
  std::vector<int> labels;
  std::vector<Split> split;
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  Batch train() const;
  Batch test() const;
  void validate() const;
};

enum class DatasetKind { two_moons, gaussian_blobs, spirals };

const char* to_string(DatasetKind k);
DatasetKind dataset_kind_from_string(const std::string& name);

/// two_moons: two interleaved half circles (2 classes); gaussian_blobs: 3
/// classes with means 10 apart and per-axis std `noise`; spirals: two
/// interleaved arms. 80/20 train/test split by a seeded permutation.
Dataset generate_dataset(DatasetKind kind, std::size_t n, double noise, std::uint64_t seed);

/// Header row, numeric features, integer label column named `label_column`.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 std::uint64_t split_seed = 0);

/// Weights ~ N(0, 1/sqrt(fan_in)), biases 0. Layout per layer: W (out x in,
/// row-major) then b.
ParamVector init_params(const MLPSpec& spec);

Matrix forward(const MLPSpec& spec, const ParamVector& params, const Matrix& inputs);
Matrix softmax_rows(const Matrix& logits);

/// Mean cross-entropy + l2 * ||W||^2 (biases excluded). With dropout_rate > 0
/// an inverted-dropout mask drawn from dropout_seed is applied to every hidden
/// activation for this call only.
double loss_and_grad(const MLPSpec& spec, const ParamVector& params, const Batch& batch,
                     double l2_coeff, double dropout_rate, std::uint64_t dropout_seed,
                     ParamVector* grad);

double l2_penalty(const MLPSpec& spec, const ParamVector& params, double l2_coeff);

/// Argmax of the logits, ties toward the lower class.
std::vector<int> predict_labels(const MLPSpec& spec, const ParamVector& params,
                                const Matrix& inputs);
double accuracy(const MLPSpec& spec, const ParamVector& params, const Batch& batch);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  double l2_coeff = 0.0;
  double dropout_rate = 0.0;
  int epochs = 200;
  OptimizerMethod optimizer = OptimizerMethod::adam;
  std::uint64_t seed = 0;
  int snapshot_every = 0;  // keep params every k epochs (0: none)

  void validate() const;
};

struct EpochRecord {
  int epoch;
  double train_loss;  // training objective (cross-entropy + L2), no dropout
  double train_accuracy;
  double test_loss;   // cross-entropy only
  double test_accuracy;
  double radius;
};

struct TrainResult {
  ParamVector params;
  Trajectory trajectory;  // step = epoch, loss = train_loss
  std::vector<EpochRecord> epochs;
  std::vector<ParamVector> snapshots;

  void write_csv(const std::filesystem::path& path) const;
};

/// Starts from init_params(spec) unless `start` is given.
TrainResult train(const MLPSpec& spec, const Dataset& data, const TrainConfig& cfg,
                  const std::optional<ParamVector>& start = std::nullopt);

/// Training objective of a network over a fixed batch (no dropout), as a
/// deterministic loss surface for the landscape tools.
class NetOracle final : public LossOracle {
 public:
  NetOracle(MLPSpec spec, Batch batch, double l2_coeff = 0.0);

  std::size_t dimension() const override { return spec_.param_count(); }
  double loss(const ParamVector& p) const override;
  ParamVector grad(const ParamVector& p) const override;
  double loss_and_grad(const ParamVector& p, ParamVector& grad) const override;

  const MLPSpec& spec() const noexcept { return spec_; }
  const Batch& batch() const noexcept { return batch_; }
  double l2_coeff() const noexcept { return l2_coeff_; }

 private:
  MLPSpec spec_;
  Batch batch_;
  double l2_coeff_;
};

/// fraction_i = share of inputs whose predicted label at waypoint i differs
/// from the prediction at waypoint 0.
std::vector<double> prediction_change_profile(const MLPSpec& spec,
                                              const std::vector<ParamVector>& waypoints,
                                              const Matrix& inputs);
std::vector<double> prediction_change_profile(const MLPSpec& spec, const Connector& connector,
                                              const Matrix& inputs);

/// `WSCK0001`, u64 header length, JSON header, u64 parameter count, f64 values
/// (all little-endian).
void save_checkpoint(const std::filesystem::path& path, const MLPSpec& spec,
                     const ParamVector& params);
struct Checkpoint {
  MLPSpec spec;
  ParamVector params;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace wedge
