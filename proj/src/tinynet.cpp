#include "wedgescope/tinynet.hpp"

#include "wedgescope/connectors.hpp"
#include "wedgescope/csv.hpp"
#include "wedgescope/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wedge {

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

constexpr char kMagic[8] = {'W', 'S', 'C', 'K', '0', '0', '0', '1'};

struct LayerOffsets {
  Eigen::Index weights;
  Eigen::Index bias;
  int in;
  int out;
};

std::vector<LayerOffsets> layer_offsets(const MLPSpec& spec) {
  std::vector<LayerOffsets> out;
  Eigen::Index o = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const int in = spec.layer_sizes[l];
    const int outs = spec.layer_sizes[l + 1];
    out.push_back({o, o + static_cast<Eigen::Index>(in) * outs, in, outs});
    o += static_cast<Eigen::Index>(in + 1) * outs;
  }
  return out;
}

void check_params(const MLPSpec& spec, const ParamVector& params) {
  require_dimension(params, spec.param_count(), "network parameters");
}

void check_inputs(const MLPSpec& spec, const Matrix& inputs) {
  if (inputs.cols() != spec.input_dim()) {
    throw DimensionMismatch("network inputs (features)", static_cast<std::size_t>(spec.input_dim()),
                            static_cast<std::size_t>(inputs.cols()));
  }
}

void check_labels(const MLPSpec& spec, const Batch& batch) {
  if (static_cast<std::size_t>(batch.inputs.rows()) != batch.labels.size()) {
    throw DimensionMismatch("batch labels", static_cast<std::size_t>(batch.inputs.rows()),
                            batch.labels.size());
  }
  for (int y : batch.labels) {
    if (y < 0 || y >= spec.num_classes()) {
      throw InvalidArgument("label " + std::to_string(y) + " out of range [0, " +
                            std::to_string(spec.num_classes()) + ")");
    }
  }
}

Matrix activate(Activation a, const Matrix& z) {
  if (a == Activation::tanh) return z.array().tanh().matrix();
  return z.cwiseMax(0.0);
}

Batch subset(const Dataset& d, Split which) {
  Batch b;
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.split[i] == which) rows.push_back(static_cast<Eigen::Index>(i));
  b.inputs.resize(static_cast<Eigen::Index>(rows.size()), d.inputs.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    b.inputs.row(static_cast<Eigen::Index>(r)) = d.inputs.row(rows[r]);
    b.labels.push_back(d.labels[static_cast<std::size_t>(rows[r])]);
  }
  return b;
}

void assign_split(Dataset& d, std::uint64_t seed) {
  const std::size_t n = d.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, "split"));
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t n_train = std::max<std::size_t>(1, n * 4 / 5);
  d.split.assign(n, Split::test);
  for (std::size_t i = 0; i < n_train; ++i) d.split[perm[i]] = Split::train;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& is, const std::string& what) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw IoError("truncated checkpoint (" + what + ")");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

}  // namespace

const char* to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw InvalidArgument("unknown activation '" + name + "'");
}

void MLPSpec::validate() const {
  if (layer_sizes.size() < 2) throw InvalidArgument("layer_sizes needs >= 2 entries");
  for (int s : layer_sizes)
    if (s < 1) throw InvalidArgument("layer sizes must be >= 1");
}

std::size_t MLPSpec::param_count() const {
  std::size_t d = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    d += static_cast<std::size_t>(layer_sizes[l] + 1) * static_cast<std::size_t>(layer_sizes[l + 1]);
  return d;
}

Batch Dataset::train() const { return subset(*this, Split::train); }
Batch Dataset::test() const { return subset(*this, Split::test); }

void Dataset::validate() const {
  if (labels.empty()) throw InvalidArgument("dataset is empty");
  if (static_cast<std::size_t>(inputs.rows()) != labels.size() || split.size() != labels.size())
    throw DimensionMismatch("dataset rows", labels.size(), static_cast<std::size_t>(inputs.rows()));
  if (!inputs.allFinite()) throw InvalidArgument("dataset contains non-finite features");
  for (int y : labels)
    if (y < 0 || y >= num_classes) throw InvalidArgument("dataset label out of range");
}

const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::two_moons: return "two_moons";
    case DatasetKind::gaussian_blobs: return "gaussian_blobs";
    case DatasetKind::spirals: return "spirals";
  }
  return "?";
}

DatasetKind dataset_kind_from_string(const std::string& name) {
  if (name == "two_moons") return DatasetKind::two_moons;
  if (name == "gaussian_blobs") return DatasetKind::gaussian_blobs;
  if (name == "spirals") return DatasetKind::spirals;
  throw InvalidArgument("unknown dataset kind '" + name + "'");
}

Dataset generate_dataset(DatasetKind kind, std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("dataset needs N >= 2");
  if (!(noise >= 0.0)) throw InvalidArgument("noise must be >= 0");
  Dataset d;
  const auto rows = static_cast<Eigen::Index>(n);
  d.inputs.resize(rows, 2);
  d.labels.resize(n);
  const auto step = [](std::size_t i, std::size_t count) {
    return count > 1 ? M_PI * static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
  };
  switch (kind) {
    case DatasetKind::two_moons: {
      const std::size_t outer = n / 2;
      const std::size_t inner = n - outer;
      for (std::size_t i = 0; i < outer; ++i) {
        const double t = step(i, outer);
        d.inputs.row(static_cast<Eigen::Index>(i)) << std::cos(t), std::sin(t);
        d.labels[i] = 0;
      }
      for (std::size_t i = 0; i < inner; ++i) {
        const double t = step(i, inner);
        d.inputs.row(static_cast<Eigen::Index>(outer + i)) << 1.0 - std::cos(t), 0.5 - std::sin(t);
        d.labels[outer + i] = 1;
      }
      d.num_classes = 2;
      break;
    }
    case DatasetKind::gaussian_blobs: {
      const double centers[3][2] = {{0.0, 0.0}, {10.0, 0.0}, {5.0, 5.0 * std::sqrt(3.0)}};
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = i % 3;
        d.inputs.row(static_cast<Eigen::Index>(i)) << centers[c][0], centers[c][1];
        d.labels[i] = static_cast<int>(c);
      }
      d.num_classes = 3;
      break;
    }
    case DatasetKind::spirals: {
      const std::size_t first = n / 2;
      for (std::size_t i = 0; i < n; ++i) {
        const int cls = i < first ? 0 : 1;
        const std::size_t j = cls == 0 ? i : i - first;
        const std::size_t count = cls == 0 ? first : n - first;
        const double u = count > 1 ? static_cast<double>(j) / static_cast<double>(count - 1) : 0.0;
        const double t = (0.25 + 0.75 * u) * 3.0 * M_PI;
        const double r = t / (3.0 * M_PI);
        const double phase = cls * M_PI;
        d.inputs.row(static_cast<Eigen::Index>(i)) << r * std::cos(t + phase), r * std::sin(t + phase);
        d.labels[i] = cls;
      }
      d.num_classes = 2;
      break;
    }
  }
  if (noise > 0.0) {
    Rng rng(derive_seed(seed, "noise"));
    std::normal_distribution<double> normal(0.0, noise);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) d.inputs(i, j) += normal(rng);
  }
  assign_split(d, seed);
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 std::uint64_t split_seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  auto split_line = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": missing header row");
  const auto header = split_line(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end())
    throw InvalidArgument(path.string() + ": no label column '" + label_column + "'");
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());
  if (header.size() < 2) throw InvalidArgument(path.string() + ": need at least one feature column");

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (cells.size() != header.size())
      throw InvalidArgument(where + "expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
    std::vector<double> features;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_idx) {
        std::size_t used = 0;
        int y = 0;
        try {
          y = std::stoi(cells[c], &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != cells[c].size() || y < 0)
          throw InvalidArgument(where + "label '" + cells[c] + "' is not a nonnegative integer");
        labels.push_back(y);
        continue;
      }
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[c].size() || !std::isfinite(v))
        throw InvalidArgument(where + "feature '" + cells[c] + "' is not a finite number");
      features.push_back(v);
    }
    rows.push_back(std::move(features));
  }
  if (rows.size() < 2) throw InvalidArgument(path.string() + ": need at least 2 data rows");
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      d.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  d.labels = std::move(labels);
  d.num_classes = *std::max_element(d.labels.begin(), d.labels.end()) + 1;
  assign_split(d, split_seed);
  return d;
}

ParamVector init_params(const MLPSpec& spec) {
  spec.validate();
  ParamVector p = ParamVector::Zero(static_cast<Eigen::Index>(spec.param_count()));
  Rng rng(derive_seed(spec.seed, "init"));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& l : layer_offsets(spec)) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(l.in) * l.out; ++i)
      p[l.weights + i] = scale * normal(rng);
  }
  return p;
}

Matrix forward(const MLPSpec& spec, const ParamVector& params, const Matrix& inputs) {
  spec.validate();
  check_params(spec, params);
  check_inputs(spec, inputs);
  const auto layers = layer_offsets(spec);
  Matrix a = inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& o = layers[l];
    RowMajorMap w(params.data() + o.weights, o.out, o.in);
    Matrix z = a * w.transpose();
    z.rowwise() += params.segment(o.bias, o.out).transpose();
    a = l + 1 < layers.size() ? activate(spec.activation, z) : std::move(z);
  }
  return a;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

double l2_penalty(const MLPSpec& spec, const ParamVector& params, double l2_coeff) {
  if (l2_coeff == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& o : layer_offsets(spec))
    s += params.segment(o.weights, static_cast<Eigen::Index>(o.in) * o.out).squaredNorm();
  return l2_coeff * s;
}

double loss_and_grad(const MLPSpec& spec, const ParamVector& params, const Batch& batch,
                     double l2_coeff, double dropout_rate, std::uint64_t dropout_seed,
                     ParamVector* grad) {
  spec.validate();
  check_params(spec, params);
  check_inputs(spec, batch.inputs);
  check_labels(spec, batch);
  if (batch.size() == 0) throw InvalidArgument("empty batch");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidArgument("dropout_rate must be in [0, 1)");

  const auto layers = layer_offsets(spec);
  const auto n = static_cast<Eigen::Index>(batch.size());
  const bool use_dropout = dropout_rate > 0.0;
  // acts[l] is the input of layer l; masks[l] scales the output of hidden layer l.
  std::vector<Matrix> acts{batch.inputs};
  std::vector<Matrix> masks;
  std::vector<Matrix> pre;  // hidden activations before dropout, for the derivative
  Rng rng(dropout_seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - dropout_rate);
  Matrix logits;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& o = layers[l];
    RowMajorMap w(params.data() + o.weights, o.out, o.in);
    Matrix z = acts.back() * w.transpose();
    z.rowwise() += params.segment(o.bias, o.out).transpose();
    if (l + 1 == layers.size()) {
      logits = std::move(z);
      break;
    }
    Matrix h = spec.activation == Activation::tanh ? Matrix(z.array().tanh().matrix())
                                                   : Matrix(z.cwiseMax(0.0));
    if (spec.activation == Activation::relu) {
      pre.push_back((z.array() > 0.0).cast<double>().matrix());
    } else {
      pre.push_back((1.0 - h.array().square()).matrix());
    }
    if (use_dropout) {
      Matrix mask(h.rows(), h.cols());
      for (Eigen::Index i = 0; i < mask.rows(); ++i)
        for (Eigen::Index j = 0; j < mask.cols(); ++j)
          mask(i, j) = uniform(rng) < dropout_rate ? 0.0 : keep_scale;
      h = h.cwiseProduct(mask);
      masks.push_back(std::move(mask));
    }
    acts.push_back(std::move(h));
  }

  Matrix probs = softmax_rows(logits);
  double ce = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = batch.labels[static_cast<std::size_t>(i)];
    const double row_max = logits.row(i).maxCoeff();
    const double lse = row_max + std::log((logits.row(i).array() - row_max).exp().sum());
    ce += lse - logits(i, y);
  }
  ce /= static_cast<double>(n);
  const double loss = ce + l2_penalty(spec, params, l2_coeff);
  if (!std::isfinite(loss)) throw NumericalError("non-finite network loss");
  if (!grad) return loss;

  grad->setZero(static_cast<Eigen::Index>(spec.param_count()));
  Matrix delta = probs;
  for (Eigen::Index i = 0; i < n; ++i) delta(i, batch.labels[static_cast<std::size_t>(i)]) -= 1.0;
  delta /= static_cast<double>(n);
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& o = layers[li];
    RowMajorMap w(params.data() + o.weights, o.out, o.in);
    RowMajorMutMap gw(grad->data() + o.weights, o.out, o.in);
    gw = delta.transpose() * acts[li];
    if (l2_coeff != 0.0) gw += 2.0 * l2_coeff * w;
    grad->segment(o.bias, o.out) = delta.colwise().sum().transpose();
    if (li == 0) break;
    Matrix back = delta * w;
    if (use_dropout) back = back.cwiseProduct(masks[li - 1]);
    delta = back.cwiseProduct(pre[li - 1]);
  }
  return loss;
}

std::vector<int> predict_labels(const MLPSpec& spec, const ParamVector& params,
                                const Matrix& inputs) {
  const Matrix logits = forward(spec, params, inputs);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

double accuracy(const MLPSpec& spec, const ParamVector& params, const Batch& batch) {
  if (batch.size() == 0) return 0.0;
  const auto pred = predict_labels(spec, params, batch.inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == batch.labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw InvalidArgument("learning_rate must be a finite value >= 0");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(l2_coeff >= 0.0)) throw InvalidArgument("l2_coeff must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidArgument("dropout_rate must be in [0, 1)");
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (snapshot_every < 0) throw InvalidArgument("snapshot_every must be >= 0");
}

void TrainResult::write_csv(const std::filesystem::path& path) const {
  CsvWriter csv(path, {"epoch", "train_loss", "train_accuracy", "test_loss", "test_accuracy", "radius"});
  for (const auto& e : epochs) {
    csv.cell(e.epoch).cell(e.train_loss).cell(e.train_accuracy).cell(e.test_loss)
        .cell(e.test_accuracy).cell(e.radius);
    csv.end_row();
  }
}

TrainResult train(const MLPSpec& spec, const Dataset& data, const TrainConfig& cfg,
                  const std::optional<ParamVector>& start) {
  spec.validate();
  cfg.validate();
  data.validate();
  if (data.num_classes > spec.num_classes())
    throw InvalidArgument("dataset has more classes than the network outputs");
  const Batch train_set = data.train();
  const Batch test_set = data.test();
  if (train_set.size() == 0) throw InvalidArgument("training split is empty");

  TrainResult out;
  out.params = start ? *start : init_params(spec);
  check_params(spec, out.params);

  auto record = [&](int epoch) {
    EpochRecord e{};
    e.epoch = epoch;
    e.train_loss = loss_and_grad(spec, out.params, train_set, cfg.l2_coeff, 0.0, 0, nullptr);
    e.train_accuracy = accuracy(spec, out.params, train_set);
    e.test_loss = test_set.size() ? loss_and_grad(spec, out.params, test_set, 0.0, 0.0, 0, nullptr) : 0.0;
    e.test_accuracy = accuracy(spec, out.params, test_set);
    e.radius = out.params.norm();
    out.epochs.push_back(e);
    out.trajectory.points.push_back({epoch, e.train_loss, e.radius});
  };
  record(0);

  OptimizerConfig ocfg;
  ocfg.method = cfg.optimizer;
  ocfg.learning_rate = cfg.learning_rate;
  OptimizerState state(ocfg, spec.param_count());
  const std::size_t n = train_set.size();
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Batch mb;
  ParamVector g;
  std::uint64_t update = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b0 = 0; b0 < n; b0 += bs) {
      const std::size_t len = std::min(bs, n - b0);
      mb.inputs.resize(static_cast<Eigen::Index>(len), train_set.inputs.cols());
      mb.labels.resize(len);
      for (std::size_t i = 0; i < len; ++i) {
        mb.inputs.row(static_cast<Eigen::Index>(i)) = train_set.inputs.row(static_cast<Eigen::Index>(order[b0 + i]));
        mb.labels[i] = train_set.labels[order[b0 + i]];
      }
      try {
        loss_and_grad(spec, out.params, mb, cfg.l2_coeff, cfg.dropout_rate,
                      derive_seed(cfg.seed, "dropout", update), &g);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch),
                             static_cast<long>(epoch));
      }
      ++update;
      if (cfg.learning_rate != 0.0) out.params -= state.update(g, cfg.learning_rate);
    }
    record(epoch);
    if (cfg.snapshot_every > 0 && epoch % cfg.snapshot_every == 0) out.snapshots.push_back(out.params);
  }
  out.trajectory.final_point = out.params;
  out.trajectory.converged = true;
  return out;
}

NetOracle::NetOracle(MLPSpec spec, Batch batch, double l2_coeff)
    : spec_(std::move(spec)), batch_(std::move(batch)), l2_coeff_(l2_coeff) {
  spec_.validate();
  check_inputs(spec_, batch_.inputs);
  check_labels(spec_, batch_);
  if (batch_.size() == 0) throw InvalidArgument("NetOracle needs a nonempty batch");
  if (!(l2_coeff_ >= 0.0)) throw InvalidArgument("l2_coeff must be >= 0");
}

double NetOracle::loss(const ParamVector& p) const {
  return wedge::loss_and_grad(spec_, p, batch_, l2_coeff_, 0.0, 0, nullptr);
}

ParamVector NetOracle::grad(const ParamVector& p) const {
  ParamVector g;
  wedge::loss_and_grad(spec_, p, batch_, l2_coeff_, 0.0, 0, &g);
  return g;
}

double NetOracle::loss_and_grad(const ParamVector& p, ParamVector& grad) const {
  return wedge::loss_and_grad(spec_, p, batch_, l2_coeff_, 0.0, 0, &grad);
}

std::vector<double> prediction_change_profile(const MLPSpec& spec,
                                              const std::vector<ParamVector>& waypoints,
                                              const Matrix& inputs) {
  if (waypoints.empty()) throw InvalidArgument("prediction profile needs waypoints");
  if (inputs.rows() == 0) throw InvalidArgument("prediction profile needs inputs");
  const auto ref = predict_labels(spec, waypoints.front(), inputs);
  std::vector<double> out;
  out.reserve(waypoints.size());
  for (const auto& w : waypoints) {
    const auto pred = predict_labels(spec, w, inputs);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) diff += pred[i] != ref[i] ? 1 : 0;
    out.push_back(static_cast<double>(diff) / static_cast<double>(pred.size()));
  }
  return out;
}

std::vector<double> prediction_change_profile(const MLPSpec& spec, const Connector& connector,
                                              const Matrix& inputs) {
  return prediction_change_profile(spec, connector.waypoints, inputs);
}

void save_checkpoint(const std::filesystem::path& path, const MLPSpec& spec,
                     const ParamVector& params) {
  spec.validate();
  check_params(spec, params);
  const nlohmann::json header = {{"layer_sizes", spec.layer_sizes},
                                 {"activation", to_string(spec.activation)},
                                 {"seed", spec.seed}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_u64(out, static_cast<std::uint64_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(params[i]));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kMagic))
    throw IoError(path.string() + ": not a WSCK0001 checkpoint");
  const auto header_len = get_u64(in, "header length");
  if (header_len > (1u << 20)) throw IoError(path.string() + ": implausible header length");
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) throw IoError("truncated checkpoint (header)");
  Checkpoint ck;
  try {
    const auto header = nlohmann::json::parse(text);
    ck.spec.layer_sizes = header.at("layer_sizes").get<std::vector<int>>();
    ck.spec.activation = activation_from_string(header.at("activation").get<std::string>());
    ck.spec.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad checkpoint header: " + e.what());
  }
  ck.spec.validate();
  const auto count = get_u64(in, "parameter count");
  if (count != ck.spec.param_count())
    throw IoError(path.string() + ": parameter count does not match the header spec");
  ck.params.resize(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i)
    ck.params[static_cast<Eigen::Index>(i)] = std::bit_cast<double>(get_u64(in, "parameters"));
  return ck;
}

}  // namespace wedge
