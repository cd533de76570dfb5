#include "doctest.h"

#include "wedgescope/random.hpp"
#include "wedgescope/tinynet.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace wedge;

namespace {

MLPSpec small_spec(Activation a = Activation::tanh) {
  MLPSpec s;
  s.layer_sizes = {2, 3, 2};
  s.activation = a;
  s.seed = 4;
  return s;
}

Batch tiny_batch() {
  Batch b;
  b.inputs.resize(4, 2);
  b.inputs << 0.5, -1.0, 1.5, 0.3, -0.7, 0.9, 0.1, 0.2;
  b.labels = {0, 1, 1, 0};
  return b;
}

// Central differences of the objective; the dropout seed is fixed so the mask
// is the same for every evaluation.
ParamVector fd_grad(const MLPSpec& spec, const ParamVector& p, const Batch& b, double l2,
                    double rate, std::uint64_t seed) {
  ParamVector g(p.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    ParamVector up = p, dn = p;
    up[i] += h;
    dn[i] -= h;
    g[i] = (loss_and_grad(spec, up, b, l2, rate, seed, nullptr) -
            loss_and_grad(spec, dn, b, l2, rate, seed, nullptr)) / (2 * h);
  }
  return g;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("wedgescope_" + name);
}

}  // namespace

TEST_CASE("parameter count") {
  CHECK(small_spec().param_count() == 17);
  MLPSpec s;
  s.layer_sizes = {2, 32, 32, 2};
  CHECK(s.param_count() == 96 + 1056 + 66);
  CHECK(init_params(s).size() == static_cast<Eigen::Index>(s.param_count()));
  s.layer_sizes = {2};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.layer_sizes = {2, 0, 2};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("zero parameters give a uniform prediction") {
  const MLPSpec spec = small_spec();
  const ParamVector zero = ParamVector::Zero(17);
  const Batch b = tiny_batch();
  CHECK(loss_and_grad(spec, zero, b, 0.0, 0.0, 0, nullptr) == doctest::Approx(std::log(2.0)));
  for (int label : predict_labels(spec, zero, b.inputs)) CHECK(label == 0);
  const Matrix probs = softmax_rows(forward(spec, zero, b.inputs));
  CHECK((probs.array() - 0.5).abs().maxCoeff() < 1e-15);
}

TEST_CASE("softmax is stable for large logits") {
  Matrix logits(1, 3);
  logits << 1000.0, 1000.0, -1000.0;
  const Matrix p = softmax_rows(logits);
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(0, 2) == 0.0);
}

TEST_CASE("init parameters are seeded") {
  MLPSpec s = small_spec();
  const ParamVector a = init_params(s);
  CHECK(a == init_params(s));
  // biases of the first layer sit after its 3 x 2 weights
  CHECK(a.segment(6, 3).isZero());
  CHECK(a.segment(15, 2).isZero());
  s.seed = 5;
  CHECK_FALSE(a == init_params(s));
}

TEST_CASE("analytic gradient matches finite differences") {
  const Batch b = tiny_batch();
  for (Activation act : {Activation::tanh, Activation::relu}) {
    const MLPSpec spec = small_spec(act);
    const ParamVector p = init_params(spec) + ParamVector::LinSpaced(17, -0.3, 0.4);
    for (double l2 : {0.0, 0.05}) {
      ParamVector g;
      loss_and_grad(spec, p, b, l2, 0.0, 0, &g);
      CHECK((g - fd_grad(spec, p, b, l2, 0.0, 0)).cwiseAbs().maxCoeff() < 1e-6);
    }
    ParamVector gd;
    loss_and_grad(spec, p, b, 0.0, 0.4, 99, &gd);
    CHECK((gd - fd_grad(spec, p, b, 0.0, 0.4, 99)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("gradient on a random batch of sixteen") {
  Rng rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  Batch b;
  b.inputs.resize(16, 2);
  for (Eigen::Index i = 0; i < 16; ++i) {
    b.inputs(i, 0) = normal(rng);
    b.inputs(i, 1) = normal(rng);
    b.labels.push_back(static_cast<int>(i % 2));
  }
  MLPSpec spec;
  spec.layer_sizes = {2, 8, 8, 2};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ParamVector p = standard_normal(seed, spec.param_count(), 0.7);
    ParamVector g;
    loss_and_grad(spec, p, b, 0.0, 0.0, 0, &g);
    const ParamVector fd = fd_grad(spec, p, b, 0.0, 0.0, 0);
    CHECK((g - fd).norm() / fd.norm() < 1e-4);
    loss_and_grad(spec, p, b, 0.0, 0.5, seed, &g);
    const ParamVector fd_drop = fd_grad(spec, p, b, 0.0, 0.5, seed);
    CHECK((g - fd_drop).norm() / fd_drop.norm() < 1e-4);
  }
}

TEST_CASE("l2 penalty excludes biases") {
  const MLPSpec spec = small_spec();
  const ParamVector p = ParamVector::LinSpaced(17, 1.0, 17.0);
  double expected = 0.0;
  for (int i : {0, 1, 2, 3, 4, 5, 9, 10, 11, 12, 13, 14}) expected += p[i] * p[i];
  CHECK(l2_penalty(spec, p, 0.1) == doctest::Approx(0.1 * expected));
  const Batch b = tiny_batch();
  CHECK(loss_and_grad(spec, p, b, 0.1, 0.0, 0, nullptr) - loss_and_grad(spec, p, b, 0.0, 0.0, 0, nullptr) ==
        doctest::Approx(0.1 * expected));
}

TEST_CASE("dropout is seeded and off at rate zero") {
  const MLPSpec spec = small_spec();
  const ParamVector p = init_params(spec);
  const Batch b = tiny_batch();
  const double a = loss_and_grad(spec, p, b, 0.0, 0.5, 1, nullptr);
  CHECK(a == loss_and_grad(spec, p, b, 0.0, 0.5, 1, nullptr));
  CHECK(loss_and_grad(spec, p, b, 0.0, 0.0, 1, nullptr) == loss_and_grad(spec, p, b, 0.0, 0.0, 2, nullptr));
}

TEST_CASE("datasets") {
  const Dataset moons = generate_dataset(DatasetKind::two_moons, 100, 0.0, 0);
  CHECK(moons.size() == 100);
  CHECK(moons.num_classes == 2);
  for (std::size_t i = 0; i < moons.size(); ++i) {
    const double x = moons.inputs(static_cast<Eigen::Index>(i), 0);
    const double y = moons.inputs(static_cast<Eigen::Index>(i), 1);
    if (moons.labels[i] == 0) {
      CHECK(std::hypot(x, y) == doctest::Approx(1.0));
      CHECK(y >= -1e-12);
    } else {
      CHECK(std::hypot(x - 1.0, y - 0.5) == doctest::Approx(1.0));
      CHECK(y <= 0.5 + 1e-12);
    }
  }
  CHECK(moons.train().size() == 80);
  CHECK(moons.test().size() == 20);

  const Dataset noisy = generate_dataset(DatasetKind::two_moons, 100, 0.1, 3);
  CHECK(noisy.inputs == generate_dataset(DatasetKind::two_moons, 100, 0.1, 3).inputs);
  CHECK_FALSE(noisy.inputs == generate_dataset(DatasetKind::two_moons, 100, 0.1, 4).inputs);

  const Dataset blobs = generate_dataset(DatasetKind::gaussian_blobs, 90, 1.0, 1);
  CHECK(blobs.num_classes == 3);
  std::set<int> seen(blobs.labels.begin(), blobs.labels.end());
  CHECK(seen.size() == 3);

  const Dataset spirals = generate_dataset(DatasetKind::spirals, 60, 0.0, 1);
  CHECK(spirals.num_classes == 2);
  CHECK_THROWS_AS(generate_dataset(DatasetKind::two_moons, 1, 0.1, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_dataset(DatasetKind::two_moons, 100, -0.1, 0), InvalidArgument);
  CHECK_THROWS_AS(dataset_kind_from_string("mnist"), InvalidArgument);
}

TEST_CASE("separated blobs are learned") {
  // means 10 apart with unit std: a linear softmax classifier suffices
  const Dataset blobs = generate_dataset(DatasetKind::gaussian_blobs, 600, 1.0, 2);
  MLPSpec spec;
  spec.layer_sizes = {2, 3};
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 100;
  const TrainResult r = train(spec, blobs, cfg);
  CHECK(accuracy(spec, r.params, blobs.test()) > 0.99);
  CHECK(accuracy(spec, r.params, blobs.train()) > 0.99);
  // reported accuracy agrees with a recount from predict_labels
  const Batch test = blobs.test();
  const auto labels = predict_labels(spec, r.params, test.inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == test.labels[i] ? 1 : 0;
  CHECK(r.epochs.back().test_accuracy == static_cast<double>(hits) / static_cast<double>(test.size()));
  CHECK(r.epochs.size() == 101);
  CHECK(r.epochs.back().train_loss < r.epochs.front().train_loss);
}

TEST_CASE("training with no epochs or zero rate keeps the start") {
  const Dataset data = generate_dataset(DatasetKind::two_moons, 50, 0.1, 0);
  const MLPSpec spec = small_spec();
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK(train(spec, data, cfg).params == init_params(spec));
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  const ParamVector start = ParamVector::Constant(17, 0.1);
  CHECK(train(spec, data, cfg, start).params == start);
  cfg.learning_rate = 0.01;
  cfg.snapshot_every = 1;
  const TrainResult a = train(spec, data, cfg);
  CHECK(a.snapshots.size() == 3);
  CHECK(a.params == train(spec, data, cfg).params);
}

TEST_CASE("net oracle agrees with the objective") {
  const Dataset data = generate_dataset(DatasetKind::two_moons, 40, 0.1, 0);
  const MLPSpec spec = small_spec();
  const NetOracle oracle(spec, data.train(), 0.01);
  const ParamVector p = init_params(spec);
  ParamVector g;
  const double l = oracle.loss_and_grad(p, g);
  CHECK(l == oracle.loss(p));
  CHECK(g == oracle.grad(p));
  CHECK(l == loss_and_grad(spec, p, data.train(), 0.01, 0.0, 0, nullptr));
  CHECK(oracle.dimension() == 17);
}

TEST_CASE("prediction change profile") {
  const MLPSpec spec = small_spec();
  const ParamVector p = init_params(spec);
  const Batch b = tiny_batch();
  ParamVector flipped = p;
  flipped.tail(8) = -p.tail(8);  // negating the output layer swaps the logits
  const auto prof = prediction_change_profile(spec, {p, p, flipped}, b.inputs);
  CHECK(prof[0] == 0.0);
  CHECK(prof[1] == 0.0);
  CHECK(prof[2] >= 0.75);
}

TEST_CASE("checkpoint round trip") {
  MLPSpec spec = small_spec(Activation::relu);
  spec.seed = 77;
  const ParamVector p = ParamVector::LinSpaced(17, -1.0 / 3.0, 1e300);
  const auto path = temp_file("ck.wsck");
  save_checkpoint(path, spec, p);
  const Checkpoint ck = load_checkpoint(path);
  CHECK(ck.params == p);
  CHECK(ck.spec.layer_sizes == spec.layer_sizes);
  CHECK(ck.spec.activation == Activation::relu);
  CHECK(ck.spec.seed == 77);
  {
    std::ifstream in(path, std::ios::binary);
    char magic[8];
    in.read(magic, 8);
    CHECK(std::string(magic, 8) == "WSCK0001");
  }
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(temp_file("does_not_exist.wsck")), IoError);
  CHECK_THROWS_AS(save_checkpoint(temp_file("bad.wsck"), spec, ParamVector::Zero(3)), DimensionMismatch);
}

TEST_CASE("csv datasets") {
  const auto path = temp_file("data.csv");
  {
    std::ofstream out(path);
    out << "x,y,label\n0.5,1.0,0\n\n-1.0,2.5,2\n3.0,0.0,1\n4,4,0\n1,1,1\n";
  }
  const Dataset d = load_csv(path, "label");
  CHECK(d.size() == 5);
  CHECK(d.num_classes == 3);
  CHECK(d.inputs(1, 1) == 2.5);
  CHECK(d.labels[1] == 2);
  {
    std::ofstream out(path);
    out << "x,label\n1,0\n2,1\n3,x\n";
  }
  try {
    load_csv(path, "label");
    FAIL("expected a parse error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }
  {
    std::ofstream out(path);
    out << "x,label\n1,0\n2\n";
  }
  try {
    load_csv(path, "label");
    FAIL("expected a parse error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_csv(path, "class"), InvalidArgument);
  std::filesystem::remove(path);
}
