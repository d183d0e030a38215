#include "cct/nn.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace cct;

namespace {

bool bitwise_equal(const Classifier& a, const Classifier& b) {
  if (a.hidden.size() != b.hidden.size() || a.class_count != b.class_count) return false;
  for (std::size_t i = 0; i < a.hidden.size(); ++i) {
    if (a.hidden[i].weights != b.hidden[i].weights) return false;
    if (a.hidden[i].biases != b.hidden[i].biases) return false;
  }
  return a.head.weights == b.head.weights && a.head.biases == b.head.biases;
}

}  // namespace

TEST_CASE("softmax matches direct evaluation") {
  Vector two(2);
  two << 0.0, 0.0;
  const Vector p2 = softmax(two);
  CHECK(p2(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p2(1) == doctest::Approx(0.5).epsilon(1e-12));

  Vector three(3);
  three << 1.0, 2.0, 3.0;
  const Vector p3 = softmax(three);
  CHECK(p3(0) == doctest::Approx(0.09003).epsilon(1e-4));
  CHECK(p3(1) == doctest::Approx(0.24473).epsilon(1e-4));
  CHECK(p3(2) == doctest::Approx(0.66524).epsilon(1e-4));
}

TEST_CASE("softmax shift invariance and normalization") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> value(-1e4, 1e4);
  for (int trial = 0; trial < 50; ++trial) {
    Vector x(5);
    for (Index i = 0; i < x.size(); ++i) x(i) = value(rng);
    const Vector p = softmax(x);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((p.array() > 0.0).all());

    Index argmax_x = 0, argmax_p = 0;
    x.maxCoeff(&argmax_x);
    p.maxCoeff(&argmax_p);
    CHECK(argmax_x == argmax_p);

    const double shift = value(rng) / 100.0;
    const Vector shifted = softmax((x.array() + shift).matrix().eval());
    CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("softmax rejects bad input") {
  CHECK_THROWS_AS(softmax(Vector{}), std::invalid_argument);
  Vector bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(softmax(bad), std::invalid_argument);
}

TEST_CASE("forward with zero weights is uniform") {
  Classifier model = make_classifier(3, {4}, 5, 0);
  for (DenseLayer& layer : model.hidden) {
    layer.weights.setZero();
    layer.biases.setZero();
  }
  model.head.weights.setZero();
  model.head.biases.setZero();

  const Matrix inputs = Matrix::Random(6, 3);
  const ForwardResult fwd = forward(model, inputs);
  CHECK((fwd.probabilities.array() - 0.2).abs().maxCoeff() < 1e-12);
}

TEST_CASE("forward matches hand-computed pass through a 2-2-2 network") {
  Classifier model;
  model.hidden.resize(1);
  model.hidden[0].weights.resize(2, 2);
  model.hidden[0].weights << 1.0, -1.0, 0.5, 2.0;
  model.hidden[0].biases.resize(2);
  model.hidden[0].biases << 0.1, -0.2;
  model.head.weights.resize(2, 2);
  model.head.weights << 1.0, 0.0, -1.0, 1.0;
  model.head.biases.resize(2);
  model.head.biases << 0.0, 0.3;
  model.class_count = 2;

  Matrix input(1, 2);
  input << 0.2, 0.4;
  // z1 = (0.2 - 0.4 + 0.1, 0.1 + 0.8 - 0.2) = (-0.1, 0.7); relu -> (0, 0.7)
  // logits = (0, 0.7 + 0.3) = (0, 1)
  const ForwardResult fwd = forward(model, input);
  CHECK(fwd.penultimate(0, 0) == doctest::Approx(0.0));
  CHECK(fwd.penultimate(0, 1) == doctest::Approx(0.7));
  CHECK(fwd.logits(0, 0) == doctest::Approx(0.0));
  CHECK(fwd.logits(0, 1) == doctest::Approx(1.0));
  const double denom = 1.0 + std::exp(1.0);
  CHECK(fwd.probabilities(0, 0) == doctest::Approx(1.0 / denom).epsilon(1e-12));
  CHECK(fwd.probabilities(0, 1) == doctest::Approx(std::exp(1.0) / denom).epsilon(1e-12));
}

TEST_CASE("forward rows are normalized and dimension mismatch is rejected") {
  const Classifier model = make_classifier(4, {8}, 3, 11);
  const Matrix inputs = Matrix::Random(9, 4);
  const ForwardResult fwd = forward(model, inputs);
  for (Index i = 0; i < inputs.rows(); ++i) {
    CHECK(fwd.probabilities.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(forward(model, Matrix::Random(2, 5)), std::invalid_argument);
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Classifier model = make_classifier(3, {4}, 3, seed);
    Matrix batch(5, 3);
    std::vector<int> labels;
    for (Index i = 0; i < batch.rows(); ++i) {
      for (Index j = 0; j < batch.cols(); ++j) batch(i, j) = value(rng);
      labels.push_back(static_cast<int>(i) % 3);
    }
    const Gradients grads = gradient(model, batch, labels);

    const auto check_param = [&](double analytic, auto&& accessor) {
      const double fd = testing::finite_difference(model, batch, labels, accessor);
      const double rel = std::fabs(analytic - fd) / std::max(1.0, std::fabs(analytic));
      CHECK(rel < 1e-4);
    };

    for (Index r = 0; r < model.hidden[0].weights.rows(); ++r) {
      for (Index c = 0; c < model.hidden[0].weights.cols(); ++c) {
        check_param(grads.layers[0].weights(r, c),
                    [r, c](Classifier& m) -> double& { return m.hidden[0].weights(r, c); });
      }
    }
    for (Index r = 0; r < model.hidden[0].biases.size(); ++r) {
      check_param(grads.layers[0].biases(r),
                  [r](Classifier& m) -> double& { return m.hidden[0].biases(r); });
    }
    for (Index r = 0; r < model.head.weights.rows(); ++r) {
      for (Index c = 0; c < model.head.weights.cols(); ++c) {
        check_param(grads.layers[1].weights(r, c),
                    [r, c](Classifier& m) -> double& { return m.head.weights(r, c); });
      }
    }
    for (Index r = 0; r < model.head.biases.size(); ++r) {
      check_param(grads.layers[1].biases(r),
                  [r](Classifier& m) -> double& { return m.head.biases(r); });
    }
  }
}

TEST_CASE("gradient vanishes on a saturated correct prediction") {
  Classifier model = make_classifier(2, {}, 2, 3);
  model.head.weights.setZero();
  model.head.weights(0, 0) = 50.0;
  model.head.weights(1, 0) = -50.0;
  model.head.biases.setZero();

  Matrix input(1, 2);
  input << 1.0, 0.0;
  const Gradients grads = gradient(model, input, {0});
  CHECK(grads.layers.back().weights.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(grads.layers.back().biases.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gradient is invariant under sample duplication") {
  const Classifier model = make_classifier(3, {4}, 3, 17);
  Matrix one(1, 3);
  one << 0.3, -0.2, 0.9;
  Matrix two(2, 3);
  two << 0.3, -0.2, 0.9, 0.3, -0.2, 0.9;

  const Gradients g1 = gradient(model, one, {1});
  const Gradients g2 = gradient(model, two, {1, 1});
  for (std::size_t li = 0; li < g1.layers.size(); ++li) {
    CHECK((g1.layers[li].weights - g2.layers[li].weights).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((g1.layers[li].biases - g2.layers[li].biases).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("training fits separable 2-D blobs") {
  const LabeledDataset ds = testing::blob_fixture(2, 100, 2, 10.0, 1.0, 21);
  Classifier model = make_classifier(2, {64, 64}, 2, 5);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.seed = 9;
  const TrainResult result = train(model, ds.features, ds.labels, cfg);
  CHECK(result.loss_history.size() == 50);
  CHECK(result.loss_history.back() <= result.loss_history.front());

  const std::vector<int> predictions = predict(result.model, ds.features);
  int correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == ds.labels[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(predictions.size()) >= 0.99);
}

TEST_CASE("zero learning rate leaves the model untouched") {
  const LabeledDataset ds = testing::blob_fixture(2, 20, 2, 10.0, 1.0, 4);
  const Classifier model = make_classifier(2, {8}, 2, 6);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 5;
  const TrainResult result = train(model, ds.features, ds.labels, cfg);
  CHECK(bitwise_equal(model, result.model));
  for (double loss : result.loss_history) {
    CHECK(loss == doctest::Approx(result.loss_history.front()).epsilon(1e-12));
  }
}

TEST_CASE("training is deterministic per seed") {
  const LabeledDataset ds = testing::blob_fixture(3, 30, 4, 8.0, 1.0, 2);
  const Classifier model = make_classifier(4, {16}, 3, 8);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 77;
  const TrainResult a = train(model, ds.features, ds.labels, cfg);
  const TrainResult b = train(model, ds.features, ds.labels, cfg);
  CHECK(bitwise_equal(a.model, b.model));
  CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("training rejects bad labels and empty data") {
  const Classifier model = make_classifier(2, {4}, 2, 1);
  Matrix x(1, 2);
  x << 0.0, 1.0;
  CHECK_THROWS_AS(train(model, x, {5}, TrainConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(train(model, Matrix(0, 2), {}, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("full-batch loss is non-increasing on a convex head-only problem") {
  const LabeledDataset ds = testing::blob_fixture(3, 40, 3, 6.0, 1.5, 13);
  const Classifier model = make_classifier(3, {}, 3, 10);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 40;
  cfg.batch_size = static_cast<int>(ds.size());
  const TrainResult result = train(model, ds.features, ds.labels, cfg);
  for (std::size_t e = 1; e < result.loss_history.size(); ++e) {
    CHECK(result.loss_history[e] <= result.loss_history[e - 1] + 1e-12);
  }
}

TEST_CASE("checkpoint round trip is bit exact") {
  const LabeledDataset ds = testing::blob_fixture(3, 25, 4, 8.0, 1.0, 5);
  TrainConfig cfg;
  cfg.epochs = 5;
  Classifier model =
      train(make_classifier(4, {8, 8}, 3, 2), ds.features, ds.labels, cfg).model;
  model.primed = true;  // flag must survive the round trip

  const std::string path =
      (std::filesystem::temp_directory_path() / "cct_nn_checkpoint.bin").string();
  save_classifier(model, path);
  const Classifier restored = load_classifier(path);
  CHECK(bitwise_equal(model, restored));
  CHECK(restored.primed == model.primed);

  const Matrix probe = Matrix::Random(4, 4);
  CHECK(forward(model, probe).logits == forward(restored, probe).logits);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects corrupt files") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "cct_nn_bad.bin").string();
  std::ofstream os(path, std::ios::binary);
  os << "not a checkpoint";
  os.close();
  CHECK_THROWS(load_classifier(path));
  std::filesystem::remove(path);
}
