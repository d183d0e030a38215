#pragma once

#include "cct/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cct {

struct DenseLayer {
  Matrix weights;  // out_dim x in_dim
  Vector biases;   // out_dim

  Index in_dim() const { return weights.cols(); }
  Index out_dim() const { return weights.rows(); }
};

/// Feed-forward classifier: ReLU hidden layers followed by a softmax head.
/// The head row count equals class_count and grows as classes are added;
/// `primed` is set while the extra unknown-catching node is attached.
struct Classifier {
  std::vector<DenseLayer> hidden;
  DenseLayer head;
  int class_count = 0;
  bool primed = false;

  Index input_dim() const {
    return hidden.empty() ? head.in_dim() : hidden.front().in_dim();
  }
  Index penultimate_dim() const {
    return hidden.empty() ? head.in_dim() : hidden.back().out_dim();
  }
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 40;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct ForwardResult {
  Matrix logits;         // n x class_count
  Matrix probabilities;  // n x class_count, each row sums to 1
  Matrix penultimate;    // last hidden activation; the input if no hidden layers
};

/// Per-layer gradients of the mean cross-entropy loss, hidden layers first,
/// head last. Shapes mirror the model's layers.
struct Gradients {
  std::vector<DenseLayer> layers;
};

struct TrainResult {
  Classifier model;
  std::vector<double> loss_history;  // mean cross-entropy per epoch
};

/// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
Classifier make_classifier(Index input_dim, const std::vector<Index>& hidden_dims,
                           int class_count, std::uint64_t seed);

/// Numerically stabilized softmax (max subtraction); entries are floored at
/// the smallest positive double so they stay strictly positive even when the
/// exponential underflows.
template <typename Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& logits);

Matrix softmax_rows(const Matrix& logits);

ForwardResult forward(const Classifier& model, const Matrix& inputs);

double cross_entropy(const Classifier& model, const Matrix& inputs,
                     const std::vector<int>& labels);

Gradients gradient(const Classifier& model, const Matrix& inputs,
                   const std::vector<int>& labels);

/// Mini-batch SGD. Pure function of (model, data, cfg): identical seeds give
/// bitwise-identical weight trajectories. A zero learning rate leaves the
/// model unchanged.
TrainResult train(const Classifier& model, const Matrix& inputs,
                  const std::vector<int>& labels, const TrainConfig& cfg);

std::vector<int> predict(const Classifier& model, const Matrix& inputs);

/// Binary checkpoint; save -> load -> forward is bit-exact.
void save_classifier(const Classifier& model, const std::string& path);
Classifier load_classifier(const std::string& path);

namespace detail {
Vector softmax_impl(const Vector& logits);
}

template <typename Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& logits) {
  return detail::softmax_impl(logits.derived());
}

}  // namespace cct
