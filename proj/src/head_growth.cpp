#include "cct/head_growth.hpp"

#include "cct/metrics.hpp"

#include <stdexcept>

namespace cct {

namespace {

void check_params(const HeadGrowthParams& params) {
  if (params.divisor < 1.0) {
    throw std::invalid_argument("head growth: divisor must be >= 1");
  }
}

// The seed row for a new output node: per-connection sums over the existing
// rows divided by the configured constant, biases treated the same way.
void append_seeded_rows(DenseLayer& head, int n_new, double divisor) {
  const Index k = head.out_dim();
  const Vector weight_sums = head.weights.colwise().sum().transpose() / divisor;
  const double bias_sum = head.biases.sum() / divisor;

  Matrix weights(k + n_new, head.in_dim());
  Vector biases(k + n_new);
  weights.topRows(k) = head.weights;
  biases.head(k) = head.biases;
  for (int i = 0; i < n_new; ++i) {
    weights.row(k + i) = weight_sums.transpose();
    biases(k + i) = bias_sum;
  }
  head.weights = std::move(weights);
  head.biases = std::move(biases);
}

}  // namespace

Classifier add_priming_node(const Classifier& model, const HeadGrowthParams& params) {
  check_params(params);
  if (model.class_count < 1 || model.head.out_dim() != model.class_count) {
    throw std::invalid_argument("head growth: model has no trained head");
  }
  if (model.primed) {
    throw std::invalid_argument("head growth: model already carries a priming node");
  }
  Classifier primed = model;
  append_seeded_rows(primed.head, 1, params.divisor);
  primed.class_count = model.class_count + 1;
  primed.primed = true;
  return primed;
}

Classifier instantiate_class_nodes(const Classifier& model, int n_new,
                                   const HeadGrowthParams& params) {
  check_params(params);
  if (!model.primed) {
    throw std::invalid_argument("head growth: model is not primed");
  }
  if (n_new < 1) {
    throw std::invalid_argument("head growth: n_new must be >= 1");
  }
  Classifier grown = strip_priming_node(model);
  append_seeded_rows(grown.head, n_new, params.divisor);
  grown.class_count += n_new;
  return grown;
}

Classifier strip_priming_node(const Classifier& model) {
  if (!model.primed) {
    throw std::invalid_argument("head growth: model is not primed");
  }
  Classifier stripped = model;
  const Index k = model.head.out_dim() - 1;
  stripped.head.weights = model.head.weights.topRows(k).eval();
  stripped.head.biases = model.head.biases.head(k).eval();
  stripped.class_count = model.class_count - 1;
  stripped.primed = false;
  return stripped;
}

double priming_disruption(const Classifier& model_before, const Classifier& model_after,
                          const Matrix& test_inputs, const std::vector<int>& test_labels) {
  if (model_before.input_dim() != model_after.input_dim() ||
      model_before.input_dim() != test_inputs.cols()) {
    throw std::invalid_argument("priming disruption: feature dimension mismatch");
  }
  const std::vector<int> before = predict(model_before, test_inputs);
  const std::vector<int> after = predict(model_after, test_inputs);
  // A prediction on any node beyond the original head (the priming node) can
  // never match a label from the original classes, so plain accuracy already
  // counts it as wrong.
  return accuracy(before, test_labels) - accuracy(after, test_labels);
}

}  // namespace cct
