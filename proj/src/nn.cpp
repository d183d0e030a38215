#include "cct/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cct {

namespace {

constexpr double kProbClamp = 1e-12;  // floor inside log() of the loss

void check_labels(const std::vector<int>& labels, int class_count, Index n_rows) {
  if (labels.empty()) {
    throw std::invalid_argument("nn: empty label set");
  }
  if (static_cast<Index>(labels.size()) != n_rows) {
    throw std::invalid_argument("nn: label count does not match input rows");
  }
  for (int y : labels) {
    if (y < 0 || y >= class_count) {
      throw std::invalid_argument("nn: label out of range [0, class_count)");
    }
  }
}

void check_input_dim(const Classifier& model, const Matrix& inputs) {
  if (inputs.cols() != model.input_dim()) {
    throw std::invalid_argument("nn: input feature dimension mismatch");
  }
}

Matrix affine(const Matrix& x, const DenseLayer& layer) {
  return (x * layer.weights.transpose()).rowwise() + layer.biases.transpose();
}

// Pre- and post-activation values for every layer, as needed by backprop.
struct ForwardTrace {
  std::vector<Matrix> pre_activations;  // one per hidden layer
  std::vector<Matrix> activations;      // one per hidden layer
  Matrix logits;
  Matrix probabilities;
};

ForwardTrace forward_trace(const Classifier& model, const Matrix& inputs) {
  ForwardTrace trace;
  trace.pre_activations.reserve(model.hidden.size());
  trace.activations.reserve(model.hidden.size());
  const Matrix* current = &inputs;
  for (const DenseLayer& layer : model.hidden) {
    trace.pre_activations.push_back(affine(*current, layer));
    trace.activations.push_back(trace.pre_activations.back().cwiseMax(0.0));
    current = &trace.activations.back();
  }
  trace.logits = affine(*current, model.head);
  trace.probabilities = softmax_rows(trace.logits);
  return trace;
}

double mean_cross_entropy(const Matrix& probabilities, const std::vector<int>& labels) {
  double total = 0.0;
  for (Index i = 0; i < probabilities.rows(); ++i) {
    const double p = probabilities(i, labels[static_cast<std::size_t>(i)]);
    total -= std::log(std::max(p, kProbClamp));
  }
  return total / static_cast<double>(probabilities.rows());
}

// Backprop of the mean cross-entropy loss given a completed forward trace.
Gradients backward(const Classifier& model, const Matrix& inputs,
                   const std::vector<int>& labels, const ForwardTrace& trace) {
  const Index n = inputs.rows();
  Gradients grads;
  grads.layers.resize(model.hidden.size() + 1);

  Matrix delta = trace.probabilities;  // n x class_count
  for (Index i = 0; i < n; ++i) {
    delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  delta /= static_cast<double>(n);

  const Matrix& penultimate =
      model.hidden.empty() ? inputs : trace.activations.back();
  grads.layers.back().weights = delta.transpose() * penultimate;
  grads.layers.back().biases = delta.colwise().sum().transpose();

  Matrix upstream = delta * model.head.weights;  // n x last_hidden_dim
  for (std::size_t li = model.hidden.size(); li-- > 0;) {
    Matrix local = upstream.cwiseProduct(
        (trace.pre_activations[li].array() > 0.0).cast<double>().matrix());
    const Matrix& below = (li == 0) ? inputs : trace.activations[li - 1];
    grads.layers[li].weights = local.transpose() * below;
    grads.layers[li].biases = local.colwise().sum().transpose();
    if (li > 0) {
      upstream = local * model.hidden[li].weights;
    }
  }
  return grads;
}

void apply_step(Classifier& model, const Gradients& grads, double learning_rate) {
  for (std::size_t li = 0; li < model.hidden.size(); ++li) {
    model.hidden[li].weights -= learning_rate * grads.layers[li].weights;
    model.hidden[li].biases -= learning_rate * grads.layers[li].biases;
  }
  model.head.weights -= learning_rate * grads.layers.back().weights;
  model.head.biases -= learning_rate * grads.layers.back().biases;
}

DenseLayer init_layer(Index out_dim, Index in_dim, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  DenseLayer layer;
  layer.weights = Matrix::NullaryExpr(out_dim, in_dim, [&]() { return dist(rng); });
  layer.biases = Vector::Zero(out_dim);
  return layer;
}

template <typename T>
void write_pod(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) {
    throw std::runtime_error("nn: truncated checkpoint file");
  }
  return value;
}

void write_layer(std::ostream& os, const DenseLayer& layer) {
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(layer.out_dim()));
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(layer.in_dim()));
  os.write(reinterpret_cast<const char*>(layer.weights.data()),
           static_cast<std::streamsize>(sizeof(double) * layer.weights.size()));
  os.write(reinterpret_cast<const char*>(layer.biases.data()),
           static_cast<std::streamsize>(sizeof(double) * layer.biases.size()));
}

DenseLayer read_layer(std::istream& is) {
  const auto out_dim = static_cast<Index>(read_pod<std::uint64_t>(is));
  const auto in_dim = static_cast<Index>(read_pod<std::uint64_t>(is));
  if (out_dim <= 0 || in_dim <= 0) {
    throw std::runtime_error("nn: corrupt checkpoint layer dimensions");
  }
  DenseLayer layer;
  layer.weights.resize(out_dim, in_dim);
  layer.biases.resize(out_dim);
  is.read(reinterpret_cast<char*>(layer.weights.data()),
          static_cast<std::streamsize>(sizeof(double) * layer.weights.size()));
  is.read(reinterpret_cast<char*>(layer.biases.data()),
          static_cast<std::streamsize>(sizeof(double) * layer.biases.size()));
  if (!is) {
    throw std::runtime_error("nn: truncated checkpoint file");
  }
  if (!layer.weights.allFinite() || !layer.biases.allFinite()) {
    throw std::runtime_error("nn: non-finite values in checkpoint");
  }
  return layer;
}

constexpr std::uint32_t kCheckpointMagic = 0x4354434dU;  // "MCTC" little-endian
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

namespace detail {

Vector softmax_impl(const Vector& logits) {
  if (logits.size() == 0) {
    throw std::invalid_argument("softmax: empty input");
  }
  if (!logits.allFinite()) {
    throw std::invalid_argument("softmax: non-finite entry");
  }
  const double shift = logits.maxCoeff();
  Vector exps = (logits.array() - shift).exp();
  return (exps / exps.sum()).cwiseMax(std::numeric_limits<double>::min());
}

}  // namespace detail

Matrix softmax_rows(const Matrix& logits) {
  if (logits.rows() == 0 || logits.cols() == 0) {
    throw std::invalid_argument("softmax: empty input");
  }
  Matrix probs(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    probs.row(i) = detail::softmax_impl(logits.row(i).transpose()).transpose();
  }
  return probs;
}

Classifier make_classifier(Index input_dim, const std::vector<Index>& hidden_dims,
                           int class_count, std::uint64_t seed) {
  if (input_dim <= 0 || class_count <= 0) {
    throw std::invalid_argument("nn: dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  Classifier model;
  Index in_dim = input_dim;
  for (Index width : hidden_dims) {
    if (width <= 0) {
      throw std::invalid_argument("nn: hidden width must be positive");
    }
    model.hidden.push_back(init_layer(width, in_dim, rng));
    in_dim = width;
  }
  model.head = init_layer(class_count, in_dim, rng);
  model.class_count = class_count;
  return model;
}

ForwardResult forward(const Classifier& model, const Matrix& inputs) {
  check_input_dim(model, inputs);
  ForwardTrace trace = forward_trace(model, inputs);
  ForwardResult result;
  result.logits = std::move(trace.logits);
  result.probabilities = std::move(trace.probabilities);
  result.penultimate =
      model.hidden.empty() ? inputs : std::move(trace.activations.back());
  return result;
}

double cross_entropy(const Classifier& model, const Matrix& inputs,
                     const std::vector<int>& labels) {
  check_input_dim(model, inputs);
  check_labels(labels, model.class_count, inputs.rows());
  return mean_cross_entropy(forward_trace(model, inputs).probabilities, labels);
}

Gradients gradient(const Classifier& model, const Matrix& inputs,
                   const std::vector<int>& labels) {
  if (inputs.rows() == 0) {
    throw std::invalid_argument("nn: empty batch");
  }
  check_input_dim(model, inputs);
  check_labels(labels, model.class_count, inputs.rows());
  return backward(model, inputs, labels, forward_trace(model, inputs));
}

TrainResult train(const Classifier& model, const Matrix& inputs,
                  const std::vector<int>& labels, const TrainConfig& cfg) {
  check_input_dim(model, inputs);
  check_labels(labels, model.class_count, inputs.rows());
  if (cfg.learning_rate < 0.0) {
    throw std::invalid_argument("nn: negative learning rate");
  }
  if (cfg.epochs <= 0 || cfg.batch_size <= 0) {
    throw std::invalid_argument("nn: epochs and batch_size must be positive");
  }

  TrainResult result;
  result.model = model;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

  const Index n = inputs.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(cfg.seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (Index start = 0; start < n; start += cfg.batch_size) {
      const Index len = std::min<Index>(cfg.batch_size, n - start);
      std::vector<Index> batch_rows(order.begin() + start, order.begin() + start + len);
      Matrix batch_x = gather_rows(inputs, batch_rows);
      std::vector<int> batch_y(static_cast<std::size_t>(len));
      for (Index i = 0; i < len; ++i) {
        batch_y[static_cast<std::size_t>(i)] =
            labels[static_cast<std::size_t>(batch_rows[static_cast<std::size_t>(i)])];
      }
      ForwardTrace trace = forward_trace(result.model, batch_x);
      epoch_loss += mean_cross_entropy(trace.probabilities, batch_y) *
                    static_cast<double>(len);
      Gradients grads = backward(result.model, batch_x, batch_y, trace);
      apply_step(result.model, grads, cfg.learning_rate);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

std::vector<int> predict(const Classifier& model, const Matrix& inputs) {
  const ForwardResult fwd = forward(model, inputs);
  std::vector<int> out(static_cast<std::size_t>(inputs.rows()));
  for (Index i = 0; i < inputs.rows(); ++i) {
    Index argmax = 0;
    fwd.logits.row(i).maxCoeff(&argmax);
    out[static_cast<std::size_t>(i)] = static_cast<int>(argmax);
  }
  return out;
}

void save_classifier(const Classifier& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("nn: cannot open checkpoint for writing: " + path);
  }
  write_pod(os, kCheckpointMagic);
  write_pod(os, kCheckpointVersion);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.class_count));
  write_pod<std::uint8_t>(os, model.primed ? 1 : 0);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.hidden.size()));
  for (const DenseLayer& layer : model.hidden) {
    write_layer(os, layer);
  }
  write_layer(os, model.head);
  if (!os) {
    throw std::runtime_error("nn: checkpoint write failed: " + path);
  }
}

Classifier load_classifier(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("nn: cannot open checkpoint: " + path);
  }
  if (read_pod<std::uint32_t>(is) != kCheckpointMagic) {
    throw std::runtime_error("nn: bad checkpoint magic: " + path);
  }
  if (read_pod<std::uint32_t>(is) != kCheckpointVersion) {
    throw std::runtime_error("nn: unsupported checkpoint version: " + path);
  }
  Classifier model;
  model.class_count = static_cast<int>(read_pod<std::uint32_t>(is));
  model.primed = read_pod<std::uint8_t>(is) != 0;
  const auto hidden_count = read_pod<std::uint32_t>(is);
  model.hidden.reserve(hidden_count);
  for (std::uint32_t i = 0; i < hidden_count; ++i) {
    model.hidden.push_back(read_layer(is));
  }
  model.head = read_layer(is);
  if (model.head.out_dim() != model.class_count) {
    throw std::runtime_error("nn: checkpoint head size disagrees with class count");
  }
  return model;
}

}  // namespace cct
