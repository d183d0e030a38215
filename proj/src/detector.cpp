#include "cct/detector.hpp"

#include <stdexcept>

namespace cct {

double compute_ct(const CtParams& params) {
  if (params.a_init <= 0.0) {
    throw std::invalid_argument("compute_ct: a_init must be positive");
  }
  if (params.n_incr < 1 || params.iteration < 1) {
    throw std::invalid_argument("compute_ct: n_incr and iteration must be >= 1");
  }
  if (params.bias < 0.0) {
    throw std::invalid_argument("compute_ct: bias must be non-negative");
  }
  return (static_cast<double>(params.n_incr) * params.iteration + params.a) /
             params.a_init +
         params.bias;
}

SampleFlag flag_sample(const Vector& probs, double ct) {
  if (probs.size() < 2) {
    throw std::invalid_argument("flag_sample: need at least 2 probabilities");
  }
  if (ct <= 0.0) {
    throw std::invalid_argument("flag_sample: ct must be positive");
  }
  Index argmax = 0;
  const double top = probs.maxCoeff(&argmax);  // first occurrence on ties
  const double rest_mean =
      (probs.sum() - top) / static_cast<double>(probs.size() - 1);
  return top > rest_mean * ct ? SampleFlag::known : SampleFlag::unknown;
}

DetectionResult detect_unknowns(const Classifier& model, const Matrix& samples, double ct) {
  if (!model.primed) {
    throw std::invalid_argument("detect_unknowns: model is not primed");
  }
  if (samples.rows() == 0) {
    throw std::invalid_argument("detect_unknowns: empty sample batch");
  }
  const ForwardResult fwd = forward(model, samples);

  DetectionResult result;
  result.flags.reserve(static_cast<std::size_t>(samples.rows()));
  for (Index i = 0; i < samples.rows(); ++i) {
    const Vector probs = fwd.probabilities.row(i).transpose();
    const SampleFlag flag = flag_sample(probs, ct);
    result.flags.push_back(flag);
    if (flag == SampleFlag::unknown) {
      result.unknown_samples.push_back(i);
    } else {
      Index argmax = 0;
      probs.maxCoeff(&argmax);
      result.known_samples.push_back(i);
      result.known_predictions.push_back(static_cast<int>(argmax));
    }
  }
  return result;
}

std::optional<int> evm_threshold(const Vector& probs, double sigma) {
  if (sigma <= 0.0 || sigma > 1.0) {
    throw std::invalid_argument("evm_threshold: sigma must be in (0, 1]");
  }
  if (probs.size() == 0) {
    throw std::invalid_argument("evm_threshold: empty probability vector");
  }
  Index argmax = 0;
  const double top = probs.maxCoeff(&argmax);
  if (top >= sigma) {
    return static_cast<int>(argmax);
  }
  return std::nullopt;
}

}  // namespace cct
