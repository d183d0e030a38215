#pragma once

#include "cct/nn.hpp"
#include "cct/types.hpp"

#include <optional>
#include <vector>

namespace cct {

/// Inputs of the confidence-threshold formula. `a_init` is the base accuracy
/// as a fraction in (0, 1]; `iteration` is 1-based.
struct CtParams {
  int n_incr = 1;
  int iteration = 1;
  double a = 10.0;
  double a_init = 1.0;
  double bias = 0.0;
};

/// ((n_incr * iteration) + a) / a_init + bias. Strictly positive and
/// non-decreasing in both iteration and n_incr.
double compute_ct(const CtParams& params);

enum class SampleFlag : int { known = 0, unknown = 1 };

/// A sample is known iff max(p) exceeds ct times the mean of the remaining
/// probabilities (one occurrence of the max removed, lowest index on ties).
SampleFlag flag_sample(const Vector& probs, double ct);

struct DetectionResult {
  std::vector<SampleFlag> flags;       // one per sample
  std::vector<Index> unknown_samples;  // indices where flag == unknown
  std::vector<Index> known_samples;    // complementary indices
  std::vector<int> known_predictions;  // argmax class, parallel to known_samples
};

/// Runs the flagging rule over every sample using the primed model's full
/// probability vector (priming node included).
DetectionResult detect_unknowns(const Classifier& model, const Matrix& samples, double ct);

/// Fixed-cutoff open-set baseline: the argmax class when its probability
/// reaches sigma, otherwise nothing (the unknown marker).
std::optional<int> evm_threshold(const Vector& probs, double sigma);

}  // namespace cct
