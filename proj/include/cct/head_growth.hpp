#pragma once

#include "cct/nn.hpp"
#include "cct/types.hpp"

#include <vector>

namespace cct {

/// New output nodes are seeded with the per-connection sums of the existing
/// head rows divided by `divisor`, so a large divisor keeps the new logit a
/// tiny fraction of the trained ones.
struct HeadGrowthParams {
  double divisor = 1000.0;
};

/// Appends the unknown-catching node to the head. Existing rows are left
/// untouched, so the argmax over the original class logits is preserved
/// exactly.
Classifier add_priming_node(const Classifier& model, const HeadGrowthParams& params);

/// Drops the priming node and appends n_new class nodes, each seeded from the
/// surviving rows by the same sum/divisor rule.
Classifier instantiate_class_nodes(const Classifier& model, int n_new,
                                   const HeadGrowthParams& params);

/// Inverse of add_priming_node; restores the pre-surgery head bit-exactly.
Classifier strip_priming_node(const Classifier& model);

/// Accuracy before minus accuracy after on the given test set. A sample whose
/// argmax lands on the priming node counts as mispredicted.
double priming_disruption(const Classifier& model_before, const Classifier& model_after,
                          const Matrix& test_inputs, const std::vector<int>& test_labels);

}  // namespace cct
