#pragma once

#include "cct/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cct {

struct ClassSplit {
  int class_id = 0;
  std::vector<Index> train;  // row indices into features
  std::vector<Index> test;
};

/// Feature vectors with integer class labels and per-class train/test index
/// sets. Loaders place every sample in the train split; split_train_test
/// produces the stratified partition.
struct LabeledDataset {
  Matrix features;             // n x d
  std::vector<int> labels;     // n
  std::vector<int> class_ids;  // ordered distinct labels
  std::vector<ClassSplit> splits;  // parallel to class_ids

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }
  const ClassSplit& split_for(int class_id) const;
};

struct BlobSpec {
  int n_classes = 2;
  int per_class = 100;
  int dim = 2;
  double center_separation = 10.0;
  double cluster_std = 1.0;
  std::uint64_t seed = 0;
};

/// Big-endian IDX pair (image magic 0x00000803, label magic 0x00000801);
/// pixels are scaled by 1/255 and images flattened row-major.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Rows of "label, f1, ..., fd"; labels are remapped to dense 0-based ids in
/// order of first appearance.
LabeledDataset load_embedding_csv(const std::string& path);

/// Isotropic Gaussian blobs with a deterministic center layout: class c sits
/// at center_separation * e_c when dim >= n_classes, otherwise at a binary
/// hypercube corner scaled by center_separation.
LabeledDataset synth_blobs(const BlobSpec& spec);

/// Stratified per class; every class lands in both splits, and the per-class
/// test count deviates from the requested fraction by less than one sample.
LabeledDataset split_train_test(const LabeledDataset& dataset, double test_fraction,
                                std::uint64_t seed);

/// Canonical binary dump; save -> load round-trips bit-exactly.
void save_dataset(const LabeledDataset& dataset, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

Matrix train_features(const LabeledDataset& dataset, int class_id);
Matrix test_features(const LabeledDataset& dataset, int class_id);

}  // namespace cct
