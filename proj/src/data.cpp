#include "cct/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cct {

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& is, const std::string& path) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) {
    throw std::runtime_error("idx: truncated file: " + path);
  }
  return (static_cast<std::uint32_t>(buf[0]) << 24) |
         (static_cast<std::uint32_t>(buf[1]) << 16) |
         (static_cast<std::uint32_t>(buf[2]) << 8) |
         static_cast<std::uint32_t>(buf[3]);
}

void build_splits_all_train(LabeledDataset& dataset) {
  std::unordered_map<int, std::size_t> slot;
  for (int id : dataset.class_ids) {
    slot[id] = dataset.splits.size();
    dataset.splits.push_back(ClassSplit{id, {}, {}});
  }
  for (Index i = 0; i < dataset.size(); ++i) {
    dataset.splits[slot[dataset.labels[static_cast<std::size_t>(i)]]].train.push_back(i);
  }
}

std::vector<int> distinct_in_order(const std::vector<int>& labels) {
  std::vector<int> ids;
  std::unordered_map<int, bool> seen;
  for (int y : labels) {
    if (!seen[y]) {
      seen[y] = true;
      ids.push_back(y);
    }
  }
  return ids;
}

template <typename T>
void write_pod(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& path) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) {
    throw std::runtime_error("dataset: truncated file: " + path);
  }
  return value;
}

constexpr std::uint32_t kDumpMagic = 0x44544343U;  // "CCTD" little-endian
constexpr std::uint32_t kDumpVersion = 1;

}  // namespace

const ClassSplit& LabeledDataset::split_for(int class_id) const {
  for (const ClassSplit& split : splits) {
    if (split.class_id == class_id) return split;
  }
  throw std::invalid_argument("dataset: unknown class id " + std::to_string(class_id));
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream images(images_path, std::ios::binary);
  if (!images) {
    throw std::runtime_error("idx: cannot open " + images_path);
  }
  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) {
    throw std::runtime_error("idx: cannot open " + labels_path);
  }

  if (read_be32(images, images_path) != kIdxImageMagic) {
    throw std::runtime_error("idx: bad image magic in " + images_path);
  }
  if (read_be32(labels, labels_path) != kIdxLabelMagic) {
    throw std::runtime_error("idx: bad label magic in " + labels_path);
  }

  const std::uint32_t image_count = read_be32(images, images_path);
  const std::uint32_t rows = read_be32(images, images_path);
  const std::uint32_t cols = read_be32(images, images_path);
  const std::uint32_t label_count = read_be32(labels, labels_path);
  if (image_count != label_count) {
    throw std::runtime_error("idx: image/label count mismatch (" +
                             std::to_string(image_count) + " vs " +
                             std::to_string(label_count) + ")");
  }
  if (image_count == 0 || rows == 0 || cols == 0) {
    throw std::runtime_error("idx: empty dataset in " + images_path);
  }

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> pixel_buf(pixels);
  LabeledDataset dataset;
  dataset.features.resize(static_cast<Index>(image_count), static_cast<Index>(pixels));
  dataset.labels.resize(image_count);

  for (std::uint32_t i = 0; i < image_count; ++i) {
    images.read(reinterpret_cast<char*>(pixel_buf.data()),
                static_cast<std::streamsize>(pixels));
    if (!images) {
      throw std::runtime_error("idx: truncated file: " + images_path);
    }
    for (std::size_t p = 0; p < pixels; ++p) {
      dataset.features(static_cast<Index>(i), static_cast<Index>(p)) =
          static_cast<double>(pixel_buf[p]) / 255.0;
    }
    unsigned char label = 0;
    labels.read(reinterpret_cast<char*>(&label), 1);
    if (!labels) {
      throw std::runtime_error("idx: truncated file: " + labels_path);
    }
    dataset.labels[i] = static_cast<int>(label);
  }

  dataset.class_ids = distinct_in_order(dataset.labels);
  std::sort(dataset.class_ids.begin(), dataset.class_ids.end());
  build_splits_all_train(dataset);
  return dataset;
}

LabeledDataset load_embedding_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("embedding csv: cannot open " + path);
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> raw_labels;
  std::string line;
  std::size_t line_number = 0;
  std::size_t feature_dim = 0;
  while (std::getline(is, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(ss, field, ',')) {
      std::size_t consumed = 0;
      double v = 0.0;
      try {
        v = std::stod(field, &consumed);
      } catch (const std::exception&) {
        throw std::runtime_error("embedding csv: non-numeric field at line " +
                                 std::to_string(line_number));
      }
      while (consumed < field.size() && std::isspace(static_cast<unsigned char>(field[consumed]))) {
        ++consumed;
      }
      if (consumed != field.size()) {
        throw std::runtime_error("embedding csv: non-numeric field at line " +
                                 std::to_string(line_number));
      }
      values.push_back(v);
    }
    if (values.size() < 2) {
      throw std::runtime_error("embedding csv: row needs a label and features at line " +
                               std::to_string(line_number));
    }
    const double label_value = values.front();
    if (label_value != std::floor(label_value)) {
      throw std::runtime_error("embedding csv: non-integer label at line " +
                               std::to_string(line_number));
    }
    values.erase(values.begin());
    if (feature_dim == 0) {
      feature_dim = values.size();
    } else if (values.size() != feature_dim) {
      throw std::runtime_error("embedding csv: ragged row at line " +
                               std::to_string(line_number));
    }
    raw_labels.push_back(static_cast<int>(label_value));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) {
    throw std::runtime_error("embedding csv: empty file " + path);
  }

  // Dense ids in order of first appearance.
  std::unordered_map<int, int> remap;
  LabeledDataset dataset;
  dataset.labels.reserve(raw_labels.size());
  for (int raw : raw_labels) {
    auto it = remap.find(raw);
    if (it == remap.end()) {
      it = remap.emplace(raw, static_cast<int>(remap.size())).first;
      dataset.class_ids.push_back(it->second);
    }
    dataset.labels.push_back(it->second);
  }

  dataset.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(feature_dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < feature_dim; ++j) {
      dataset.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  build_splits_all_train(dataset);
  return dataset;
}

LabeledDataset synth_blobs(const BlobSpec& spec) {
  if (spec.n_classes <= 0 || spec.per_class <= 0 || spec.dim <= 0) {
    throw std::invalid_argument("blobs: counts and dimension must be positive");
  }
  if (spec.center_separation <= 0.0 || spec.cluster_std <= 0.0) {
    throw std::invalid_argument("blobs: separation and std must be positive");
  }
  const bool basis_layout = spec.dim >= spec.n_classes;
  if (!basis_layout && (spec.dim >= 63 ? false : (1LL << spec.dim) < spec.n_classes)) {
    throw std::invalid_argument("blobs: dimension too small for the class count");
  }

  Matrix centers = Matrix::Zero(spec.n_classes, spec.dim);
  for (int c = 0; c < spec.n_classes; ++c) {
    if (basis_layout) {
      centers(c, c) = spec.center_separation;
    } else {
      for (int j = 0; j < spec.dim; ++j) {
        centers(c, j) = ((c >> j) & 1) ? spec.center_separation : 0.0;
      }
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.cluster_std);
  LabeledDataset dataset;
  const Index n = static_cast<Index>(spec.n_classes) * spec.per_class;
  dataset.features.resize(n, spec.dim);
  dataset.labels.resize(static_cast<std::size_t>(n));
  Index row = 0;
  for (int c = 0; c < spec.n_classes; ++c) {
    dataset.class_ids.push_back(c);
    for (int s = 0; s < spec.per_class; ++s, ++row) {
      for (int j = 0; j < spec.dim; ++j) {
        dataset.features(row, j) = centers(c, j) + noise(rng);
      }
      dataset.labels[static_cast<std::size_t>(row)] = c;
    }
  }
  build_splits_all_train(dataset);
  return dataset;
}

LabeledDataset split_train_test(const LabeledDataset& dataset, double test_fraction,
                                std::uint64_t seed) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw std::invalid_argument("split: test fraction must be in (0, 1)");
  }
  LabeledDataset out = dataset;
  std::mt19937_64 rng(seed);
  for (ClassSplit& split : out.splits) {
    std::vector<Index> members = split.train;
    members.insert(members.end(), split.test.begin(), split.test.end());
    std::sort(members.begin(), members.end());
    const auto n = static_cast<Index>(members.size());
    if (n < 2) {
      throw std::invalid_argument("split: class " + std::to_string(split.class_id) +
                                  " has fewer than 2 samples");
    }
    Index test_count = static_cast<Index>(
        std::floor(test_fraction * static_cast<double>(n) + 0.5));
    test_count = std::clamp<Index>(test_count, 1, n - 1);
    std::shuffle(members.begin(), members.end(), rng);
    split.test.assign(members.begin(), members.begin() + test_count);
    split.train.assign(members.begin() + test_count, members.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.train.begin(), split.train.end());
  }
  return out;
}

void save_dataset(const LabeledDataset& dataset, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("dataset: cannot open for writing: " + path);
  }
  write_pod(os, kDumpMagic);
  write_pod(os, kDumpVersion);
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(dataset.size()));
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(dataset.dim()));
  os.write(reinterpret_cast<const char*>(dataset.features.data()),
           static_cast<std::streamsize>(sizeof(double) * dataset.features.size()));
  for (int y : dataset.labels) {
    write_pod<std::int32_t>(os, y);
  }
  write_pod<std::uint64_t>(os, dataset.class_ids.size());
  for (std::size_t i = 0; i < dataset.class_ids.size(); ++i) {
    const ClassSplit& split = dataset.splits[i];
    write_pod<std::int32_t>(os, dataset.class_ids[i]);
    write_pod<std::uint64_t>(os, split.train.size());
    for (Index idx : split.train) write_pod<std::int64_t>(os, idx);
    write_pod<std::uint64_t>(os, split.test.size());
    for (Index idx : split.test) write_pod<std::int64_t>(os, idx);
  }
  if (!os) {
    throw std::runtime_error("dataset: write failed: " + path);
  }
}

LabeledDataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("dataset: cannot open " + path);
  }
  if (read_pod<std::uint32_t>(is, path) != kDumpMagic) {
    throw std::runtime_error("dataset: bad magic in " + path);
  }
  if (read_pod<std::uint32_t>(is, path) != kDumpVersion) {
    throw std::runtime_error("dataset: unsupported version in " + path);
  }
  const auto n = static_cast<Index>(read_pod<std::uint64_t>(is, path));
  const auto d = static_cast<Index>(read_pod<std::uint64_t>(is, path));
  LabeledDataset dataset;
  dataset.features.resize(n, d);
  is.read(reinterpret_cast<char*>(dataset.features.data()),
          static_cast<std::streamsize>(sizeof(double) * dataset.features.size()));
  if (!is) {
    throw std::runtime_error("dataset: truncated file: " + path);
  }
  dataset.labels.resize(static_cast<std::size_t>(n));
  for (auto& y : dataset.labels) {
    y = read_pod<std::int32_t>(is, path);
  }
  const auto class_count = read_pod<std::uint64_t>(is, path);
  for (std::uint64_t c = 0; c < class_count; ++c) {
    ClassSplit split;
    split.class_id = read_pod<std::int32_t>(is, path);
    dataset.class_ids.push_back(split.class_id);
    const auto train_count = read_pod<std::uint64_t>(is, path);
    split.train.reserve(train_count);
    for (std::uint64_t i = 0; i < train_count; ++i) {
      split.train.push_back(static_cast<Index>(read_pod<std::int64_t>(is, path)));
    }
    const auto test_count = read_pod<std::uint64_t>(is, path);
    split.test.reserve(test_count);
    for (std::uint64_t i = 0; i < test_count; ++i) {
      split.test.push_back(static_cast<Index>(read_pod<std::int64_t>(is, path)));
    }
    dataset.splits.push_back(std::move(split));
  }
  return dataset;
}

Matrix train_features(const LabeledDataset& dataset, int class_id) {
  return gather_rows(dataset.features, dataset.split_for(class_id).train);
}

Matrix test_features(const LabeledDataset& dataset, int class_id) {
  return gather_rows(dataset.features, dataset.split_for(class_id).test);
}

}  // namespace cct
