#pragma once

#include "cct/data.hpp"
#include "cct/nn.hpp"
#include "cct/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace cct::testing {

inline LabeledDataset blob_fixture(int n_classes, int per_class, int dim,
                                   double separation, double cluster_std,
                                   std::uint64_t seed, double test_fraction = 0.2) {
  BlobSpec spec;
  spec.n_classes = n_classes;
  spec.per_class = per_class;
  spec.dim = dim;
  spec.center_separation = separation;
  spec.cluster_std = cluster_std;
  spec.seed = seed;
  return split_train_test(synth_blobs(spec), test_fraction, mix_seed(seed, 0x517));
}

inline void write_be32(std::ofstream& os, std::uint32_t value) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>((value >> 24) & 0xff),
      static_cast<unsigned char>((value >> 16) & 0xff),
      static_cast<unsigned char>((value >> 8) & 0xff),
      static_cast<unsigned char>(value & 0xff)};
  os.write(reinterpret_cast<const char*>(bytes), 4);
}

/// Writes a big-endian IDX image/label pair. Images are row-major uint8,
/// one per entry of `images` (each of size rows*cols).
inline void write_idx_pair(const std::string& images_path, const std::string& labels_path,
                           const std::vector<std::vector<unsigned char>>& images,
                           const std::vector<unsigned char>& labels,
                           std::uint32_t rows, std::uint32_t cols,
                           std::uint32_t image_magic = 0x00000803,
                           std::uint32_t label_magic = 0x00000801,
                           std::uint32_t label_count_override = 0) {
  std::ofstream imgs(images_path, std::ios::binary);
  write_be32(imgs, image_magic);
  write_be32(imgs, static_cast<std::uint32_t>(images.size()));
  write_be32(imgs, rows);
  write_be32(imgs, cols);
  for (const auto& image : images) {
    imgs.write(reinterpret_cast<const char*>(image.data()),
               static_cast<std::streamsize>(image.size()));
  }

  std::ofstream lbls(labels_path, std::ios::binary);
  write_be32(lbls, label_magic);
  write_be32(lbls, label_count_override != 0 ? label_count_override
                                             : static_cast<std::uint32_t>(labels.size()));
  lbls.write(reinterpret_cast<const char*>(labels.data()),
             static_cast<std::streamsize>(labels.size()));
}

/// Synthesizes an image-classification IDX pair. Each class owns a disjoint
/// scatter of "stroke" pixels; samples light that stroke over a dim
/// background with per-sample pixel dropout and Gaussian noise. Classes are
/// feature-disjoint the way distinct glyph strokes are, which keeps novel
/// classes genuinely novel to a trained model.
inline void write_image_fixture(const std::string& images_path,
                                const std::string& labels_path, int n_classes,
                                int per_class, int side, double noise_std,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_std);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t pixels = static_cast<std::size_t>(side) * side;
  std::vector<std::size_t> scatter(pixels);
  std::iota(scatter.begin(), scatter.end(), std::size_t{0});
  std::shuffle(scatter.begin(), scatter.end(), rng);
  const std::size_t stroke_size = pixels / static_cast<std::size_t>(n_classes);

  std::vector<std::vector<unsigned char>> images;
  std::vector<unsigned char> labels;
  for (int c = 0; c < n_classes; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * stroke_size;
    for (int s = 0; s < per_class; ++s) {
      std::vector<unsigned char> image(pixels);
      for (std::size_t p = 0; p < pixels; ++p) {
        image[p] = static_cast<unsigned char>(std::clamp(15.0 + noise(rng), 0.0, 255.0));
      }
      for (std::size_t k = 0; k < stroke_size; ++k) {
        if (unit(rng) < 0.2) {
          continue;  // per-sample stroke dropout
        }
        const std::size_t p = scatter[begin + k];
        image[p] = static_cast<unsigned char>(std::clamp(205.0 + noise(rng), 0.0, 255.0));
      }
      images.push_back(std::move(image));
      labels.push_back(static_cast<unsigned char>(c));
    }
  }
  write_idx_pair(images_path, labels_path, images, labels,
                 static_cast<std::uint32_t>(side), static_cast<std::uint32_t>(side));
}

/// Central finite difference of the training loss with respect to one
/// parameter of the model; the independent check for analytic gradients.
template <typename GetParam>
double finite_difference(Classifier model, const Matrix& inputs,
                         const std::vector<int>& labels, GetParam&& param,
                         double h = 1e-5) {
  double& value = param(model);
  const double saved = value;
  value = saved + h;
  const double loss_plus = cross_entropy(model, inputs, labels);
  value = saved - h;
  const double loss_minus = cross_entropy(model, inputs, labels);
  value = saved;
  return (loss_plus - loss_minus) / (2.0 * h);
}

/// Composite Simpson quadrature of t^(a-1) (1-t)^(b-1) over [0, x], scaled by
/// 1/B(a, b); independent route for incomplete-beta checks (needs a >= 1 and
/// x away from 1 so the integrand stays bounded).
inline double incomplete_beta_quadrature(double a, double b, double x,
                                         int intervals = 20000) {
  const auto integrand = [a, b](double t) {
    return std::pow(t, a - 1.0) * std::pow(1.0 - t, b - 1.0);
  };
  const double h = x / intervals;
  double sum = integrand(1e-300) + integrand(x);
  for (int i = 1; i < intervals; ++i) {
    sum += integrand(i * h) * (i % 2 == 0 ? 2.0 : 4.0);
  }
  const double integral = sum * h / 3.0;
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return integral / std::exp(log_beta);
}

inline double f_pvalue_quadrature(double f_statistic, double df1, double df2) {
  return incomplete_beta_quadrature(0.5 * df2, 0.5 * df1,
                                    df2 / (df2 + df1 * f_statistic));
}

}  // namespace cct::testing
