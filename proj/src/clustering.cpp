#include "cct/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cct {

namespace {

Matrix pairwise_squared_distances(const Matrix& points) {
  const Vector sq = points.rowwise().squaredNorm();
  Matrix d2 = sq.replicate(1, points.rows()) +
              sq.transpose().replicate(points.rows(), 1) -
              2.0 * points * points.transpose();
  return d2.cwiseMax(0.0);  // clip the negative dust from cancellation
}

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Index p = 0; p < a.rows(); ++p) {
    for (Index q = p + 1; q < a.cols(); ++q) {
      sum += 2.0 * a(p, q) * a(p, q);
    }
  }
  return std::sqrt(sum);
}

double uniform_unit(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::vector<Index> kmeanspp_centers(const Matrix& points, int k, std::mt19937_64& rng) {
  const Index n = points.rows();
  std::vector<Index> centers;
  centers.reserve(static_cast<std::size_t>(k));
  centers.push_back(static_cast<Index>(
      std::uniform_int_distribution<Index>(0, n - 1)(rng)));

  Vector best_d2 =
      (points.rowwise() - points.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    const double total = best_d2.sum();
    Index chosen = 0;
    if (total <= 0.0) {
      // Remaining points coincide with the chosen centers; fall back to a
      // uniform pick among all points.
      chosen = static_cast<Index>(std::uniform_int_distribution<Index>(0, n - 1)(rng));
    } else {
      double r = uniform_unit(rng) * total;
      for (Index i = 0; i < n; ++i) {
        r -= best_d2(i);
        if (r <= 0.0) {
          chosen = i;
          break;
        }
        chosen = i;
      }
    }
    centers.push_back(chosen);
    best_d2 = best_d2.cwiseMin(
        (points.rowwise() - points.row(chosen)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

Matrix build_affinity(const Matrix& embeddings, std::optional<double> sigma) {
  const Index n = embeddings.rows();
  if (n < 2) {
    throw std::invalid_argument("affinity: need at least 2 samples");
  }
  const Matrix d2 = pairwise_squared_distances(embeddings);

  double sigma_value = 0.0;
  if (sigma.has_value()) {
    if (*sigma <= 0.0) {
      throw std::invalid_argument("affinity: sigma must be positive");
    }
    sigma_value = *sigma;
  } else {
    std::vector<double> distances;
    distances.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        distances.push_back(std::sqrt(d2(i, j)));
      }
    }
    const std::size_t mid = distances.size() / 2;
    std::nth_element(distances.begin(), distances.begin() + mid, distances.end());
    sigma_value = distances[mid];
    if (sigma_value <= 0.0) {
      throw std::invalid_argument(
          "affinity: median pairwise distance is zero; pass an explicit sigma");
    }
  }

  Matrix affinity = (-d2 / (2.0 * sigma_value * sigma_value)).array().exp();
  affinity.diagonal().setOnes();
  // Enforce exact symmetry; the kernel is symmetric up to rounding.
  affinity = ((affinity + affinity.transpose()) / 2.0).eval();
  return affinity;
}

EigenDecomposition jacobi_eigendecompose(const Matrix& symmetric,
                                         double off_tolerance, int max_sweeps) {
  if (symmetric.rows() != symmetric.cols() || symmetric.rows() == 0) {
    throw std::invalid_argument("jacobi: matrix must be square and non-empty");
  }
  if (!symmetric.isApprox(symmetric.transpose(), 1e-10)) {
    throw std::invalid_argument("jacobi: matrix is not symmetric");
  }

  const Index n = symmetric.rows();
  Matrix a = symmetric;
  Matrix v = Matrix::Identity(n, n);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= off_tolerance) {
      break;
    }
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= off_tolerance / static_cast<double>(n * n)) {
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // A <- J^T A J applied to rows/columns p and q.
        for (Index i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Index i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (Index i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  if (off_diagonal_norm(a) > off_tolerance) {
    throw std::runtime_error("jacobi: did not converge within the sweep limit");
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&a](Index lhs, Index rhs) { return a(lhs, lhs) < a(rhs, rhs); });

  EigenDecomposition decomposition;
  decomposition.eigenvalues.resize(n);
  decomposition.eigenvectors.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    decomposition.eigenvalues(i) = a(order[static_cast<std::size_t>(i)],
                                     order[static_cast<std::size_t>(i)]);
    decomposition.eigenvectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return decomposition;
}

Matrix spectral_embed(const Matrix& affinity, int k) {
  const Index n = affinity.rows();
  if (k < 1 || static_cast<Index>(k) > n) {
    throw std::invalid_argument("spectral_embed: need 1 <= k <= n");
  }
  const Vector degrees = affinity.rowwise().sum();
  if ((degrees.array() <= 0.0).any()) {
    throw std::invalid_argument("spectral_embed: graph has an isolated vertex");
  }

  const Vector inv_sqrt_deg = degrees.array().rsqrt();
  Matrix laplacian = Matrix::Identity(n, n) -
                     (inv_sqrt_deg.asDiagonal() * affinity * inv_sqrt_deg.asDiagonal());
  laplacian = ((laplacian + laplacian.transpose()) / 2.0).eval();

  const EigenDecomposition decomposition = jacobi_eigendecompose(laplacian);
  Matrix embedded = decomposition.eigenvectors.leftCols(k);
  for (Index i = 0; i < n; ++i) {
    const double norm = embedded.row(i).norm();
    if (norm > 0.0) {
      embedded.row(i) /= norm;
    }
  }
  return embedded;
}

ClusterAssignment kmeans(const Matrix& points, int k, std::uint64_t seed) {
  const Index n = points.rows();
  if (k < 1) {
    throw std::invalid_argument("kmeans: k must be >= 1");
  }
  if (n < static_cast<Index>(k)) {
    throw std::invalid_argument("kmeans: fewer points than clusters");
  }

  std::mt19937_64 rng(seed);
  const std::vector<Index> seeds = kmeanspp_centers(points, k, rng);
  Matrix centroids(k, points.cols());
  for (int c = 0; c < k; ++c) {
    centroids.row(c) = points.row(seeds[static_cast<std::size_t>(c)]);
  }

  ClusterAssignment assignment;
  assignment.k = k;
  assignment.labels.assign(static_cast<std::size_t>(n), -1);

  constexpr int kMaxIterations = 300;
  for (int iteration = 0; iteration < kMaxIterations; ++iteration) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d2 = (points.row(i) - centroids.row(c)).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c;
        }
      }
      if (assignment.labels[static_cast<std::size_t>(i)] != best) {
        assignment.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) {
      break;
    }

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const int c = assignment.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) =
            sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        // Reseed an empty cluster with the point farthest from its centroid.
        Index farthest = 0;
        double farthest_d2 = -1.0;
        for (Index i = 0; i < n; ++i) {
          const int owner = assignment.labels[static_cast<std::size_t>(i)];
          const double d2 = (points.row(i) - centroids.row(owner)).squaredNorm();
          if (d2 > farthest_d2) {
            farthest_d2 = d2;
            farthest = i;
          }
        }
        centroids.row(c) = points.row(farthest);
      }
    }
  }
  return assignment;
}

ClusterAssignment spectral_cluster(const Matrix& embeddings, int k, std::uint64_t seed) {
  if (k < 1) {
    throw std::invalid_argument("spectral_cluster: k must be >= 1");
  }
  if (embeddings.rows() < static_cast<Index>(k)) {
    throw std::invalid_argument("spectral_cluster: fewer samples than clusters");
  }
  if (k == 1) {
    ClusterAssignment assignment;
    assignment.k = 1;
    assignment.labels.assign(static_cast<std::size_t>(embeddings.rows()), 0);
    return assignment;
  }
  const Matrix affinity = build_affinity(embeddings);
  const Matrix embedded = spectral_embed(affinity, k);
  return kmeans(embedded, k, seed);
}

}  // namespace cct
