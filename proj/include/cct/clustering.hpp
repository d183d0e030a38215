#pragma once

#include "cct/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace cct {

/// Gaussian-kernel affinity A_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)) with a
/// unit diagonal. Without an explicit sigma the median pairwise distance is
/// used; all-identical inputs make that median zero, which is an error that
/// asks for an explicit sigma.
Matrix build_affinity(const Matrix& embeddings, std::optional<double> sigma = std::nullopt);

struct EigenDecomposition {
  Vector eigenvalues;  // ascending
  Matrix eigenvectors; // columns, matching the eigenvalue order
};

/// Cyclic Jacobi sweeps for symmetric matrices; rotations continue until the
/// off-diagonal Frobenius norm falls below off_tolerance. Deterministic: no
/// randomness, fixed sweep order.
EigenDecomposition jacobi_eigendecompose(const Matrix& symmetric,
                                         double off_tolerance = 1e-10,
                                         int max_sweeps = 100);

/// Rows are the k smallest eigenvectors of the symmetric normalized Laplacian
/// I - D^{-1/2} A D^{-1/2}, row-normalized to unit length. Errors on a
/// zero-degree vertex.
Matrix spectral_embed(const Matrix& affinity, int k);

struct ClusterAssignment {
  std::vector<int> labels;
  int k = 0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing (or 300 iterations). A cluster that empties is reseeded with the
/// point farthest from its centroid, so all k clusters stay populated.
ClusterAssignment kmeans(const Matrix& points, int k, std::uint64_t seed);

/// build_affinity(auto sigma) -> spectral_embed -> kmeans. k = 1 shortcuts to
/// a single cluster without eigenwork.
ClusterAssignment spectral_cluster(const Matrix& embeddings, int k, std::uint64_t seed);

}  // namespace cct
