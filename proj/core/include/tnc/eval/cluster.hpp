#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tnc/eval/encode.hpp"

namespace tnc::eval {

struct KMeansOptions {
  int n_init = 10;
  int max_iter = 300;
};

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centroids;  // k x M
  double inertia = 0.0;
  int iterations = 0;
};

/// Lloyd iterations from k-means++ seeding, best of n_init restarts.
/// Throws ContractError when n < k or k < 1, and if inertia ever increases
/// between iterations.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

/// Sum of squared distances to the assigned centroids.
double inertia(const Matrix& points, std::span<const int> assignments, const Matrix& centroids);

std::vector<int> nearest_centroid(const Matrix& points, const Matrix& centroids);

/// Mean silhouette with Euclidean distances; singleton clusters score 0.
/// Throws ContractError with fewer than two distinct clusters.
double silhouette(const Matrix& points, std::span<const int> assignments, int threads = 1);

/// Davies-Bouldin index with s_i the mean distance to the centroid and d_ij
/// the centroid distance. Throws ContractError naming coincident centroids.
double davies_bouldin(const Matrix& points, std::span<const int> assignments);

struct ClusterEval {
  double silhouette = 0.0;
  double davies_bouldin = 0.0;
  int k = 0;
  std::vector<int> assignments;
  Matrix centroids;
};

ClusterEval evaluate_clusters(const Matrix& points, int k, std::uint64_t seed, int threads = 1,
                              const KMeansOptions& options = {});

}  // namespace tnc::eval
