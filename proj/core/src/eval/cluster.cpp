#include "tnc/eval/cluster.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "tnc/error.hpp"
#include "tnc/parallel.hpp"
#include "tnc/rng.hpp"

namespace tnc::eval {

namespace {

// Cluster ids as they appear in `assignments`, mapped to 0..k-1.
std::map<int, int> cluster_ids(std::span<const int> assignments) {
  std::map<int, int> ids;
  for (int a : assignments) ids.emplace(a, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  return ids;
}

void check_shape(const Matrix& points, std::span<const int> assignments, const char* what) {
  if (static_cast<std::size_t>(points.rows()) != assignments.size())
    throw ContractError(std::string(what) + ": assignments do not match the number of points");
}

Matrix kmeanspp(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix c(k, x.cols());
  c.row(0) = x.row(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  Eigen::VectorXd d2 = (x.rowwise() - c.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        u -= d2(pick);
        if (u < 0) break;
      }
    } else {
      pick = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    }
    c.row(j) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - c.row(j)).rowwise().squaredNorm());
  }
  return c;
}

KMeansResult lloyd(const Matrix& x, Matrix centroids, int max_iter) {
  const Eigen::Index n = x.rows();
  const int k = static_cast<int>(centroids.rows());
  KMeansResult r;
  r.assignments.assign(static_cast<std::size_t>(n), -1);
  double previous = std::numeric_limits<double>::infinity();
  auto check = [&](double value, const char* step) {
    if (value > previous * (1.0 + 1e-12) + 1e-12)
      throw ContractError(std::string("kmeans: inertia increased during ") + step + " (" +
                          std::to_string(previous) + " -> " + std::to_string(value) + ")");
    previous = value;
  };
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    bool moved = false;
    const std::vector<int> nearest = nearest_centroid(x, centroids);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      if (nearest[idx] != r.assignments[idx]) moved = true;
      r.assignments[idx] = nearest[idx];
    }
    check(inertia(x, r.assignments, centroids), "assignment");
    if (!moved && r.iterations > 1) break;

    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(r.assignments[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(r.assignments[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        centroids.row(j) = sums.row(j) / counts[static_cast<std::size_t>(j)];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      Eigen::Index far = 0;
      double best = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int a = r.assignments[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(a)] < 2) continue;
        const double d = (x.row(i) - centroids.row(a)).squaredNorm();
        if (d > best) {
          best = d;
          far = i;
        }
      }
      --counts[static_cast<std::size_t>(r.assignments[static_cast<std::size_t>(far)])];
      r.assignments[static_cast<std::size_t>(far)] = j;
      counts[static_cast<std::size_t>(j)] = 1;
      centroids.row(j) = x.row(far);
    }
    // Recompute means after any reassignment above.
    sums.setZero();
    for (Eigen::Index i = 0; i < n; ++i) sums.row(r.assignments[static_cast<std::size_t>(i)]) += x.row(i);
    for (int j = 0; j < k; ++j) centroids.row(j) = sums.row(j) / counts[static_cast<std::size_t>(j)];
    check(inertia(x, r.assignments, centroids), "update");
  }
  r.iterations = std::min(r.iterations, max_iter);
  r.centroids = std::move(centroids);
  r.inertia = inertia(x, r.assignments, r.centroids);
  return r;
}

}  // namespace

double inertia(const Matrix& points, std::span<const int> assignments, const Matrix& centroids) {
  check_shape(points, assignments, "inertia");
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    total += (points.row(i) - centroids.row(assignments[static_cast<std::size_t>(i)])).squaredNorm();
  return total;
}

std::vector<int> nearest_centroid(const Matrix& points, const Matrix& centroids) {
  std::vector<int> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::Index best = 0;
    (centroids.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1) throw ContractError("kmeans: k must be >= 1");
  if (points.rows() < k)
    throw ContractError("kmeans: " + std::to_string(points.rows()) + " points for k=" + std::to_string(k));
  if (!points.allFinite()) throw ContractError("kmeans: non-finite points");
  if (options.n_init < 1 || options.max_iter < 1) throw ConfigError("kmeans: n_init and max_iter must be >= 1");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int run = 0; run < options.n_init; ++run) {
    Rng rng = derive_rng(seed, static_cast<std::uint64_t>(run));
    KMeansResult r = lloyd(points, kmeanspp(points, k, rng), options.max_iter);
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

double silhouette(const Matrix& points, std::span<const int> assignments, int threads) {
  check_shape(points, assignments, "silhouette");
  const auto ids = cluster_ids(assignments);
  const int k = static_cast<int>(ids.size());
  if (k < 2) throw ContractError("silhouette: undefined for a single cluster");
  const Eigen::Index n = points.rows();
  std::vector<int> cid(static_cast<std::size_t>(n));
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    cid[static_cast<std::size_t>(i)] = ids.at(assignments[static_cast<std::size_t>(i)]);
    ++sizes[static_cast<std::size_t>(cid[static_cast<std::size_t>(i)])];
  }
  std::vector<double> score(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const int own = cid[i];
    if (sizes[static_cast<std::size_t>(own)] < 2) return;
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    const auto row = points.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < n; ++j)
      sum[static_cast<std::size_t>(cid[static_cast<std::size_t>(j)])] += (points.row(j) - row).norm();
    const double a = sum[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != own) b = std::min(b, sum[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
    const double m = std::max(a, b);
    score[i] = m > 0 ? (b - a) / m : 0.0;
  });
  double total = 0.0;
  for (double s : score) total += s;
  return total / static_cast<double>(n);
}

double davies_bouldin(const Matrix& points, std::span<const int> assignments) {
  check_shape(points, assignments, "davies_bouldin");
  const auto ids = cluster_ids(assignments);
  const int k = static_cast<int>(ids.size());
  if (k < 2) throw ContractError("davies_bouldin: needs at least two clusters");
  std::vector<int> labels_of(static_cast<std::size_t>(k));
  for (const auto& [label, id] : ids) labels_of[static_cast<std::size_t>(id)] = label;

  Matrix centroids = Matrix::Zero(k, points.cols());
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = ids.at(assignments[static_cast<std::size_t>(i)]);
    centroids.row(c) += points.row(i);
    ++sizes[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < k; ++c) centroids.row(c) /= sizes[static_cast<std::size_t>(c)];
  std::vector<double> scatter(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = ids.at(assignments[static_cast<std::size_t>(i)]);
    scatter[static_cast<std::size_t>(c)] += (points.row(i) - centroids.row(c)).norm();
  }
  for (int c = 0; c < k; ++c) scatter[static_cast<std::size_t>(c)] /= sizes[static_cast<std::size_t>(c)];

  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const double d = (centroids.row(i) - centroids.row(j)).norm();
      if (d == 0.0)
        throw ContractError("davies_bouldin: clusters " + std::to_string(labels_of[static_cast<std::size_t>(i)]) +
                            " and " + std::to_string(labels_of[static_cast<std::size_t>(j)]) +
                            " have coincident centroids");
      worst = std::max(worst, (scatter[static_cast<std::size_t>(i)] + scatter[static_cast<std::size_t>(j)]) / d);
    }
    total += worst;
  }
  return total / k;
}

ClusterEval evaluate_clusters(const Matrix& points, int k, std::uint64_t seed, int threads,
                              const KMeansOptions& options) {
  KMeansResult km = kmeans(points, k, seed, options);
  ClusterEval out;
  out.k = k;
  out.silhouette = silhouette(points, km.assignments, threads);
  out.davies_bouldin = davies_bouldin(points, km.assignments);
  out.assignments = std::move(km.assignments);
  out.centroids = std::move(km.centroids);
  return out;
}

}  // namespace tnc::eval
