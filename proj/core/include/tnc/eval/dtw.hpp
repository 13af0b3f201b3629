#pragma once

#include <span>
#include <vector>

#include "tnc/eval/encode.hpp"

namespace tnc::eval {

/// Dynamic time warping cost between D x L1 and D x L2 sequences with
/// Euclidean frame distance and no band constraint.
double dtw_distance(const Matrix& a, const Matrix& b);

/// k-nearest-neighbour vote under DTW. Ties in the vote go to the class with
/// the smallest summed distance among the k neighbours, then the smallest
/// label.
std::vector<int> knn_classify(std::span<const Matrix> train, std::span<const int> labels,
                              std::span<const Matrix> test, int k = 1, int threads = 1);

/// D x delta windows of a dataset at stride delta, with majority labels.
struct WindowSet {
  std::vector<Matrix> windows;
  std::vector<int> labels;
};
WindowSet collect_windows(const TimeSeriesDataset& data, int delta);

}  // namespace tnc::eval
