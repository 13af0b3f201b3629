#include "tnc/eval/dtw.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "tnc/error.hpp"
#include "tnc/parallel.hpp"

namespace tnc::eval {

double dtw_distance(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0 || b.cols() == 0) throw ContractError("dtw: empty sequence");
  if (a.rows() != b.rows())
    throw ContractError("dtw: feature dimensions differ (" + std::to_string(a.rows()) + " vs " +
                        std::to_string(b.rows()) + ")");
  const Eigen::Index n = a.cols(), m = b.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(static_cast<std::size_t>(m + 1), inf), cur(static_cast<std::size_t>(m + 1), inf);
  prev[0] = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (Eigen::Index j = 1; j <= m; ++j) {
      const double cost = (a.col(i - 1) - b.col(j - 1)).norm();
      const auto u = static_cast<std::size_t>(j);
      cur[u] = cost + std::min({prev[u], cur[u - 1], prev[u - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[static_cast<std::size_t>(m)];
}

std::vector<int> knn_classify(std::span<const Matrix> train, std::span<const int> labels,
                              std::span<const Matrix> test, int k, int threads) {
  if (train.empty()) throw ContractError("knn: empty training set");
  if (labels.size() != train.size()) throw ContractError("knn: labels do not match training windows");
  if (k < 1 || static_cast<std::size_t>(k) > train.size())
    throw ContractError("knn: k=" + std::to_string(k) + " outside [1, " + std::to_string(train.size()) + "]");
  std::vector<int> out(test.size());
  parallel_for(test.size(), threads, [&](std::size_t q) {
    std::vector<double> dist(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) dist[i] = dtw_distance(test[q], train[i]);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
    std::map<int, std::pair<int, double>> votes;
    for (int r = 0; r < k; ++r) {
      auto& v = votes[labels[order[static_cast<std::size_t>(r)]]];
      ++v.first;
      v.second += dist[order[static_cast<std::size_t>(r)]];
    }
    int best = votes.begin()->first;
    for (const auto& [label, v] : votes) {
      const auto& b = votes[best];
      if (v.first > b.first || (v.first == b.first && v.second < b.second)) best = label;
    }
    out[q] = best;
  });
  return out;
}

WindowSet collect_windows(const TimeSeriesDataset& data, int delta) {
  WindowSet out;
  for (std::size_t n = 0; n < data.n_instances(); ++n) {
    const InstanceView x = data.instance(n);
    for (auto s : window_starts(data.length(), delta, delta)) {
      out.windows.push_back(x.middleCols(static_cast<Eigen::Index>(s), delta).cast<double>());
      if (data.has_labels())
        out.labels.push_back(majority_label(data.instance_labels(n).subspan(s, static_cast<std::size_t>(delta))));
    }
  }
  return out;
}

}  // namespace tnc::eval
