#include "tnc/sampling.hpp"

#include <cmath>
#include <string>

#include "tnc/error.hpp"

namespace tnc::train {

namespace {

struct Interval {
  long long lo, hi;  // inclusive, empty when lo > hi
  long long count() const { return hi >= lo ? hi - lo + 1 : 0; }
};

// Feasible non-neighbor centers as two disjoint intervals.
std::pair<Interval, Interval> non_neighbor_intervals(std::size_t anchor, std::size_t length,
                                                     const stationarity::NeighborhoodSpec& spec) {
  if (length < static_cast<std::size_t>(spec.delta)) return {{1, 0}, {1, 0}};
  const auto lo = static_cast<long long>(min_center(spec.delta));
  const auto hi = static_cast<long long>(max_center(spec.delta, length));
  const double margin = spec.non_neighbor_margin();
  const auto t = static_cast<double>(anchor);
  // |c - t| > margin
  const auto left_hi = static_cast<long long>(std::ceil(t - margin)) - 1;
  const auto right_lo = static_cast<long long>(std::floor(t + margin)) + 1;
  return {{lo, std::min(hi, left_hi)}, {std::max(lo, right_lo), hi}};
}

}  // namespace

std::vector<std::size_t> sample_neighbor_centers(std::size_t anchor_center, std::size_t length,
                                                 const stationarity::NeighborhoodSpec& spec,
                                                 std::size_t count, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(count);
  std::normal_distribution<double> dist(static_cast<double>(anchor_center), spec.gaussian_spread());
  for (std::size_t i = 0; i < count; ++i) {
    int tries = 0;
    for (;;) {
      const auto c = static_cast<std::ptrdiff_t>(std::llround(dist(rng)));
      if (window_fits(c, spec.delta, length)) {
        out.push_back(static_cast<std::size_t>(c));
        break;
      }
      if (++tries >= kNeighborRetries)
        throw SamplingError("no in-bounds neighbor center near t=" + std::to_string(anchor_center) +
                            " after " + std::to_string(kNeighborRetries) + " draws");
    }
  }
  return out;
}

std::size_t non_neighbor_support(std::size_t anchor_center, std::size_t length,
                                 const stationarity::NeighborhoodSpec& spec) {
  const auto [left, right] = non_neighbor_intervals(anchor_center, length, spec);
  return static_cast<std::size_t>(left.count() + right.count());
}

std::vector<std::size_t> sample_non_neighbor_centers(std::size_t anchor_center, std::size_t length,
                                                     const stationarity::NeighborhoodSpec& spec,
                                                     std::size_t count, Rng& rng) {
  const auto [left, right] = non_neighbor_intervals(anchor_center, length, spec);
  const long long total = left.count() + right.count();
  if (total == 0)
    throw SamplingError("no non-neighbor centers farther than " +
                        std::to_string(spec.non_neighbor_margin()) + " steps from t=" +
                        std::to_string(anchor_center) + "; skip this anchor");
  std::vector<std::size_t> out;
  out.reserve(count);
  std::uniform_int_distribution<long long> pick(0, total - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const long long k = pick(rng);
    const long long c = k < left.count() ? left.lo + k : right.lo + (k - left.count());
    out.push_back(static_cast<std::size_t>(c));
  }
  return out;
}

std::vector<Window> sample_neighbors(const TimeSeriesDataset& data, const Window& anchor,
                                     const stationarity::NeighborhoodSpec& spec, std::size_t count,
                                     Rng& rng) {
  std::vector<Window> out;
  for (auto c : sample_neighbor_centers(anchor.center, data.length(), spec, count, rng))
    out.push_back(extract_window(data, anchor.instance, c, spec.delta));
  return out;
}

std::vector<Window> sample_non_neighbors(const TimeSeriesDataset& data, const Window& anchor,
                                         const stationarity::NeighborhoodSpec& spec,
                                         std::size_t count, Rng& rng) {
  std::vector<Window> out;
  for (auto c : sample_non_neighbor_centers(anchor.center, data.length(), spec, count, rng))
    out.push_back(extract_window(data, anchor.instance, c, spec.delta));
  return out;
}

}  // namespace tnc::train
