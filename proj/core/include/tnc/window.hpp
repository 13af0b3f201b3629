#pragma once

#include <cstddef>

#include "tnc/dataset.hpp"
#include "tnc/params.hpp"

namespace tnc::train {

/// A D x delta slice [t - delta/2, t - delta/2 + delta) of one instance.
struct Window {
  std::size_t instance = 0;
  std::size_t center = 0;
  int delta = 0;
  model::Mat<float> values;
};

inline std::ptrdiff_t window_start(std::size_t center, int delta) {
  return static_cast<std::ptrdiff_t>(center) - delta / 2;
}

inline bool window_fits(std::ptrdiff_t center, int delta, std::size_t length) {
  const std::ptrdiff_t start = center - delta / 2;
  return center >= 0 && start >= 0 && start + delta <= static_cast<std::ptrdiff_t>(length);
}

/// Smallest and largest centers whose window fits a series of `length`.
/// Requires length >= delta.
std::size_t min_center(int delta);
std::size_t max_center(int delta, std::size_t length);

/// Throws RangeError when the window leaves the series.
Window extract_window(const TimeSeriesDataset& data, std::size_t instance, std::size_t center,
                      int delta);

/// Writes the window into `dst` (D x delta) converting to T.
template <typename T>
void copy_window(const TimeSeriesDataset& data, std::size_t instance, std::size_t center,
                 int delta, Eigen::Ref<model::Mat<T>> dst) {
  const InstanceView x = data.instance(instance);
  const Eigen::Index start = window_start(center, delta);
  dst = x.middleCols(start, delta).template cast<T>();
}

}  // namespace tnc::train
