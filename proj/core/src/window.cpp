#include "tnc/window.hpp"

#include <string>

#include "tnc/error.hpp"

namespace tnc::train {

std::size_t min_center(int delta) { return static_cast<std::size_t>(delta / 2); }

std::size_t max_center(int delta, std::size_t length) {
  if (length < static_cast<std::size_t>(delta)) throw RangeError("series shorter than window");
  return length - static_cast<std::size_t>(delta) + static_cast<std::size_t>(delta / 2);
}

Window extract_window(const TimeSeriesDataset& data, std::size_t instance, std::size_t center,
                      int delta) {
  if (!window_fits(static_cast<std::ptrdiff_t>(center), delta, data.length()))
    throw RangeError("window of size " + std::to_string(delta) + " centered at " +
                     std::to_string(center) + " leaves [0, " + std::to_string(data.length()) + ")");
  Window w{instance, center, delta,
           model::Mat<float>(static_cast<Eigen::Index>(data.n_features()), delta)};
  copy_window<float>(data, instance, center, delta, w.values);
  return w;
}

}  // namespace tnc::train
