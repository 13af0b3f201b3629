#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tnc/checkpoint.hpp"
#include "tnc/dataset.hpp"

namespace tnc::eval {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

struct WindowRef {
  std::size_t instance = 0;
  std::size_t start = 0;
  std::size_t center = 0;
  friend bool operator==(const WindowRef&, const WindowRef&) = default;
};

/// One row per window. labels is empty for unlabeled data.
struct EncodedSet {
  Matrix encodings;  // n x M
  std::vector<int> labels;
  std::vector<WindowRef> windows;

  std::size_t size() const { return windows.size(); }
  bool labeled() const { return !labels.empty(); }
  int n_classes() const;
  /// Rows belonging to one instance, in time order.
  EncodedSet instance(std::size_t n) const;
};

/// Window starts 0, stride, 2*stride, ... while the window fits.
std::vector<std::size_t> window_starts(std::size_t length, int delta, int stride);

/// Most frequent state; ties go to the smallest state index.
int majority_label(std::span<const std::uint8_t> states);

/// Encodes every window of every instance with the checkpoint's encoder.
/// Throws ConfigError when delta or the feature count disagree with the
/// checkpoint, RangeError when T < delta.
EncodedSet encode_dataset(const model::ModelCheckpoint& ckpt, const TimeSeriesDataset& data,
                          int delta, int stride, int threads = 1);

/// Same windows flattened to D*delta raw values (feature-major).
EncodedSet raw_windows(const TimeSeriesDataset& data, int delta, int stride);

/// Concatenation preserving row order.
EncodedSet concat(std::span<const EncodedSet> parts);

/// CSV with header t,z_1..z_M,state_label; t is the window center. The
/// state column is empty for unlabeled sets.
void write_trajectory_csv(std::ostream& out, const EncodedSet& set);

/// Fraction of ground-truth state transitions of one instance at which the
/// per-window nearest centroid changes within +-tolerance window
/// boundaries. `set` holds that instance's windows from stride = delta
/// encoding. Returns 1 when the instance has no transitions.
struct TransitionScore {
  int transitions = 0;
  int detected = 0;
  double rate() const { return transitions == 0 ? 1.0 : static_cast<double>(detected) / transitions; }
};
TransitionScore transition_detection(const EncodedSet& set, std::span<const int> nearest,
                                     std::span<const std::uint8_t> states, int tolerance = 1);

}  // namespace tnc::eval
