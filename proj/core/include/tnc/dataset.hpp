#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tnc {

using InstanceMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using InstanceView = Eigen::Map<const InstanceMatrix>;

/// Per-feature statistics used for z-normalization.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// N instances of D features over T steps, stored row-major as [n][d][t].
class TimeSeriesDataset {
 public:
  TimeSeriesDataset() = default;
  TimeSeriesDataset(std::size_t n_instances, std::size_t n_features, std::size_t length);

  std::size_t n_instances() const { return n_; }
  std::size_t n_features() const { return d_; }
  std::size_t length() const { return t_; }

  float& at(std::size_t n, std::size_t d, std::size_t t) { return values_[(n * d_ + d) * t_ + t]; }
  float at(std::size_t n, std::size_t d, std::size_t t) const {
    return values_[(n * d_ + d) * t_ + t];
  }

  /// D x T view of one instance.
  InstanceView instance(std::size_t n) const;
  std::span<float> instance_values(std::size_t n);

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  bool has_labels() const { return labels_.has_value(); }
  void enable_labels();
  std::uint8_t label(std::size_t n, std::size_t t) const { return (*labels_)[n * t_ + t]; }
  std::uint8_t& label(std::size_t n, std::size_t t) { return (*labels_)[n * t_ + t]; }
  std::span<const std::uint8_t> labels() const;
  std::span<const std::uint8_t> instance_labels(std::size_t n) const;

  const std::optional<Normalization>& normalization() const { return normalization_; }
  bool normalized() const { return normalization_.has_value(); }
  void set_normalization(Normalization stats) { normalization_ = std::move(stats); }

  /// Per-feature z-normalization over all instances and steps; statistics
  /// are recorded. Features with zero spread keep unit stddev.
  void normalize();

  /// Copy of the listed instances, keeping labels and normalization metadata.
  TimeSeriesDataset subset(std::span<const std::size_t> instances) const;

  /// Number of distinct states, i.e. max label + 1 (0 if unlabeled).
  int n_states() const;

  /// Throws ContractError when values are non-finite or shapes disagree.
  void validate() const;

 private:
  std::size_t n_ = 0, d_ = 0, t_ = 0;
  std::vector<float> values_;
  std::optional<std::vector<std::uint8_t>> labels_;
  std::optional<Normalization> normalization_;
};

}  // namespace tnc
