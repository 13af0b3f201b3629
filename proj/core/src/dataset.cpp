#include "tnc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tnc/error.hpp"

namespace tnc {

TimeSeriesDataset::TimeSeriesDataset(std::size_t n_instances, std::size_t n_features,
                                     std::size_t length)
    : n_(n_instances), d_(n_features), t_(length), values_(n_instances * n_features * length) {}

InstanceView TimeSeriesDataset::instance(std::size_t n) const {
  if (n >= n_) throw RangeError("instance " + std::to_string(n) + " out of range");
  return InstanceView(values_.data() + n * d_ * t_, static_cast<Eigen::Index>(d_),
                      static_cast<Eigen::Index>(t_));
}

std::span<float> TimeSeriesDataset::instance_values(std::size_t n) {
  return std::span<float>(values_).subspan(n * d_ * t_, d_ * t_);
}

void TimeSeriesDataset::enable_labels() {
  if (!labels_) labels_.emplace(n_ * t_, std::uint8_t{0});
}

std::span<const std::uint8_t> TimeSeriesDataset::labels() const {
  if (!labels_) return {};
  return *labels_;
}

std::span<const std::uint8_t> TimeSeriesDataset::instance_labels(std::size_t n) const {
  if (!labels_) return {};
  return std::span<const std::uint8_t>(*labels_).subspan(n * t_, t_);
}

void TimeSeriesDataset::normalize() {
  Normalization stats;
  stats.mean.assign(d_, 0.0);
  stats.stddev.assign(d_, 1.0);
  const double count = static_cast<double>(n_ * t_);
  for (std::size_t d = 0; d < d_; ++d) {
    double sum = 0.0;
    for (std::size_t n = 0; n < n_; ++n)
      for (std::size_t t = 0; t < t_; ++t) sum += at(n, d, t);
    const double mean = sum / count;
    double sq = 0.0;
    for (std::size_t n = 0; n < n_; ++n)
      for (std::size_t t = 0; t < t_; ++t) {
        const double c = at(n, d, t) - mean;
        sq += c * c;
      }
    double sd = std::sqrt(sq / count);
    if (!(sd > 0.0)) sd = 1.0;
    for (std::size_t n = 0; n < n_; ++n)
      for (std::size_t t = 0; t < t_; ++t)
        at(n, d, t) = static_cast<float>((at(n, d, t) - mean) / sd);
    stats.mean[d] = mean;
    stats.stddev[d] = sd;
  }
  normalization_ = std::move(stats);
}

TimeSeriesDataset TimeSeriesDataset::subset(std::span<const std::size_t> instances) const {
  TimeSeriesDataset out(instances.size(), d_, t_);
  if (labels_) out.enable_labels();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::size_t src = instances[i];
    if (src >= n_) throw RangeError("subset instance " + std::to_string(src) + " out of range");
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(src * d_ * t_), d_ * t_,
                out.values_.begin() + static_cast<std::ptrdiff_t>(i * d_ * t_));
    if (labels_)
      std::copy_n(labels_->begin() + static_cast<std::ptrdiff_t>(src * t_), t_,
                  out.labels_->begin() + static_cast<std::ptrdiff_t>(i * t_));
  }
  out.normalization_ = normalization_;
  return out;
}

int TimeSeriesDataset::n_states() const {
  if (!labels_ || labels_->empty()) return 0;
  return static_cast<int>(*std::max_element(labels_->begin(), labels_->end())) + 1;
}

void TimeSeriesDataset::validate() const {
  if (values_.size() != n_ * d_ * t_) throw ContractError("dataset payload size mismatch");
  if (labels_ && labels_->size() != n_ * t_) throw ContractError("label array shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw ContractError("non-finite dataset value at flat index " + std::to_string(i));
  if (normalization_ &&
      (normalization_->mean.size() != d_ || normalization_->stddev.size() != d_))
    throw ContractError("normalization metadata does not match feature count");
}

}  // namespace tnc
