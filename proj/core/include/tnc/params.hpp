#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tnc/error.hpp"
#include "tnc/rng.hpp"

namespace tnc::model {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct TensorInfo {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;

  friend bool operator==(const TensorInfo&, const TensorInfo&) = default;
};

std::string shape_string(const std::vector<std::size_t>& shape);

/// Named tensors over one contiguous buffer. Matrices are column-major with
/// shape {rows, cols}; vectors have shape {n}.
template <typename T>
class ParamStore {
 public:
  void add(const std::string& name, std::vector<std::size_t> shape) {
    if (index_.contains(name)) throw ContractError("duplicate tensor name '" + name + "'");
    if (shape.empty() || shape.size() > 2) throw ContractError("tensor '" + name + "' must be 1-D or 2-D");
    std::size_t size = 1;
    for (auto s : shape) size *= s;
    index_.emplace(name, tensors_.size());
    tensors_.push_back({name, std::move(shape), flat_.size(), size});
    flat_.resize(flat_.size() + size, T(0));
  }

  bool contains(const std::string& name) const { return index_.contains(name); }

  const TensorInfo& info(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("unknown tensor '" + name + "'");
    return tensors_[it->second];
  }

  std::span<T> values(const std::string& name) {
    const auto& i = info(name);
    return std::span<T>(flat_).subspan(i.offset, i.size);
  }
  std::span<const T> values(const std::string& name) const {
    const auto& i = info(name);
    return std::span<const T>(flat_).subspan(i.offset, i.size);
  }

  Eigen::Map<Mat<T>> matrix(const std::string& name) {
    const auto& i = info(name);
    return {flat_.data() + i.offset, rows(i), cols(i)};
  }
  Eigen::Map<const Mat<T>> matrix(const std::string& name) const {
    const auto& i = info(name);
    return {flat_.data() + i.offset, rows(i), cols(i)};
  }
  Eigen::Map<Vec<T>> vector(const std::string& name) {
    const auto& i = info(name);
    return {flat_.data() + i.offset, static_cast<Eigen::Index>(i.size)};
  }
  Eigen::Map<const Vec<T>> vector(const std::string& name) const {
    const auto& i = info(name);
    return {flat_.data() + i.offset, static_cast<Eigen::Index>(i.size)};
  }

  std::vector<T>& flat() { return flat_; }
  const std::vector<T>& flat() const { return flat_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t size() const { return flat_.size(); }

  ParamStore zeros_like() const {
    ParamStore out = *this;
    std::fill(out.flat_.begin(), out.flat_.end(), T(0));
    return out;
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& t : tensors_) out.add(t.name, t.shape);
    for (std::size_t i = 0; i < flat_.size(); ++i) out.flat()[i] = static_cast<U>(flat_[i]);
    return out;
  }

  template <typename U>
  bool same_layout(const ParamStore<U>& other) const {
    return tensors_ == other.tensors();
  }

  /// Throws NumericalError naming the first tensor holding a non-finite value.
  void check_finite(const std::string& context) const {
    for (const auto& t : tensors_)
      for (std::size_t k = 0; k < t.size; ++k)
        if (!std::isfinite(static_cast<double>(flat_[t.offset + k])))
          throw NumericalError(context + ": non-finite value in tensor '" + t.name + "'");
  }

  /// Fills `name` with Uniform(-bound, bound).
  void fill_uniform(const std::string& name, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : values(name)) v = static_cast<T>(dist(rng));
  }

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    return a.tensors_ == b.tensors_ && a.flat_ == b.flat_;
  }

 private:
  static Eigen::Index rows(const TensorInfo& i) { return static_cast<Eigen::Index>(i.shape[0]); }
  static Eigen::Index cols(const TensorInfo& i) {
    return i.shape.size() == 2 ? static_cast<Eigen::Index>(i.shape[1]) : 1;
  }

  std::vector<TensorInfo> tensors_;
  std::map<std::string, std::size_t> index_;
  std::vector<T> flat_;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace tnc::model
