#pragma once

#include "tnc/params.hpp"
#include "tnc/rng.hpp"

namespace tnc::model {

struct DiscriminatorConfig {
  int encoding_size = 10;
  int hidden_size = 40;  ///< 4 * encoding_size by default

  void validate() const;
  friend bool operator==(const DiscriminatorConfig&, const DiscriminatorConfig&) = default;
};

template <typename T>
struct DiscriminatorTape {
  Mat<T> input;   // 2M x P
  Mat<T> hidden;  // pre-activation, Hd x P
  Eigen::Index pairs = 0;
};

/// concat(z_anchor, z_other) -> Linear -> ReLU -> Linear -> logit. The
/// probability is sigmoid(logit).
template <typename T>
class Discriminator {
 public:
  explicit Discriminator(DiscriminatorConfig config);

  const DiscriminatorConfig& config() const { return config_; }
  ParamStore<T> make_params() const;

  /// 1 x P logits for column-paired encodings.
  Mat<T> logits(const ParamStore<T>& params, const Mat<T>& z_anchor, const Mat<T>& z_other,
                DiscriminatorTape<T>* tape = nullptr) const;

  /// Accumulates parameter gradients and writes input gradients given dLoss/dLogit.
  void backward(const ParamStore<T>& params, const DiscriminatorTape<T>& tape,
                const Mat<T>& d_logits, ParamStore<T>& grads, Mat<T>& d_anchor,
                Mat<T>& d_other) const;

 private:
  DiscriminatorConfig config_;
};

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

/// Probability that the two encodings come from one temporal neighborhood.
template <typename T>
T discriminator_forward(const ParamStore<T>& params, const DiscriminatorConfig& config,
                        const Vec<T>& z_anchor, const Vec<T>& z_other);

void initialize_discriminator(ParamStore<float>& params, const DiscriminatorConfig& config,
                              Rng& rng);

extern template class Discriminator<float>;
extern template class Discriminator<double>;

}  // namespace tnc::model
