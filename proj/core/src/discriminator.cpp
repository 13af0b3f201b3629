#include "tnc/discriminator.hpp"

#include <cmath>
#include <string>

#include "tnc/error.hpp"

namespace tnc::model {

void DiscriminatorConfig::validate() const {
  if (encoding_size < 1) throw ConfigError("discriminator encoding_size must be >= 1");
  if (hidden_size < 1) throw ConfigError("discriminator hidden_size must be >= 1");
}

template <typename T>
Discriminator<T>::Discriminator(DiscriminatorConfig config) : config_(config) {
  config_.validate();
}

template <typename T>
ParamStore<T> Discriminator<T>::make_params() const {
  const auto m = static_cast<std::size_t>(config_.encoding_size);
  const auto hd = static_cast<std::size_t>(config_.hidden_size);
  ParamStore<T> p;
  p.add("fc1.weight", {hd, 2 * m});
  p.add("fc1.bias", {hd});
  p.add("fc2.weight", {1, hd});
  p.add("fc2.bias", {1});
  return p;
}

template <typename T>
Mat<T> Discriminator<T>::logits(const ParamStore<T>& params, const Mat<T>& z_anchor,
                                const Mat<T>& z_other, DiscriminatorTape<T>* tape) const {
  const Eigen::Index m = config_.encoding_size;
  if (z_anchor.rows() != m || z_other.rows() != m || z_anchor.cols() != z_other.cols())
    throw ContractError("discriminator inputs must both be " + std::to_string(m) +
                        "-dimensional and paired column-wise");
  const Eigen::Index pairs = z_anchor.cols();
  Mat<T> input(2 * m, pairs);
  input.topRows(m) = z_anchor;
  input.bottomRows(m) = z_other;
  Mat<T> hidden = params.matrix("fc1.weight") * input;
  hidden.colwise() += params.vector("fc1.bias");
  Mat<T> out = params.matrix("fc2.weight") * hidden.cwiseMax(T(0));
  out.array() += params.vector("fc2.bias")[0];
  if (tape) {
    tape->input = std::move(input);
    tape->hidden = std::move(hidden);
    tape->pairs = pairs;
  }
  return out;
}

template <typename T>
void Discriminator<T>::backward(const ParamStore<T>& params, const DiscriminatorTape<T>& tape,
                                const Mat<T>& d_logits, ParamStore<T>& grads, Mat<T>& d_anchor,
                                Mat<T>& d_other) const {
  const Eigen::Index m = config_.encoding_size;
  if (d_logits.rows() != 1 || d_logits.cols() != tape.pairs)
    throw ContractError("discriminator logit gradient has wrong shape");
  const Mat<T> relu = tape.hidden.cwiseMax(T(0));
  grads.matrix("fc2.weight").noalias() += d_logits * relu.transpose();
  grads.vector("fc2.bias")[0] += d_logits.sum();
  Mat<T> d_hidden = params.matrix("fc2.weight").transpose() * d_logits;
  d_hidden = (tape.hidden.array() > T(0)).select(d_hidden, T(0));
  grads.matrix("fc1.weight").noalias() += d_hidden * tape.input.transpose();
  grads.vector("fc1.bias") += d_hidden.rowwise().sum();
  const Mat<T> d_input = params.matrix("fc1.weight").transpose() * d_hidden;
  d_anchor = d_input.topRows(m);
  d_other = d_input.bottomRows(m);
}

template <typename T>
T discriminator_forward(const ParamStore<T>& params, const DiscriminatorConfig& config,
                        const Vec<T>& z_anchor, const Vec<T>& z_other) {
  Discriminator<T> disc(config);
  const Mat<T> logit = disc.logits(params, z_anchor, z_other);
  return sigmoid(logit(0, 0));
}

void initialize_discriminator(ParamStore<float>& params, const DiscriminatorConfig& config,
                              Rng& rng) {
  const double b1 = 1.0 / std::sqrt(2.0 * config.encoding_size);
  const double b2 = 1.0 / std::sqrt(static_cast<double>(config.hidden_size));
  params.fill_uniform("fc1.weight", b1, rng);
  params.fill_uniform("fc1.bias", b1, rng);
  params.fill_uniform("fc2.weight", b2, rng);
  params.fill_uniform("fc2.bias", b2, rng);
}

template class Discriminator<float>;
template class Discriminator<double>;
template float discriminator_forward<float>(const ParamStore<float>&, const DiscriminatorConfig&,
                                            const Vec<float>&, const Vec<float>&);
template double discriminator_forward<double>(const ParamStore<double>&,
                                              const DiscriminatorConfig&, const Vec<double>&,
                                              const Vec<double>&);

}  // namespace tnc::model
