#include "tnc/objective.hpp"

#include <cmath>
#include <vector>

#include "tnc/error.hpp"

namespace tnc::train {

using model::Mat;

namespace {

template <typename T>
void check_finite(const Mat<T>& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite values in ") + what);
}

}  // namespace

template <typename T>
BatchLoss tnc_objective(const model::Encoder<T>& encoder, const model::ParamStore<T>& enc_params,
                        const model::Discriminator<T>& disc, const model::ParamStore<T>& disc_params,
                        const PairBatch<T>& batch, double w, Gradients<T>* grads) {
  const Eigen::Index a = batch.anchors;
  const Eigen::Index s = batch.neighbors_per_anchor;
  const Eigen::Index k = batch.non_neighbors_per_anchor;
  if (a < 1 || s < 1 || k < 1) throw ContractError("tnc_objective: empty anchor batch");
  if (s != k) throw ContractError("tnc_objective: neighbor and non-neighbor counts must match");
  const Eigen::Index b = batch.windows();

  model::EncoderTape<T> enc_tape;
  const Mat<T> z = encoder.forward(enc_params, batch.inputs, b, grads ? &enc_tape : nullptr);
  check_finite(z, "encoder output");

  const Eigen::Index pairs = a * (s + k);
  Mat<T> z_anchor(z.rows(), pairs);
  for (Eigen::Index j = 0; j < a * s; ++j) z_anchor.col(j) = z.col(j / s);
  for (Eigen::Index j = 0; j < a * k; ++j) z_anchor.col(a * s + j) = z.col(j / k);
  const Mat<T> z_other = z.middleCols(a, pairs);

  model::DiscriminatorTape<T> disc_tape;
  const Mat<T> logits = disc.logits(disc_params, z_anchor, z_other, grads ? &disc_tape : nullptr);
  check_finite(logits, "discriminator logits");

  std::vector<double> prob(static_cast<std::size_t>(pairs));
  for (Eigen::Index j = 0; j < pairs; ++j)
    prob[static_cast<std::size_t>(j)] = static_cast<double>(model::sigmoid(logits(0, j)));

  std::vector<BatchLoss> per_anchor(static_cast<std::size_t>(a));
  std::vector<double> g(static_cast<std::size_t>(pairs));
  const std::span<const double> all(prob);
  const std::span<double> gall(g);
  for (Eigen::Index i = 0; i < a; ++i) {
    const auto pn = all.subspan(static_cast<std::size_t>(i * s), static_cast<std::size_t>(s));
    const auto pk = all.subspan(static_cast<std::size_t>(a * s + i * k), static_cast<std::size_t>(k));
    per_anchor[static_cast<std::size_t>(i)] = tnc_loss(pn, pk, w);
    if (grads)
      tnc_loss_gradient(pn, pk, w, gall.subspan(static_cast<std::size_t>(i * s), static_cast<std::size_t>(s)),
                        gall.subspan(static_cast<std::size_t>(a * s + i * k), static_cast<std::size_t>(k)));
  }
  const BatchLoss loss = mean_loss(per_anchor);
  if (!std::isfinite(loss.total)) throw NumericalError("non-finite loss");
  if (!grads) return loss;

  Mat<T> d_logits(1, pairs);
  for (Eigen::Index j = 0; j < pairs; ++j) {
    const double p = prob[static_cast<std::size_t>(j)];
    d_logits(0, j) = static_cast<T>(g[static_cast<std::size_t>(j)] / static_cast<double>(a) * p * (1.0 - p));
  }
  Mat<T> d_anchor, d_other;
  disc.backward(disc_params, disc_tape, d_logits, grads->discriminator, d_anchor, d_other);

  Mat<T> d_z = Mat<T>::Zero(z.rows(), b);
  d_z.middleCols(a, pairs) = d_other;
  for (Eigen::Index j = 0; j < a * s; ++j) d_z.col(j / s) += d_anchor.col(j);
  for (Eigen::Index j = 0; j < a * k; ++j) d_z.col(j / k) += d_anchor.col(a * s + j);
  encoder.backward(enc_params, enc_tape, d_z, grads->encoder);

  grads->encoder.check_finite("encoder gradient");
  grads->discriminator.check_finite("discriminator gradient");
  return loss;
}

template BatchLoss tnc_objective<float>(const model::Encoder<float>&, const model::ParamStore<float>&,
                                        const model::Discriminator<float>&,
                                        const model::ParamStore<float>&, const PairBatch<float>&,
                                        double, Gradients<float>*);
template BatchLoss tnc_objective<double>(const model::Encoder<double>&,
                                         const model::ParamStore<double>&,
                                         const model::Discriminator<double>&,
                                         const model::ParamStore<double>&, const PairBatch<double>&,
                                         double, Gradients<double>*);

}  // namespace tnc::train
