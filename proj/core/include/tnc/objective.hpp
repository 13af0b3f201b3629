#pragma once

#include "tnc/discriminator.hpp"
#include "tnc/encoder.hpp"
#include "tnc/loss.hpp"

namespace tnc::train {

/// Windows for a set of anchors in the encoder's batched layout. Window
/// order: all anchors, then each anchor's neighbors (grouped by anchor), then
/// each anchor's non-neighbors (grouped by anchor).
template <typename T>
struct PairBatch {
  model::Mat<T> inputs;
  Eigen::Index anchors = 0;
  Eigen::Index neighbors_per_anchor = 0;
  Eigen::Index non_neighbors_per_anchor = 0;

  Eigen::Index windows() const {
    return anchors * (1 + neighbors_per_anchor + non_neighbors_per_anchor);
  }
};

template <typename T>
struct Gradients {
  model::ParamStore<T> encoder;
  model::ParamStore<T> discriminator;
};

/// Mean over anchors of the weighted contrastive loss. When `grads` is given
/// its stores must share the parameter layouts; exact reverse-mode gradients
/// are added to them. Throws NumericalError naming the first non-finite
/// tensor.
template <typename T>
BatchLoss tnc_objective(const model::Encoder<T>& encoder, const model::ParamStore<T>& enc_params,
                        const model::Discriminator<T>& disc, const model::ParamStore<T>& disc_params,
                        const PairBatch<T>& batch, double w, Gradients<T>* grads = nullptr);

extern template BatchLoss tnc_objective<float>(const model::Encoder<float>&,
                                               const model::ParamStore<float>&,
                                               const model::Discriminator<float>&,
                                               const model::ParamStore<float>&,
                                               const PairBatch<float>&, double, Gradients<float>*);
extern template BatchLoss tnc_objective<double>(const model::Encoder<double>&,
                                                const model::ParamStore<double>&,
                                                const model::Discriminator<double>&,
                                                const model::ParamStore<double>&,
                                                const PairBatch<double>&, double,
                                                Gradients<double>*);

}  // namespace tnc::train
