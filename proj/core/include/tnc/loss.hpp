#pragma once

#include <span>

namespace tnc::train {

inline constexpr double kProbabilityClamp = 1e-7;

/// Loss terms of one batch. total = -(neighbor_term + nonneighbor_negative_term
/// + nonneighbor_positive_term); every term is an average over anchors of the
/// per-anchor sample means.
struct BatchLoss {
  double total = 0.0;
  double neighbor_term = 0.0;              ///< E[log D(Z_t, Z_l)]
  double nonneighbor_negative_term = 0.0;  ///< E[(1-w) log(1 - D(Z_t, Z_k))]
  double nonneighbor_positive_term = 0.0;  ///< E[w log D(Z_t, Z_k)]
  double discriminator_accuracy = 0.0;     ///< fraction of pairs on the correct side of 0.5
};

/// Positive-unlabeled weighted contrastive loss for one anchor.
/// Probabilities are clamped to [1e-7, 1 - 1e-7]. Throws ContractError on
/// empty or unequal lists.
BatchLoss tnc_loss(std::span<const double> d_neighbors, std::span<const double> d_nonneighbors,
                   double w);

/// dLoss/dProbability for the same loss; zero where the clamp is active.
void tnc_loss_gradient(std::span<const double> d_neighbors, std::span<const double> d_nonneighbors,
                       double w, std::span<double> g_neighbors, std::span<double> g_nonneighbors);

/// Mean of per-anchor losses.
BatchLoss mean_loss(std::span<const BatchLoss> losses);

}  // namespace tnc::train
