#include "tnc/loss.hpp"

#include <algorithm>
#include <cmath>

#include "tnc/error.hpp"

namespace tnc::train {

namespace {

double clamp_p(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

void check_lists(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ContractError("tnc_loss: sample lists must be non-empty");
  if (a.size() != b.size()) throw ContractError("tnc_loss: neighbor and non-neighbor lists differ in length");
}

}  // namespace

BatchLoss tnc_loss(std::span<const double> d_neighbors, std::span<const double> d_nonneighbors,
                   double w) {
  check_lists(d_neighbors, d_nonneighbors);
  BatchLoss out;
  std::size_t correct = 0;
  for (double p : d_neighbors) {
    out.neighbor_term += std::log(clamp_p(p));
    if (p > 0.5) ++correct;
  }
  for (double p : d_nonneighbors) {
    const double c = clamp_p(p);
    out.nonneighbor_negative_term += (1.0 - w) * std::log(1.0 - c);
    out.nonneighbor_positive_term += w * std::log(c);
    if (p < 0.5) ++correct;
  }
  out.neighbor_term /= static_cast<double>(d_neighbors.size());
  out.nonneighbor_negative_term /= static_cast<double>(d_nonneighbors.size());
  out.nonneighbor_positive_term /= static_cast<double>(d_nonneighbors.size());
  out.total = -(out.neighbor_term + out.nonneighbor_negative_term + out.nonneighbor_positive_term);
  out.discriminator_accuracy =
      static_cast<double>(correct) / static_cast<double>(d_neighbors.size() + d_nonneighbors.size());
  return out;
}

void tnc_loss_gradient(std::span<const double> d_neighbors, std::span<const double> d_nonneighbors,
                       double w, std::span<double> g_neighbors, std::span<double> g_nonneighbors) {
  check_lists(d_neighbors, d_nonneighbors);
  const double nn = static_cast<double>(d_neighbors.size());
  const double nk = static_cast<double>(d_nonneighbors.size());
  auto active = [](double p) { return p > kProbabilityClamp && p < 1.0 - kProbabilityClamp; };
  for (std::size_t i = 0; i < d_neighbors.size(); ++i) {
    const double p = d_neighbors[i];
    g_neighbors[i] = active(p) ? -1.0 / (nn * p) : 0.0;
  }
  for (std::size_t i = 0; i < d_nonneighbors.size(); ++i) {
    const double p = d_nonneighbors[i];
    g_nonneighbors[i] = active(p) ? -((1.0 - w) * -1.0 / (1.0 - p) + w / p) / nk : 0.0;
  }
}

BatchLoss mean_loss(std::span<const BatchLoss> losses) {
  BatchLoss out;
  if (losses.empty()) return out;
  for (const auto& l : losses) {
    out.total += l.total;
    out.neighbor_term += l.neighbor_term;
    out.nonneighbor_negative_term += l.nonneighbor_negative_term;
    out.nonneighbor_positive_term += l.nonneighbor_positive_term;
    out.discriminator_accuracy += l.discriminator_accuracy;
  }
  const double n = static_cast<double>(losses.size());
  out.total /= n;
  out.neighbor_term /= n;
  out.nonneighbor_negative_term /= n;
  out.nonneighbor_positive_term /= n;
  out.discriminator_accuracy /= n;
  return out;
}

}  // namespace tnc::train
