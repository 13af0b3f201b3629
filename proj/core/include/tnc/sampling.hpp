#pragma once

#include <cstddef>
#include <vector>

#include "tnc/rng.hpp"
#include "tnc/stationarity.hpp"
#include "tnc/window.hpp"

namespace tnc::train {

inline constexpr int kNeighborRetries = 10000;

/// Centers t* = round(N(t, eta*delta)), redrawn until the window fits.
std::vector<std::size_t> sample_neighbor_centers(std::size_t anchor_center, std::size_t length,
                                                 const stationarity::NeighborhoodSpec& spec,
                                                 std::size_t count, Rng& rng);

/// Centers uniform over {t* : |t* - t| > 4*eta*delta, window fits}. Throws
/// SamplingError when that set is empty; callers skip the anchor.
std::vector<std::size_t> sample_non_neighbor_centers(std::size_t anchor_center, std::size_t length,
                                                     const stationarity::NeighborhoodSpec& spec,
                                                     std::size_t count, Rng& rng);

/// Number of feasible non-neighbor centers.
std::size_t non_neighbor_support(std::size_t anchor_center, std::size_t length,
                                 const stationarity::NeighborhoodSpec& spec);

std::vector<Window> sample_neighbors(const TimeSeriesDataset& data, const Window& anchor,
                                     const stationarity::NeighborhoodSpec& spec, std::size_t count,
                                     Rng& rng);

std::vector<Window> sample_non_neighbors(const TimeSeriesDataset& data, const Window& anchor,
                                         const stationarity::NeighborhoodSpec& spec,
                                         std::size_t count, Rng& rng);

}  // namespace tnc::train
