#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>

#include "tnc/dataset.hpp"

namespace tnc::stationarity {

struct AdfResult {
  double test_statistic = 0.0;
  double p_value = 1.0;
  int chosen_lag = 0;
  int n_obs_used = 0;
};

/// Approximate p-value of the Dickey-Fuller tau statistic for a regression
/// with a constant and no trend (single series).
double mackinnon_pvalue(double tau);

/// Default upper bound for lag selection: floor(12 * (n/100)^(1/4)).
int default_max_lag(std::size_t n);

/// Augmented Dickey-Fuller test with a constant term. The lag is chosen by
/// minimum AIC over 0..max_lag on a common sample, then the regression is
/// refit on all usable observations. Throws TestError on short (< 12) or
/// constant series, or when the regression is degenerate.
AdfResult adf_test(std::span<const double> series, std::optional<int> max_lag = std::nullopt);

/// How per-feature verdicts combine into one multivariate verdict.
enum class FeaturePolicy { All, Any, Majority };

FeaturePolicy feature_policy_from_string(const std::string& name);
std::string to_string(FeaturePolicy policy);

struct NeighborhoodSpec {
  int eta = 1;
  int eta_max = 3;
  int delta = 50;
  double p_threshold = 0.01;

  /// Standard deviation of neighbor centers, in steps.
  double gaussian_spread() const { return static_cast<double>(eta) * delta; }
  /// Non-neighbor centers lie strictly farther than this from the anchor.
  double non_neighbor_margin() const { return 4.0 * gaussian_spread(); }
};

struct EtaOptions {
  double p_threshold = 0.01;
  int eta_max = 3;
  FeaturePolicy policy = FeaturePolicy::All;
};

/// Largest eta in 1..eta_max such that every span [t - k*delta, t + k*delta)
/// for k = 2..eta passes the stationarity verdict (p < p_threshold). The
/// eta = 1 neighborhood is the floor and is never rejected. Requires
/// [t - eta_max*delta, t + eta_max*delta) inside the series; throws
/// RangeError otherwise.
NeighborhoodSpec estimate_eta(const InstanceView& instance, std::size_t t, int delta,
                              const EtaOptions& options = {});

/// Memo of eta keyed by (instance, t, delta). Safe for concurrent use.
class EtaCache {
 public:
  int get_or_compute(std::size_t instance, std::size_t t, int delta,
                     const std::function<int()>& compute);
  std::size_t size() const;
  std::size_t hits() const { return hits_.load(); }

 private:
  using Key = std::tuple<std::size_t, std::size_t, int>;
  mutable std::shared_mutex mutex_;
  std::map<Key, int> values_;
  std::atomic<std::size_t> hits_{0};
};

}  // namespace tnc::stationarity
