#include "tnc/stationarity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <vector>

#include "tnc/error.hpp"

namespace tnc::stationarity {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// MacKinnon (1994/2010) response-surface coefficients for the approximate
// asymptotic p-value of tau, constant-only regression, one series. Values as
// tabulated in statsmodels.tsa.adfvalues (_tau_maxs/_tau_mins/_tau_stars,
// _tau_c_smallp, _tau_c_largep with its 1, 1e-1, 1e-1, 1e-2 scaling).
constexpr double kTauMax = 2.74;
constexpr double kTauMin = -18.83;
constexpr double kTauStar = -1.61;
constexpr double kSmallP[] = {2.1659, 1.4412, 0.038269};
constexpr double kLargeP[] = {1.7339, 0.93202, -0.12745, -0.010368};

struct OlsFit {
  Eigen::VectorXd beta;
  double ssr = 0.0;
  double level_stderr = 0.0;  // standard error of the column-1 coefficient
};

// Columns: constant, lagged level, then `lag` lagged differences. Rows use
// differences dy[first .. first + nobs).
Eigen::MatrixXd design(std::span<const double> y, std::span<const double> dy, int lag,
                       int first, int nobs) {
  Eigen::MatrixXd x(nobs, 2 + lag);
  for (int r = 0; r < nobs; ++r) {
    const int k = first + r;
    x(r, 0) = 1.0;
    x(r, 1) = y[static_cast<std::size_t>(k)];
    for (int i = 1; i <= lag; ++i) x(r, 1 + i) = dy[static_cast<std::size_t>(k - i)];
  }
  return x;
}

OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, bool want_stderr) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  OlsFit fit;
  fit.beta = qr.solve(target);
  fit.ssr = (target - x * fit.beta).squaredNorm();
  if (want_stderr) {
    const auto k = x.cols();
    const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Eigen::VectorXd e = Eigen::VectorXd::Unit(k, 1);
    // (X'X)^-1 = R^-1 R^-T, so the (1,1) entry is |R^-T e_1|^2
    const Eigen::VectorXd v = r.transpose().triangularView<Eigen::Lower>().solve(e);
    const double dof = static_cast<double>(x.rows() - k);
    fit.level_stderr = std::sqrt(fit.ssr / dof * v.squaredNorm());
  }
  return fit;
}

double aic(double ssr, int nobs, int k) {
  const double n = nobs;
  const double llf = -n / 2.0 * (std::log(2.0 * std::numbers::pi) + std::log(ssr / n) + 1.0);
  return -2.0 * llf + 2.0 * k;
}

}  // namespace

double mackinnon_pvalue(double tau) {
  if (std::isnan(tau)) return std::numeric_limits<double>::quiet_NaN();
  if (tau > kTauMax) return 1.0;
  if (tau < kTauMin) return 0.0;
  double z = 0.0;
  if (tau <= kTauStar) {
    z = kSmallP[0] + kSmallP[1] * tau + kSmallP[2] * tau * tau;
  } else {
    z = kLargeP[0] + kLargeP[1] * tau + kLargeP[2] * tau * tau + kLargeP[3] * tau * tau * tau;
  }
  return std::clamp(normal_cdf(z), 0.0, 1.0);
}

int default_max_lag(std::size_t n) {
  return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

AdfResult adf_test(std::span<const double> series, std::optional<int> max_lag) {
  const std::size_t n = series.size();
  if (n < 12) throw TestError("adf: series of length " + std::to_string(n) + " is too short (< 12)");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) throw TestError("adf: series is constant");
  for (double v : series)
    if (!std::isfinite(v)) throw TestError("adf: series contains non-finite values");

  int maxlag = max_lag ? *max_lag : default_max_lag(n);
  if (maxlag < 0) throw TestError("adf: max_lag must be >= 0");
  // one trend term: at least as many observations as the longest regression needs
  maxlag = std::min(maxlag, static_cast<int>(n / 2) - 2);
  if (maxlag < 0) throw TestError("adf: series too short for any lag");

  std::vector<double> dy(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) dy[i] = series[i + 1] - series[i];
  const int ndiff = static_cast<int>(n) - 1;

  // Lag search on the common sample that drops the first `maxlag` differences.
  int best_lag = 0;
  if (maxlag > 0) {
    const int nobs = ndiff - maxlag;
    const Eigen::MatrixXd full = design(series, dy, maxlag, maxlag, nobs);
    const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(dy.data() + maxlag, nobs);
    double best_ic = std::numeric_limits<double>::infinity();
    for (int lag = 0; lag <= maxlag; ++lag) {
      const OlsFit fit = ols(full.leftCols(2 + lag), target, false);
      const double ic = aic(fit.ssr, nobs, 2 + lag);
      if (ic < best_ic) {
        best_ic = ic;
        best_lag = lag;
      }
    }
  }

  const int nobs = ndiff - best_lag;
  const Eigen::MatrixXd x = design(series, dy, best_lag, best_lag, nobs);
  const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(dy.data() + best_lag, nobs);
  const OlsFit fit = ols(x, target, true);
  const double stat = fit.beta[1] / fit.level_stderr;
  if (!std::isfinite(stat)) throw TestError("adf: degenerate regression (zero residual variance)");

  AdfResult result;
  result.test_statistic = stat;
  result.p_value = mackinnon_pvalue(stat);
  result.chosen_lag = best_lag;
  result.n_obs_used = nobs;
  return result;
}

FeaturePolicy feature_policy_from_string(const std::string& name) {
  if (name == "all") return FeaturePolicy::All;
  if (name == "any") return FeaturePolicy::Any;
  if (name == "majority") return FeaturePolicy::Majority;
  throw ConfigError("unknown feature policy '" + name + "' (expected all, any, majority)");
}

std::string to_string(FeaturePolicy policy) {
  switch (policy) {
    case FeaturePolicy::All: return "all";
    case FeaturePolicy::Any: return "any";
    case FeaturePolicy::Majority: return "majority";
  }
  return "all";
}

namespace {

bool span_is_stationary(const InstanceView& instance, std::size_t begin, std::size_t end,
                        const EtaOptions& options) {
  const auto d = static_cast<std::size_t>(instance.rows());
  std::size_t passed = 0;
  std::vector<double> buf(end - begin);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t t = begin; t < end; ++t)
      buf[t - begin] = instance(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t));
    bool ok = false;
    try {
      ok = adf_test(buf).p_value < options.p_threshold;
    } catch (const TestError&) {
      ok = false;  // degenerate span counts as a failed verdict
    }
    if (ok) ++passed;
    if (options.policy == FeaturePolicy::All && !ok) return false;
    if (options.policy == FeaturePolicy::Any && ok) return true;
  }
  switch (options.policy) {
    case FeaturePolicy::All: return passed == d;
    case FeaturePolicy::Any: return passed > 0;
    case FeaturePolicy::Majority: return 2 * passed > d;
  }
  return false;
}

}  // namespace

NeighborhoodSpec estimate_eta(const InstanceView& instance, std::size_t t, int delta,
                              const EtaOptions& options) {
  if (delta < 1) throw ConfigError("window size must be >= 1");
  if (options.eta_max < 1) throw ConfigError("eta_max must be >= 1");
  const auto length = static_cast<std::size_t>(instance.cols());
  const std::size_t reach = static_cast<std::size_t>(options.eta_max) * static_cast<std::size_t>(delta);
  if (t < reach || t + reach > length)
    throw RangeError("eta span of +/-" + std::to_string(reach) + " steps around t=" +
                     std::to_string(t) + " leaves [0, " + std::to_string(length) + ")");

  NeighborhoodSpec spec{.eta = 1, .eta_max = options.eta_max, .delta = delta,
                        .p_threshold = options.p_threshold};
  for (int eta = 2; eta <= options.eta_max; ++eta) {
    const std::size_t r = static_cast<std::size_t>(eta) * static_cast<std::size_t>(delta);
    if (!span_is_stationary(instance, t - r, t + r, options)) break;
    spec.eta = eta;
  }
  return spec;
}

int EtaCache::get_or_compute(std::size_t instance, std::size_t t, int delta,
                             const std::function<int()>& compute) {
  const Key key{instance, t, delta};
  {
    std::shared_lock lock(mutex_);
    if (auto it = values_.find(key); it != values_.end()) {
      ++hits_;
      return it->second;
    }
  }
  const int eta = compute();
  std::unique_lock lock(mutex_);
  return values_.try_emplace(key, eta).first->second;
}

std::size_t EtaCache::size() const {
  std::shared_lock lock(mutex_);
  return values_.size();
}

}  // namespace tnc::stationarity
