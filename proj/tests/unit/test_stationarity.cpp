#include <gtest/gtest.h>

#include <atomic>
#include <numeric>
#include <random>
#include <thread>

#include "oracles.hpp"
#include "tnc/error.hpp"
#include "tnc/stationarity.hpp"

using namespace tnc;
using namespace tnc::stationarity;

namespace {

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
  auto x = white_noise(n, seed);
  std::partial_sum(x.begin(), x.end(), x.begin());
  return x;
}

TimeSeriesDataset one_instance(const std::vector<std::vector<double>>& features) {
  TimeSeriesDataset d(1, features.size(), features[0].size());
  for (std::size_t f = 0; f < features.size(); ++f)
    for (std::size_t t = 0; t < features[f].size(); ++t) d.at(0, f, t) = static_cast<float>(features[f][t]);
  return d;
}

}  // namespace

TEST(Adf, MatchesStatsmodelsReferenceCases) {
  const auto cases = oracle::read_adf_cases(std::string(TNC_ORACLE_DIR) + "/adf_cases.txt");
  ASSERT_EQ(cases.size(), 7u);
  for (const auto& c : cases) {
    SCOPED_TRACE(c.name);
    const AdfResult r = adf_test(c.x, c.maxlag);
    EXPECT_EQ(r.chosen_lag, c.used_lag);
    EXPECT_EQ(r.n_obs_used, c.nobs);
    EXPECT_NEAR(r.test_statistic, c.statistic, 1e-8 * std::max(1.0, std::abs(c.statistic)));
    EXPECT_NEAR(r.p_value, c.p_value, 1e-9 + 1e-7 * c.p_value);
  }
}

TEST(Adf, LagZeroStatisticMatchesNormalEquations) {
  const std::vector<double> y{0.3, -0.1, 0.8, 0.2, -0.5, 0.4, 1.1, 0.6, -0.2, 0.0,
                              0.9, -0.7, 0.5, 0.1, -0.3, 0.7, 0.2, -0.4, 0.6, 0.3};
  // Regress dy_t on [1, y_{t-1}] by the 2x2 normal equations.
  const std::size_t n = y.size() - 1;
  double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t t = 1; t < y.size(); ++t) {
    const double x = y[t - 1], d = y[t] - y[t - 1];
    s1 += 1, sx += x, sxx += x * x, sy += d, sxy += x * d;
  }
  const double det = s1 * sxx - sx * sx;
  const double a = (sxx * sy - sx * sxy) / det;
  const double b = (s1 * sxy - sx * sy) / det;
  double ssr = 0;
  for (std::size_t t = 1; t < y.size(); ++t) {
    const double e = (y[t] - y[t - 1]) - a - b * y[t - 1];
    ssr += e * e;
  }
  const double se_b = std::sqrt(ssr / static_cast<double>(n - 2) * s1 / det);
  const AdfResult r = adf_test(y, 0);
  EXPECT_EQ(r.chosen_lag, 0);
  EXPECT_EQ(r.n_obs_used, static_cast<int>(n));
  EXPECT_NEAR(r.test_statistic, b / se_b, 1e-8);
}

TEST(Adf, MacKinnonPValueKnownPoints) {
  // Reference values from the constant-only response surface.
  EXPECT_NEAR(mackinnon_pvalue(-2.86), 0.05017, 5e-4);
  EXPECT_NEAR(mackinnon_pvalue(-3.43), 0.00998, 5e-4);
  EXPECT_DOUBLE_EQ(mackinnon_pvalue(-30.0), 0.0);
  EXPECT_DOUBLE_EQ(mackinnon_pvalue(5.0), 1.0);
  double prev = 0;
  for (double tau = -18.0; tau < 2.7; tau += 0.05) {
    const double p = mackinnon_pvalue(tau);
    EXPECT_GE(p, prev - 1e-12);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    prev = p;
  }
}

TEST(Adf, DefaultMaxLag) {
  EXPECT_EQ(default_max_lag(100), 12);
  EXPECT_EQ(default_max_lag(500), 17);
  EXPECT_EQ(default_max_lag(2000), 25);
  EXPECT_LE(default_max_lag(20), 20 / 2 - 2);
}

TEST(Adf, RejectsShortConstantAndNonFiniteSeries) {
  EXPECT_THROW(adf_test(std::vector<double>(11, 0.5)), TestError);
  EXPECT_THROW(adf_test(std::vector<double>(50, 2.0)), TestError);
  auto x = white_noise(50, 3);
  x[10] = std::nan("");
  EXPECT_THROW(adf_test(x), TestError);
}

TEST(Adf, InvariantUnderConstantShift) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = seed % 2 ? white_noise(200, seed) : random_walk(200, seed);
    const AdfResult base = adf_test(x);
    std::mt19937_64 rng(seed);
    const double c = std::uniform_real_distribution<double>(-50, 50)(rng);
    for (auto& v : x) v += c;
    const AdfResult shifted = adf_test(x);
    EXPECT_EQ(shifted.chosen_lag, base.chosen_lag);
    EXPECT_NEAR(shifted.test_statistic, base.test_statistic, 1e-8);
  }
}

TEST(Adf, ResultInvariantsOnRandomSeries) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(12, 400)(rng);
    const auto x = seed % 3 == 0 ? random_walk(n, seed) : white_noise(n, seed);
    const AdfResult r = adf_test(x);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    EXPECT_GE(r.chosen_lag, 0);
    EXPECT_LT(r.chosen_lag, r.n_obs_used);
    EXPECT_EQ(adf_test(x).test_statistic, r.test_statistic);
  }
}

TEST(Adf, CalibrationSmallSample) {
  int noise_rejects = 0, walk_rejects = 0;
  for (std::uint64_t s = 0; s < 60; ++s) {
    noise_rejects += adf_test(white_noise(500, 1000 + s)).p_value < 0.05;
    walk_rejects += adf_test(random_walk(500, 5000 + s)).p_value < 0.05;
  }
  EXPECT_GE(noise_rejects, 57);
  EXPECT_LE(walk_rejects, 9);
}

TEST(Neighborhood, SpreadAndMargin) {
  NeighborhoodSpec s{.eta = 3, .eta_max = 3, .delta = 50, .p_threshold = 0.01};
  EXPECT_DOUBLE_EQ(s.gaussian_spread(), 150.0);
  EXPECT_DOUBLE_EQ(s.non_neighbor_margin(), 600.0);
}

TEST(EstimateEta, StationaryInstanceReachesMaximum) {
  const auto d = one_instance({white_noise(600, 1), white_noise(600, 2), white_noise(600, 3)});
  const auto spec = estimate_eta(d.instance(0), 300, 50);
  EXPECT_EQ(spec.eta, 3);
  EXPECT_EQ(spec.delta, 50);
}

TEST(EstimateEta, RegimeChangeAtOneWindowGivesOne) {
  // White noise up to t + delta, then a random walk.
  const std::size_t T = 600, t = 300, delta = 50;
  std::vector<std::vector<double>> f;
  for (std::uint64_t k = 0; k < 3; ++k) {
    auto x = white_noise(T, 10 + k);
    const auto walk = random_walk(T, 20 + k);
    for (std::size_t i = t + delta; i < T; ++i) x[i] = 5.0 + 3.0 * walk[i];
    f.push_back(x);
  }
  const auto d = one_instance(f);
  EXPECT_EQ(estimate_eta(d.instance(0), t, static_cast<int>(delta)).eta, 1);
}

TEST(EstimateEta, ZeroThresholdNeverPasses) {
  const auto d = one_instance({white_noise(600, 5)});
  EXPECT_EQ(estimate_eta(d.instance(0), 300, 50, {.p_threshold = 0.0}).eta, 1);
}

TEST(EstimateEta, OutOfBoundsIsRangeError) {
  const auto d = one_instance({white_noise(600, 5)});
  EXPECT_THROW(estimate_eta(d.instance(0), 149, 50), RangeError);
  EXPECT_THROW(estimate_eta(d.instance(0), 451, 50), RangeError);
  EXPECT_NO_THROW(estimate_eta(d.instance(0), 150, 50));
  EXPECT_NO_THROW(estimate_eta(d.instance(0), 450, 50));
}

TEST(EstimateEta, ResultIsPrefixOfPassingSpans) {
  // Whatever eta comes back, every span up to it must pass and the next must fail.
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> x = white_noise(800, seed);
    const auto walk = random_walk(800, seed + 99);
    const std::size_t cut = std::uniform_int_distribution<std::size_t>(200, 600)(rng);
    for (std::size_t i = cut; i < 800; ++i) x[i] = 2 * walk[i];
    const auto d = one_instance({x});
    const std::size_t t = 400;
    const int eta = estimate_eta(d.instance(0), t, 40, {.eta_max = 4}).eta;
    for (int k = 2; k <= 4; ++k) {
      std::vector<double> span(x.begin() + static_cast<long>(t - k * 40), x.begin() + static_cast<long>(t + k * 40));
      std::vector<double> as_float;
      for (double v : span) as_float.push_back(static_cast<float>(v));
      bool pass = false;
      try {
        pass = adf_test(as_float).p_value < 0.01;
      } catch (const TestError&) {
      }
      if (k <= eta) EXPECT_TRUE(pass) << "k=" << k << " eta=" << eta;
      if (k == eta + 1) EXPECT_FALSE(pass) << "k=" << k << " eta=" << eta;
    }
  }
}

TEST(EstimateEta, FeaturePolicies) {
  const auto stationary = white_noise(600, 7);
  auto walk = random_walk(600, 8);
  const auto d = one_instance({stationary, walk, walk});
  EXPECT_EQ(estimate_eta(d.instance(0), 300, 50, {.policy = FeaturePolicy::All}).eta, 1);
  EXPECT_EQ(estimate_eta(d.instance(0), 300, 50, {.policy = FeaturePolicy::Any}).eta, 3);
  EXPECT_EQ(estimate_eta(d.instance(0), 300, 50, {.policy = FeaturePolicy::Majority}).eta, 1);
  EXPECT_EQ(feature_policy_from_string("majority"), FeaturePolicy::Majority);
  EXPECT_EQ(to_string(FeaturePolicy::Any), "any");
  EXPECT_THROW(feature_policy_from_string("most"), ConfigError);
}

TEST(EtaCache, ConcurrentReadersAndWriters) {
  EtaCache cache;
  std::atomic<int> computed{0};
  std::vector<std::jthread> pool;
  for (int w = 0; w < 8; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = 0; i < 200; ++i)
        EXPECT_EQ(cache.get_or_compute(i % 7, i % 50, 50, [&] {
          ++computed;
          return static_cast<int>(1 + (i % 50) % 3);
        }), static_cast<int>(1 + (i % 50) % 3));
    });
  }
  pool.clear();
  EXPECT_EQ(cache.size(), 200u);  // (i mod 7, i mod 50) is distinct for i < 350
  EXPECT_GE(computed.load(), 200);
  EXPECT_EQ(cache.hits() + static_cast<std::size_t>(computed.load()), 1600u);
}
