#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of these share code with the library beyond plain types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tnc/discriminator.hpp"
#include "tnc/encoder.hpp"
#include "tnc/objective.hpp"

namespace oracle {

using Points = std::vector<std::vector<double>>;

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double silhouette(const Points& x, const std::vector<int>& c) {
  double total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::map<int, std::pair<double, int>> per;  // cluster -> (sum, count)
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == i) continue;
      per[c[j]].first += dist(x[i], x[j]);
      per[c[j]].second += 1;
    }
    if (!per.count(c[i])) continue;  // singleton
    const double a = per[c[i]].first / per[c[i]].second;
    double b = std::numeric_limits<double>::infinity();
    for (auto& [k, v] : per)
      if (k != c[i]) b = std::min(b, v.first / v.second);
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(x.size());
}

inline double davies_bouldin(const Points& x, const std::vector<int>& c) {
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < x.size(); ++i) members[c[i]].push_back(i);
  std::vector<std::vector<double>> centroid;
  std::vector<double> scatter;
  for (auto& [k, idx] : members) {
    std::vector<double> m(x[0].size(), 0.0);
    for (auto i : idx)
      for (std::size_t d = 0; d < m.size(); ++d) m[d] += x[i][d] / static_cast<double>(idx.size());
    double s = 0;
    for (auto i : idx) s += dist(x[i], m);
    centroid.push_back(m);
    scatter.push_back(s / static_cast<double>(idx.size()));
  }
  double total = 0;
  for (std::size_t i = 0; i < centroid.size(); ++i) {
    double worst = 0;
    for (std::size_t j = 0; j < centroid.size(); ++j)
      if (i != j) worst = std::max(worst, (scatter[i] + scatter[j]) / dist(centroid[i], centroid[j]));
    total += worst;
  }
  return total / static_cast<double>(centroid.size());
}

// Mean over positives of the precision at that positive's score threshold.
inline double average_precision(const std::vector<double>& s, const std::vector<bool>& pos) {
  double n_pos = 0, total = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!pos[i]) continue;
    n_pos += 1;
    double tp = 0, all = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] >= s[i]) {
        all += 1;
        tp += pos[j] ? 1 : 0;
      }
    }
    total += tp / all;
  }
  return total / n_pos;
}

// Minimum over every monotone warping path, enumerated recursively.
inline double dtw(const Points& a, const Points& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    acc += dist(a[i], b[j]);
    if (i + 1 == a.size() && j + 1 == b.size()) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < a.size()) walk(i + 1, j, acc);
    if (j + 1 < b.size()) walk(i, j + 1, acc);
    if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

// Smallest within-cluster sum of squares over all 2-partitions.
inline double best_two_partition_inertia(const Points& x) {
  const std::size_t n = x.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    double sse = 0;
    for (int side = 0; side < 2; ++side) {
      std::vector<double> m(x[0].size(), 0.0);
      int cnt = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1) == static_cast<std::uint64_t>(side)) {
          for (std::size_t d = 0; d < m.size(); ++d) m[d] += x[i][d];
          ++cnt;
        }
      for (auto& v : m) v /= cnt;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1) == static_cast<std::uint64_t>(side)) sse += std::pow(dist(x[i], m), 2);
    }
    best = std::min(best, sse);
  }
  return best;
}

struct AdfCase {
  std::string name;
  int maxlag = 0;
  double statistic = 0, p_value = 0;
  int used_lag = 0, nobs = 0;
  std::vector<double> x;
};

inline std::vector<AdfCase> read_adf_cases(const std::string& path) {
  std::ifstream f(path);
  std::vector<AdfCase> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    AdfCase c;
    std::size_t n = 0;
    std::istringstream head(line);
    head >> c.name >> c.maxlag >> c.statistic >> c.p_value >> c.used_lag >> c.nobs >> n;
    std::getline(f, line);
    std::istringstream body(line);
    c.x.resize(n);
    for (auto& v : c.x) body >> v;
    out.push_back(std::move(c));
  }
  return out;
}

// Scalar GRU over one D x L window, gates [r; z; n], followed by the
// projection; a straight transcription of the update equations.
inline std::vector<double> gru_window(const tnc::model::ParamStore<double>& p,
                                      const tnc::model::EncoderConfig& cfg,
                                      const std::vector<std::vector<double>>& window /* [d][t] */) {
  const int H = cfg.hidden_size, D = cfg.input_features, L = cfg.window_size;
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> concat;
  for (int dir = 0; dir < cfg.directions(); ++dir) {
    const std::string pre = dir == 0 ? "gru.fwd." : "gru.bwd.";
    const auto wih = p.matrix(pre + "w_ih");
    const auto whh = p.matrix(pre + "w_hh");
    const auto bih = p.vector(pre + "b_ih");
    const auto bhh = p.vector(pre + "b_hh");
    std::vector<double> h(static_cast<std::size_t>(H), 0.0);
    for (int s = 0; s < L; ++s) {
      const int t = dir == 0 ? s : L - 1 - s;
      std::vector<double> gi(3 * H), gh(3 * H);
      for (int r = 0; r < 3 * H; ++r) {
        gi[r] = bih(r);
        gh[r] = bhh(r);
        for (int d = 0; d < D; ++d) gi[r] += wih(r, d) * window[d][t];
        for (int k = 0; k < H; ++k) gh[r] += whh(r, k) * h[k];
      }
      std::vector<double> next(H);
      for (int k = 0; k < H; ++k) {
        const double rg = sig(gi[k] + gh[k]);
        const double zg = sig(gi[H + k] + gh[H + k]);
        const double ng = std::tanh(gi[2 * H + k] + rg * gh[2 * H + k]);
        next[k] = (1 - zg) * ng + zg * h[k];
      }
      h = next;
    }
    concat.insert(concat.end(), h.begin(), h.end());
  }
  const auto w = p.matrix("proj.weight");
  const auto b = p.vector("proj.bias");
  std::vector<double> z(cfg.encoding_size);
  for (int m = 0; m < cfg.encoding_size; ++m) {
    z[m] = b(m);
    for (std::size_t k = 0; k < concat.size(); ++k) z[m] += w(m, static_cast<Eigen::Index>(k)) * concat[k];
  }
  return z;
}

struct GradCheck {
  double max_relative_error = 0;
  std::size_t parameters = 0;
  std::string worst;
  double worst_analytic = 0, worst_numeric = 0;
};

// Finite differences of the batch objective in double precision
// against the analytic gradient, for one randomized small configuration.
inline GradCheck gradient_check(std::uint64_t seed) {
  using namespace tnc;
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  model::EncoderConfig ec{.input_features = pick(1, 3), .window_size = pick(2, 6), .hidden_size = pick(2, 5),
                          .encoding_size = pick(2, 4), .bidirectional = pick(0, 1) == 1};
  model::DiscriminatorConfig dc{.encoding_size = ec.encoding_size, .hidden_size = pick(2, 8)};
  const model::Encoder<double> enc(ec);
  const model::Discriminator<double> disc(dc);
  auto ep = enc.make_params();
  auto dp = disc.make_params();
  std::normal_distribution<double> g(0.0, 0.5);
  for (auto& v : ep.flat()) v = g(rng);
  for (auto& v : dp.flat()) v = g(rng);

  train::PairBatch<double> batch;
  batch.anchors = pick(1, 3);
  batch.neighbors_per_anchor = pick(1, 3);
  batch.non_neighbors_per_anchor = batch.neighbors_per_anchor;
  batch.inputs.resize(ec.input_features, ec.window_size * batch.windows());
  for (Eigen::Index i = 0; i < batch.inputs.size(); ++i) batch.inputs.data()[i] = g(rng) * 2;
  const double w = std::uniform_real_distribution<double>(0.0, 0.5)(rng);

  train::Gradients<double> grads{ep.zeros_like(), dp.zeros_like()};
  train::tnc_objective(enc, ep, disc, dp, batch, w, &grads);

  GradCheck out;
  constexpr double h = 1e-4;
  auto check = [&](model::ParamStore<double>& store, const model::ParamStore<double>& analytic) {
    for (const auto& info : store.tensors()) {
      for (std::size_t k = 0; k < info.size; ++k) {
        double& v = store.flat()[info.offset + k];
        const double keep = v;
        auto at = [&](double step) {
          v = keep + step;
          return train::tnc_objective(enc, ep, disc, dp, batch, w).total;
        };
        // Five-point stencil.
        const double numeric = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
        v = keep;
        const double a = analytic.flat()[info.offset + k];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        ++out.parameters;
        if (rel > out.max_relative_error) {
          out.max_relative_error = rel;
          out.worst = info.name + "[" + std::to_string(k) + "]";
          out.worst_analytic = a;
          out.worst_numeric = numeric;
        }
      }
    }
  };
  check(ep, grads.encoder);
  check(dp, grads.discriminator);
  return out;
}

}  // namespace oracle
