#include "tnc/simgen.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tnc/error.hpp"
#include "tnc/parallel.hpp"

namespace tnc::simgen {

namespace {

constexpr double kProbTolerance = 1e-12;
constexpr double kJitter = 1e-8;

void check_probability_vector(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(what + ": entry outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbTolerance) {
    std::ostringstream msg;
    msg << what << ": entries sum to " << sum << ", expected 1";
    throw ConfigError(msg.str());
  }
}

int draw_categorical(std::span<const double> p, Rng& rng) {
  const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (r < acc) return static_cast<int>(i);
  }
  // r landed in the rounding gap above the cumulative sum
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return static_cast<int>(i);
  return 0;
}

}  // namespace

Eigen::MatrixXd HmmSpec::transition_matrix() const {
  if (n_states < 1) throw ConfigError("hmm: n_states must be >= 1");
  Eigen::MatrixXd p(n_states, n_states);
  for (int i = 0; i < n_states; ++i)
    for (int j = 0; j < n_states; ++j) p(i, j) = (i == j) ? stay_prob : switch_prob;
  if (n_states == 1) p(0, 0) = 1.0;
  return p;
}

std::vector<double> HmmSpec::initial_distribution() const {
  if (!initial_dist.empty()) return initial_dist;
  return std::vector<double>(static_cast<std::size_t>(std::max(n_states, 1)),
                             1.0 / std::max(n_states, 1));
}

void HmmSpec::validate() const {
  if (n_states < 1) throw ConfigError("hmm: n_states must be >= 1");
  const Eigen::MatrixXd p = transition_matrix();
  for (int i = 0; i < n_states; ++i) {
    std::vector<double> row(p.cols());
    for (int j = 0; j < n_states; ++j) row[j] = p(i, j);
    check_probability_vector(row, "hmm transition row " + std::to_string(i));
  }
  const auto init = initial_distribution();
  if (static_cast<int>(init.size()) != n_states)
    throw ConfigError("hmm: initial_dist length differs from n_states");
  check_probability_vector(init, "hmm initial_dist");
}

StateSequence sample_state_sequence(const HmmSpec& spec, std::size_t length, Rng& rng) {
  spec.validate();
  if (length < 1) throw ConfigError("state sequence length must be >= 1");
  const Eigen::MatrixXd p = spec.transition_matrix();
  StateSequence states(length);
  states[0] = draw_categorical(spec.initial_distribution(), rng);
  std::vector<double> row(static_cast<std::size_t>(spec.n_states));
  for (std::size_t k = 1; k < length; ++k) {
    for (int j = 0; j < spec.n_states; ++j) row[j] = p(states[k - 1], j);
    states[k] = draw_categorical(row, rng);
  }
  return states;
}

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::GpPeriodic: return "gp_periodic";
    case ProcessKind::GpSquaredExp: return "gp_squared_exp";
    case ProcessKind::NarmaAlpha: return "narma_alpha";
    case ProcessKind::NarmaBeta: return "narma_beta";
  }
  return "unknown";
}

ProcessKind process_kind_from_string(const std::string& name) {
  if (name == "gp_periodic") return ProcessKind::GpPeriodic;
  if (name == "gp_squared_exp") return ProcessKind::GpSquaredExp;
  if (name == "narma_alpha") return ProcessKind::NarmaAlpha;
  if (name == "narma_beta") return ProcessKind::NarmaBeta;
  throw ConfigError("unknown process kind '" + name + "'");
}

void ProcessSpec::validate() const {
  if (is_gp()) {
    // variance 0 is accepted and yields the zero process
    if (!(variance >= 0.0)) throw ConfigError("gp variance must be >= 0");
    if (!(lengthscale > 0.0)) throw ConfigError("gp lengthscale must be > 0");
    if (kind == ProcessKind::GpPeriodic && !(period > 0.0))
      throw ConfigError("gp period must be > 0");
  } else {
    if (order < 1) throw ConfigError("narma order must be >= 1");
    if (!(input_high >= input_low)) throw ConfigError("narma input range is empty");
  }
}

ProcessSpec ProcessSpec::gp_periodic(double variance, double lengthscale, double period) {
  return {.kind = ProcessKind::GpPeriodic, .variance = variance, .lengthscale = lengthscale,
          .period = period};
}

ProcessSpec ProcessSpec::gp_squared_exp(double variance, double lengthscale) {
  return {.kind = ProcessKind::GpSquaredExp, .variance = variance, .lengthscale = lengthscale};
}

ProcessSpec ProcessSpec::narma_alpha(int order) {
  return {.kind = ProcessKind::NarmaAlpha, .order = order};
}

ProcessSpec ProcessSpec::narma_beta(int order) {
  return {.kind = ProcessKind::NarmaBeta, .order = order};
}

double kernel(const ProcessSpec& spec, double tau) {
  switch (spec.kind) {
    case ProcessKind::GpPeriodic: {
      const double s = std::sin(std::numbers::pi * std::abs(tau) / spec.period);
      return spec.variance * std::exp(-2.0 * s * s / (spec.lengthscale * spec.lengthscale));
    }
    case ProcessKind::GpSquaredExp:
      return spec.variance *
             std::exp(-tau * tau / (2.0 * spec.lengthscale * spec.lengthscale));
    default:
      throw ConfigError("kernel requested for non-GP process " + to_string(spec.kind));
  }
}

Eigen::MatrixXd gp_factor(const ProcessSpec& spec, std::size_t length) {
  if (!spec.is_gp()) throw ConfigError("sample_gp requires a GP process, got " + to_string(spec.kind));
  spec.validate();
  const auto n = static_cast<Eigen::Index>(length);
  if (spec.variance == 0.0) return Eigen::MatrixXd::Zero(n, n);
  // Stationary kernel: the Gram matrix is Toeplitz in |i - j|.
  std::vector<double> by_lag(length);
  for (std::size_t l = 0; l < length; ++l) by_lag[l] = kernel(spec, static_cast<double>(l));
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = by_lag[static_cast<std::size_t>(std::abs(i - j))];
  gram.diagonal().array() += kJitter * spec.variance;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "gram matrix not positive definite after jitter (kind=" << to_string(spec.kind)
        << " variance=" << spec.variance << " lengthscale=" << spec.lengthscale
        << " period=" << spec.period << " length=" << length << ")";
    throw NumericalError(msg.str());
  }
  return llt.matrixL();
}

namespace {

std::vector<double> apply_factor(const Eigen::MatrixXd& factor, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(factor.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  const Eigen::VectorXd x = factor.triangularView<Eigen::Lower>() * z;
  return {x.data(), x.data() + x.size()};
}

}  // namespace

std::vector<double> sample_gp(const ProcessSpec& spec, std::size_t length, Rng& rng) {
  if (length < 1) throw ConfigError("sample_gp length must be >= 1");
  return apply_factor(gp_factor(spec, length), rng);
}

std::shared_ptr<const Eigen::MatrixXd> GpFactorCache::factor(const ProcessSpec& spec,
                                                             std::size_t length) {
  const Key key{static_cast<int>(spec.kind), spec.variance, spec.lengthscale, spec.period, length};
  {
    std::lock_guard lock(mutex_);
    if (auto it = factors_.find(key); it != factors_.end()) return it->second;
  }
  auto computed = std::make_shared<const Eigen::MatrixXd>(gp_factor(spec, length));
  std::lock_guard lock(mutex_);
  return factors_.try_emplace(key, std::move(computed)).first->second;
}

std::vector<double> GpFactorCache::sample(const ProcessSpec& spec, std::size_t length, Rng& rng) {
  if (length < 1) throw ConfigError("sample_gp length must be >= 1");
  return apply_factor(*factor(spec, length), rng);
}

NarmaCoefficients narma_coefficients(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::NarmaAlpha: return {0.3, 0.05, 1.5, 0.1};
    case ProcessKind::NarmaBeta: return {0.1, 0.25, 2.5, -0.005};
    default: throw ConfigError("not a NARMA process: " + to_string(kind));
  }
}

NarmaTrace narma_with_input(const ProcessSpec& spec, std::span<const double> input) {
  const NarmaCoefficients c = narma_coefficients(spec.kind);
  spec.validate();
  const auto n = static_cast<std::ptrdiff_t>(spec.order);
  const auto len = static_cast<std::ptrdiff_t>(input.size());
  NarmaTrace trace{std::vector<double>(input.size(), 0.0), {input.begin(), input.end()}};
  auto y_at = [&](std::ptrdiff_t k) { return k >= 0 ? trace.y[k] : 0.0; };
  auto u_at = [&](std::ptrdiff_t k) { return k >= 0 ? trace.u[k] : 0.0; };
  for (std::ptrdiff_t k = 0; k < len; ++k) {
    // y[k] holds y(k+1); y(k) is y[k-1].
    const double yk = y_at(k - 1);
    double window_sum = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) window_sum += y_at(k - 1 - i);
    const double next =
        c.self * yk + c.cross * yk * window_sum + c.input * u_at(k - (n - 1)) * u_at(k) + c.constant;
    if (!std::isfinite(next) || std::abs(next) > kNarmaOverflowGuard) {
      std::ostringstream msg;
      msg << to_string(spec.kind) << " (order " << spec.order << ") diverged at step " << k;
      throw GenerationError(msg.str());
    }
    trace.y[k] = next;
  }
  return trace;
}

NarmaTrace gen_narma(const ProcessSpec& spec, std::size_t length, Rng& rng) {
  spec.validate();
  std::uniform_real_distribution<double> drive(spec.input_low, spec.input_high);
  std::vector<double> u(length);
  for (auto& v : u) v = drive(rng);
  return narma_with_input(spec, u);
}

void GeneratorSpec::validate() const {
  if (grid.empty()) throw ConfigError("generator grid is empty");
  const std::size_t d = grid.front().size();
  if (d == 0) throw ConfigError("generator grid has no features");
  for (const auto& row : grid) {
    if (row.size() != d) throw ConfigError("generator grid rows differ in feature count");
    for (const auto& p : row) p.validate();
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (hold_steps < 1) throw ConfigError("hold_steps must be >= 1");
  if (correlated_target >= 0) {
    if (correlated_source < 0 || static_cast<std::size_t>(correlated_source) >= d ||
        static_cast<std::size_t>(correlated_target) >= d || correlated_source == correlated_target)
      throw ConfigError("correlated feature indices out of range");
    for (std::size_t s = 0; s < grid.size(); ++s)
      if (grid[s][correlated_source].kind != grid[s][correlated_target].kind)
        throw ConfigError("state " + std::to_string(s) +
                          ": correlated features must share a process kind");
    if (!(correlation_weight >= 0.0 && correlation_weight <= 1.0))
      throw ConfigError("correlation_weight must lie in [0,1]");
  }
  if (narma_retries < 1) throw ConfigError("narma_retries must be >= 1");
}

GeneratorSpec benchmark_generator() {
  const auto per = ProcessSpec::gp_periodic();
  const auto se = ProcessSpec::gp_squared_exp();
  const auto na = ProcessSpec::narma_alpha();
  const auto nb = ProcessSpec::narma_beta();
  GeneratorSpec gen;
  gen.grid = {{per, per, se}, {na, na, nb}, {se, se, per}, {nb, nb, na}};
  return gen;
}

HmmSpec benchmark_hmm() { return HmmSpec{}; }

std::vector<Segment> segments(std::span<const int> states) {
  std::vector<Segment> out;
  std::size_t begin = 0;
  for (std::size_t t = 1; t <= states.size(); ++t) {
    if (t == states.size() || states[t] != states[begin]) {
      out.push_back({begin, t, states[begin]});
      begin = t;
    }
  }
  return out;
}

std::vector<int> expand_states(std::span<const int> chain, int hold_steps, std::size_t length) {
  std::vector<int> out(length);
  for (std::size_t t = 0; t < length; ++t) {
    const std::size_t k = t / static_cast<std::size_t>(hold_steps);
    if (k >= chain.size()) throw ContractError("state chain shorter than requested length");
    out[t] = chain[k];
  }
  return out;
}

namespace {

std::vector<double> emit_process(const GeneratorSpec& gen, const ProcessSpec& spec,
                                 std::size_t length, Rng& rng, GpFactorCache& cache) {
  if (spec.is_gp()) return cache.sample(spec, length, rng);
  for (int attempt = 1;; ++attempt) {
    try {
      return gen_narma(spec, length, rng).y;
    } catch (const GenerationError&) {
      if (attempt >= gen.narma_retries) throw;
    }
  }
}

}  // namespace

Eigen::MatrixXd emit_instance(const GeneratorSpec& gen, std::span<const int> states, Rng& rng,
                              GpFactorCache& cache) {
  const auto d = static_cast<Eigen::Index>(gen.n_features());
  Eigen::MatrixXd x(d, static_cast<Eigen::Index>(states.size()));
  for (const Segment& seg : segments(states)) {
    if (seg.state < 0 || static_cast<std::size_t>(seg.state) >= gen.n_states())
      throw ContractError("state " + std::to_string(seg.state) + " missing from generator grid");
    const auto& row = gen.grid[static_cast<std::size_t>(seg.state)];
    const std::size_t len = seg.end - seg.begin;
    for (Eigen::Index f = 0; f < d; ++f) {
      if (f == gen.correlated_target) continue;
      const auto draw = emit_process(gen, row[f], len, rng, cache);
      for (std::size_t i = 0; i < len; ++i) x(f, seg.begin + i) = draw[i];
    }
    if (gen.correlated_target >= 0) {
      const auto own = emit_process(gen, row[gen.correlated_target], len, rng, cache);
      const double a = gen.correlation_weight;
      for (std::size_t i = 0; i < len; ++i)
        x(gen.correlated_target, seg.begin + i) =
            a * x(gen.correlated_source, seg.begin + i) + (1.0 - a) * own[i];
    }
  }
  if (gen.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, gen.noise_sigma);
    for (Eigen::Index f = 0; f < d; ++f)
      for (Eigen::Index t = 0; t < x.cols(); ++t) x(f, t) += noise(rng);
  }
  return x;
}

TimeSeriesDataset assemble_dataset(const GeneratorSpec& gen, const HmmSpec& hmm,
                                   std::size_t n_instances, std::size_t length,
                                   std::uint64_t seed, int threads) {
  gen.validate();
  hmm.validate();
  if (static_cast<std::size_t>(hmm.n_states) > gen.n_states())
    throw ConfigError("generator grid covers " + std::to_string(gen.n_states()) +
                      " states but the chain has " + std::to_string(hmm.n_states));
  if (length < 1 || n_instances < 1) throw ConfigError("dataset must have >= 1 instance and step");

  TimeSeriesDataset data(n_instances, gen.n_features(), length);
  data.enable_labels();
  GpFactorCache cache;
  const std::size_t hold = static_cast<std::size_t>(gen.hold_steps);
  const std::size_t chain_len = (length + hold - 1) / hold;

  parallel_for(n_instances, threads, [&](std::size_t i) {
    Rng rng = derive_rng(seed, i);
    const auto chain = sample_state_sequence(hmm, chain_len, rng);
    const auto states = expand_states(chain, gen.hold_steps, length);
    const Eigen::MatrixXd x = emit_instance(gen, states, rng, cache);
    for (Eigen::Index f = 0; f < x.rows(); ++f)
      for (std::size_t t = 0; t < length; ++t)
        data.at(i, static_cast<std::size_t>(f), t) = static_cast<float>(x(f, static_cast<Eigen::Index>(t)));
    for (std::size_t t = 0; t < length; ++t) data.label(i, t) = static_cast<std::uint8_t>(states[t]);
  });

  if (gen.normalize) data.normalize();
  data.validate();
  return data;
}

}  // namespace tnc::simgen
