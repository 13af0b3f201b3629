#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tnc/dataset.hpp"
#include "tnc/rng.hpp"

namespace tnc::simgen {

/// Markov chain over latent states: stay with `stay_prob`, move to each
/// other state with `switch_prob`.
struct HmmSpec {
  int n_states = 4;
  double stay_prob = 0.85;
  double switch_prob = 0.05;
  std::vector<double> initial_dist;  ///< empty means uniform

  Eigen::MatrixXd transition_matrix() const;
  std::vector<double> initial_distribution() const;
  /// Throws ConfigError unless every row is a probability vector.
  void validate() const;
};

using StateSequence = std::vector<int>;

/// One draw of `length` chain steps.
StateSequence sample_state_sequence(const HmmSpec& spec, std::size_t length, Rng& rng);

enum class ProcessKind { GpPeriodic, GpSquaredExp, NarmaAlpha, NarmaBeta };

std::string to_string(ProcessKind kind);
ProcessKind process_kind_from_string(const std::string& name);

struct ProcessSpec {
  ProcessKind kind = ProcessKind::GpSquaredExp;
  // GP kernels
  double variance = 1.0;
  double lengthscale = 5.0;
  double period = 20.0;
  // NARMA
  int order = 10;
  double input_low = 0.0;
  double input_high = 0.5;

  bool is_gp() const { return kind == ProcessKind::GpPeriodic || kind == ProcessKind::GpSquaredExp; }
  void validate() const;

  static ProcessSpec gp_periodic(double variance = 1.0, double lengthscale = 1.0,
                                 double period = 20.0);
  static ProcessSpec gp_squared_exp(double variance = 1.0, double lengthscale = 5.0);
  static ProcessSpec narma_alpha(int order = 10);
  static ProcessSpec narma_beta(int order = 2);

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;
};

/// k(tau) for a GP kind.
double kernel(const ProcessSpec& spec, double tau);

/// Lower Cholesky factor of the jittered Gram matrix over steps 0..length-1.
Eigen::MatrixXd gp_factor(const ProcessSpec& spec, std::size_t length);

/// Zero-mean GP draw.
std::vector<double> sample_gp(const ProcessSpec& spec, std::size_t length, Rng& rng);

/// Thread-safe memo of Cholesky factors keyed by kernel and length.
class GpFactorCache {
 public:
  std::shared_ptr<const Eigen::MatrixXd> factor(const ProcessSpec& spec, std::size_t length);
  std::vector<double> sample(const ProcessSpec& spec, std::size_t length, Rng& rng);

 private:
  using Key = std::tuple<int, double, double, double, std::size_t>;
  std::mutex mutex_;
  std::map<Key, std::shared_ptr<const Eigen::MatrixXd>> factors_;
};

struct NarmaCoefficients {
  double self, cross, input, constant;
};
NarmaCoefficients narma_coefficients(ProcessKind kind);

struct NarmaTrace {
  std::vector<double> y;
  std::vector<double> u;
};

inline constexpr double kNarmaOverflowGuard = 1e6;

/// Evaluates the NARMA recurrence over a given driving input. Output step k
/// is y(k+1) computed from y(k), ..., y(k-n+1), u(k), u(k-n+1); history
/// before step 0 is zero.
NarmaTrace narma_with_input(const ProcessSpec& spec, std::span<const double> input);

/// Draws u(k) ~ Uniform(input_low, input_high) and evaluates the recurrence.
NarmaTrace gen_narma(const ProcessSpec& spec, std::size_t length, Rng& rng);

/// Per-state, per-feature emission table plus noise and correlation rule.
struct GeneratorSpec {
  std::vector<std::vector<ProcessSpec>> grid;  ///< [state][feature]
  double noise_sigma = 0.3;
  int correlated_source = 0;  ///< feature copied into the target
  int correlated_target = 1;  ///< -1 disables the rule
  double correlation_weight = 0.9;
  int hold_steps = 50;  ///< time steps per Markov-chain step
  bool normalize = true;
  int narma_retries = 16;

  std::size_t n_states() const { return grid.size(); }
  std::size_t n_features() const { return grid.empty() ? 0 : grid.front().size(); }
  void validate() const;
};

/// The four-state, three-feature configuration used for the simulated benchmark.
GeneratorSpec benchmark_generator();
HmmSpec benchmark_hmm();

struct Segment {
  std::size_t begin = 0, end = 0;
  int state = 0;
};

/// Maximal constant-state runs of a per-step state sequence.
std::vector<Segment> segments(std::span<const int> states);

/// Expands chain steps into `length` time steps, each chain step held for
/// `hold_steps`.
std::vector<int> expand_states(std::span<const int> chain, int hold_steps, std::size_t length);

/// Emits all features for a single instance given its per-step states.
/// Returns a D x T matrix (noise included, not normalized).
Eigen::MatrixXd emit_instance(const GeneratorSpec& gen, std::span<const int> states, Rng& rng,
                              GpFactorCache& cache);

/// Full synthetic dataset; instance i uses the stream derive_rng(seed, i).
TimeSeriesDataset assemble_dataset(const GeneratorSpec& gen, const HmmSpec& hmm,
                                   std::size_t n_instances, std::size_t length,
                                   std::uint64_t seed, int threads = 1);

}  // namespace tnc::simgen
