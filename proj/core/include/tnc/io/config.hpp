#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tnc/simgen.hpp"
#include "tnc/trainer.hpp"

namespace tnc::io {

inline constexpr int kConfigVersion = 1;

struct GeneratorConfig {
  std::size_t instances = 500;
  std::size_t length = 2000;
  simgen::GeneratorSpec spec = simgen::benchmark_generator();
  simgen::HmmSpec hmm = simgen::benchmark_hmm();
};

struct EvalConfig {
  std::string mode = "cluster";  ///< cluster | classify | trajectory | knn-baseline
  int stride = 0;                ///< 0 means the window size
  int k = 0;                     ///< clusters; 0 means the number of labeled states
  int kmeans_init = 10;
  double probe_l2 = 1e-4;
  double test_fraction = 0.2;
  int knn_k = 1;
  int knn_sample_cap = 50;  ///< instances drawn for the DTW baseline
};

struct PathsConfig {
  std::string dataset;
  std::string checkpoint;
  std::string output;
};

/// Everything a command needs besides its flags. `seed` and `threads`
/// override the copies inside `train`.
struct RunConfig {
  int version = kConfigVersion;
  std::uint64_t seed = 42;
  int threads = 1;
  GeneratorConfig generator;
  train::TrainConfig train;
  EvalConfig eval;
  PathsConfig paths;

  /// Copies seed and threads into the train section and validates.
  void resolve();
};

/// JSON document; every section and key is optional, unknown keys raise
/// ConfigError naming their path. Value checks happen in resolve().
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string dump_config(const RunConfig& config);
void save_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace tnc::io
