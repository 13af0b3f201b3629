#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tnc::cli {

struct CommonOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct DataSource {
  std::optional<std::string> dataset;
  std::vector<std::string> csv_files;
  std::optional<std::string> label_column;
};

struct SimulateOptions {
  CommonOptions common;
  std::optional<std::string> out;
  std::optional<std::size_t> instances;
  std::optional<std::size_t> length;
};

struct TrainOptions {
  CommonOptions common;
  DataSource data;
  std::optional<std::string> out_dir;
  std::optional<int> epochs, delta, encoding_size, hidden_size, samples, anchors, batch, eta_max;
  std::optional<double> w, lr, p_threshold;
  std::optional<std::string> policy;
};

struct EvalOptions {
  CommonOptions common;
  DataSource data;
  std::optional<std::string> checkpoint;
  std::optional<std::string> mode;
  std::optional<std::string> out_dir;
  std::optional<int> stride, k, knn_k, sample_cap;
  std::optional<double> test_fraction;
  std::vector<std::size_t> instances;
};

struct AdfOptions {
  std::string csv;
  std::string column;
  std::optional<int> max_lag;
};

struct ConvertOptions {
  std::vector<std::string> csv_files;
  std::optional<std::string> label_column;
  std::string out;
  bool normalize = false;
};

void cmd_simulate(const SimulateOptions& opt, std::ostream& out);
void cmd_train(const TrainOptions& opt, std::ostream& out);
void cmd_eval(const EvalOptions& opt, std::ostream& out);
void cmd_adf(const AdfOptions& opt, std::ostream& out);
void cmd_convert(const ConvertOptions& opt, std::ostream& out);

}  // namespace tnc::cli
