#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tnc/checkpoint.hpp"
#include "tnc/dataset.hpp"
#include "tnc/loss.hpp"
#include "tnc/stationarity.hpp"

namespace tnc::train {

struct TrainConfig {
  int delta = 50;
  int encoding_size = 10;
  int hidden_size = 64;
  int discriminator_hidden = 0;  ///< 0 means 4 * encoding_size
  bool bidirectional = true;

  double w = 0.05;
  int samples_per_anchor = 20;
  int anchors_per_instance = 20;
  int anchors_per_batch = 10;
  int validation_anchors_per_instance = 5;
  int epochs = 30;

  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;

  std::uint64_t seed = 42;
  int eta_max = 3;
  double p_threshold = 0.01;
  stationarity::FeaturePolicy policy = stationarity::FeaturePolicy::All;
  double validation_fraction = 0.2;
  int threads = 1;

  void validate() const;
  model::EncoderConfig encoder_config(int input_features) const;
  model::DiscriminatorConfig discriminator_config() const;
  /// Flat snapshot stored in checkpoints.
  std::map<std::string, std::string> to_map() const;
};

/// Adam over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t size, double learning_rate, double beta1, double beta2, double eps,
       double weight_decay = 0.0);
  void step(std::span<float> params, std::span<const float> grads);
  long long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_, weight_decay_;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

struct EpochRecord {
  int epoch = 0;
  BatchLoss train;
  BatchLoss validation;
  double mean_eta = 0.0;
  int anchors = 0;
  int skipped_anchors = 0;
  double seconds = 0.0;
};

std::string format_epoch(const EpochRecord& rec);

struct TrainResult {
  model::ModelCheckpoint checkpoint;  ///< best validation loss
  model::ModelCheckpoint last;
  std::vector<EpochRecord> history;
  std::vector<std::size_t> train_instances;
  std::vector<std::size_t> validation_instances;
  int best_epoch = 0;
};

/// Seeded instance split: first the validation fraction, rest train.
void split_instances(std::size_t n, double validation_fraction, std::uint64_t seed,
                     std::vector<std::size_t>& train, std::vector<std::size_t>& validation);

/// Trains encoder and discriminator jointly on the weighted contrastive
/// objective. Progress lines go to `log` when given.
TrainResult train(const TimeSeriesDataset& data, const TrainConfig& config,
                  std::ostream* log = nullptr);

}  // namespace tnc::train
